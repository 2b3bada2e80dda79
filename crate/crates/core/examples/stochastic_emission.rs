//! Seeded stochastic detection: equal seeds give equal emission times.

use qpath::propagator::{DetectMode, EvolveConfig};
use qpath::scenario::Scenario;

fn main() {
    let sc = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/schemes/two_photon.scheme")).unwrap();
    for seed in [1, 2, 3, 1] {
        let cfg = EvolveConfig { detect_mode: DetectMode::Stochastic, seed, ..EvolveConfig::default() };
        let traj = sc.evolve(&cfg).unwrap();
        match traj.emissions().next() {
            Some(e) => println!("seed {seed}: emission at t = {:.2}", e.time),
            None => println!("seed {seed}: no emission"),
        };
    }
}
