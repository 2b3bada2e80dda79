//! The single-pulse scheme: the E-family emitter is never reached.

use qpath::pathways::{build_graph, reachable_set};
use qpath::propagator::EvolveConfig;
use qpath::scenario::Scenario;

fn main() {
    let sc = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/schemes/one_photon.scheme")).unwrap();
    let target = sc.target().unwrap();
    let v = sc.verdict(sc.start(), target, &sc.plan());
    println!("{} -> {}: reachable = {}", v.from, v.to, v.reachable);

    let g = build_graph(&sc.operator);
    let set = reachable_set(&g, &sc.basis, sc.start(), &sc.plan());
    let labels: Vec<String> = (0..sc.basis.len()).filter(|&k| set[k]).map(|k| sc.basis.kets()[k].label()).collect();
    println!("reachable kets: {}", labels.join(", "));

    let traj = sc.evolve(&EvolveConfig::default()).unwrap();
    println!("max P({}) over t <= 200: {:.3e}", sc.basis.kets()[target].label(), traj.max_population(target));
    println!("emissions: {}", traj.emissions().count());
}
