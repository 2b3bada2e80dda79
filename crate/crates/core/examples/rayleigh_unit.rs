//! A prepared photon cycling through an entanglement unit: absorption into
//! the excited level and re-emission into the stitched ket.

use qpath::propagator::EvolveConfig;
use qpath::scenario::Scenario;

fn main() {
    let sc = Scenario::from_text(
        "[family Z]\nG j=0 g=0 term=Sigma spin=1 energy=0.0\nX j=1 g=0 term=Pi spin=1 energy=1.0\n\
         [modes]\nw omega=1.0\n[couplings]\ndipole Z.G Z.X mode=w strength=0.2\n\
         [pulses]\npump mode=w t=0 into=Z.G\n",
    )
    .unwrap();
    for (i, k) in sc.basis.iter().enumerate() {
        println!("{i}: {}", k.label());
    }
    let cfg = EvolveConfig { t_end: 16.0, dt: 0.05, sample_every: 40, ..EvolveConfig::default() };
    let traj = sc.evolve(&cfg).unwrap();
    for (t, p) in traj.times.iter().zip(&traj.populations) {
        let row: Vec<String> = p.iter().map(|x| format!("{x:.4}")).collect();
        println!("t={t:6.2}  {}", row.join("  "));
    }
}
