//! A degenerate singlet/triplet pair mixed by spin-orbit coupling exchanges
//! population as sin^2(vt).

use num_complex::Complex64;
use qpath::propagator::{prepare, Propagator};
use qpath::scenario::Scenario;

fn main() {
    let sc = Scenario::from_text(
        "[family Z]\nP j=1 g=0 term=Pi spin=1 energy=1.0\nD j=2 g=0 term=Delta spin=3 energy=1.0\n\
         [couplings]\nspinorbit Z.P Z.D strength=0.1\n",
    )
    .unwrap();
    let (from, to) = (sc.basis.resolve("Z.P").unwrap(), sc.basis.resolve("Z.D").unwrap());
    let c0 = prepare(&sc.basis, &[("Z.P", Complex64::new(1.0, 0.0))]).unwrap();
    let p = Propagator::new(&sc.operator).unwrap();
    let v = sc.operator.coupling(from, to).norm();
    println!("   t     P(Z.P)     P(Z.D)     sin^2(vt)");
    for i in 0..=8 {
        let t = i as f64 * std::f64::consts::PI / (8.0 * v);
        let c = p.propagate(&c0, t).unwrap();
        println!("{t:6.2}  {:.6}   {:.6}   {:.6}", c.population(from), c.population(to), (v * t).sin().powi(2));
    }
}
