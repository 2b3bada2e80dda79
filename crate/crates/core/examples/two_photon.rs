//! The pump + kick scheme: the second quantum opens the triplet route into
//! the E family and the emitter fires.

use qpath::propagator::EvolveConfig;
use qpath::scenario::Scenario;

fn main() {
    let sc = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/schemes/two_photon.scheme")).unwrap();
    let v = sc.verdict(sc.start(), sc.target().unwrap(), &sc.plan());
    println!("reachable = {}, photon budget = {:?}", v.reachable, v.photon_budget);
    if let Some(w) = &v.witness {
        println!("witness: {}", w.join(" -> "));
    }
    println!("routes: {:?}", v.routes);

    let traj = sc.evolve(&EvolveConfig::default()).unwrap();
    for s in &traj.segments {
        println!("segment [{:.2}, {:.2}] injected {:?}", s.start, s.end, s.injected);
    }
    for e in traj.emissions() {
        println!("emission at t = {:.2} from {} (photon {})", e.time, e.ket_label, e.photon);
    }
}
