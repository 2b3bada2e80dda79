//! Enumerates the quantum paths of the two-photon scheme and groups them by
//! route family.

use std::collections::BTreeMap;

use qpath::pathways::{build_graph, enumerate_qpaths, photon_budget, route_families};
use qpath::scenario::Scenario;

fn main() {
    let sc = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/schemes/two_photon.scheme")).unwrap();
    let g = build_graph(&sc.operator);
    let set = enumerate_qpaths(&g, &sc.basis, sc.start(), sc.target().unwrap(), &sc.plan(), 7);
    println!("{} paths up to length {}", set.paths.len(), set.max_len);

    let mut by_family: BTreeMap<String, usize> = BTreeMap::new();
    for p in &set.paths {
        for f in route_families(p, &sc.basis) {
            *by_family.entry(format!("{f:?}")).or_default() += 1;
        }
    }
    println!("{by_family:?}");

    let mut shortest: Vec<_> = set.paths.iter().collect();
    shortest.sort_by_key(|p| p.len());
    for p in shortest.iter().take(4) {
        println!("[{} photons] {}", photon_budget(p), p.describe(&sc.basis));
    }
}
