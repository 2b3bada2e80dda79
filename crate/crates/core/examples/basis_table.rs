//! Lists the one-photon basis and the two-photon scenario basis.

use qpath::basis::{enumerate_basis, scenario_basis, DEFAULT_DETUNING_TOLERANCE};
use qpath::scheme::parse_scheme;

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/schemes/");
    let one = parse_scheme(&std::fs::read_to_string(format!("{dir}one_photon.scheme")).unwrap()).unwrap();
    let b = enumerate_basis(&one, DEFAULT_DETUNING_TOLERANCE).unwrap();
    println!("one-photon basis: {} kets", b.len());
    for (i, k) in b.iter().enumerate() {
        println!("{:>3}  {:<24} {:<8} {:>9.4}", i + 1, k.label(), k.matter.term_symbol(), k.total_energy());
    }

    let two = parse_scheme(&std::fs::read_to_string(format!("{dir}two_photon.scheme")).unwrap()).unwrap();
    let b = scenario_basis(&two, DEFAULT_DETUNING_TOLERANCE).unwrap();
    println!("\ntwo-photon scenario basis: {} kets", b.len());
    for k in b.iter().filter(|k| k.total_quanta() > 1) {
        println!("     {}", k.label());
    }
}
