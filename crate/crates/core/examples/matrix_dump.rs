//! Prints the nonzero couplings of the one-photon operator, then its JSON dump.

use qpath::scenario::Scenario;

fn main() {
    let sc = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/schemes/one_photon.scheme")).unwrap();
    let labels: Vec<String> = sc.basis.iter().map(|k| k.label()).collect();
    println!("dimension {}", sc.operator.dim());
    for e in sc.operator.entries() {
        let v = sc.operator.coupling(e.row, e.col);
        println!("{:<16} {:<16} {:>8.4} {:+.4}i", labels[e.row], labels[e.col], v.re, v.im);
    }
    println!("{}", serde_json::to_string_pretty(&sc.operator.to_dump()).unwrap());
}
