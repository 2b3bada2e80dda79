//! Parses a scheme and prints its diagnostics, first clean and then with a
//! forbidden Σ-Σ dipole.

use qpath::scheme::{parse_scheme, validate_scheme};

const SCHEME: &str = "\
[family Z]
S0 j=0 g=0 term=Sigma spin=1 energy=1.0
P1 j=1 g=0 term=Pi spin=1 energy=2.0
[family E]
S0 j=0 g=0 term=Sigma spin=1 energy=0.0
[modes]
w omega=1.0
[couplings]
dipole Z.S0 Z.P1 mode=w strength=0.1
";

fn main() {
    for text in [SCHEME.to_string(), SCHEME.replace("Z.S0 Z.P1", "Z.S0 E.S0")] {
        let scheme = parse_scheme(&text).expect("parses");
        let diags = validate_scheme(&scheme);
        if diags.is_empty() {
            println!("clean: {} levels", scheme.levels.len());
        }
        for d in diags {
            println!("{d}");
        }
    }
}
