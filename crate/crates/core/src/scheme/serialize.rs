use std::fmt::Write;

use super::{EnergyUnit, Scheme};

fn quote(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| !c.is_whitespace() && c != '#' && c != '"') {
        s.to_string()
    } else {
        format!("\"{s}\"")
    }
}

/// Writes a scheme back to the line format. Floats use the shortest
/// representation that parses back to the same value, so the output is a
/// round-trip fixed point.
pub fn serialize_scheme(s: &Scheme) -> String {
    let mut out = String::new();
    let unit = match s.unit {
        EnergyUnit::Model => "model",
        EnergyUnit::ElectronVolt => "eV",
    };
    let _ = writeln!(out, "unit = {unit}");
    let _ = writeln!(out, "max_photons = {}", s.max_photons);

    for fam in &s.families {
        let _ = writeln!(out, "\n[family {fam}]");
        for l in s.levels.iter().filter(|l| &l.family == fam) {
            let _ = writeln!(
                out,
                "{} j={} g={} term={} spin={} energy={:?}",
                l.name,
                l.j,
                l.g,
                l.term.name(),
                l.spin.multiplicity(),
                l.energy
            );
        }
    }

    let _ = writeln!(out, "\n[modes]");
    for m in &s.modes {
        let _ = write!(out, "{} omega={:?}", m.id, m.omega);
        if !m.role.is_empty() {
            let _ = write!(out, " role={}", quote(&m.role));
        }
        out.push('\n');
    }

    let _ = writeln!(out, "\n[couplings]");
    for c in &s.couplings {
        let _ = write!(out, "{} {} {}", c.kind.keyword(), c.a, c.b);
        if let Some(m) = &c.mode {
            let _ = write!(out, " mode={m}");
        }
        let _ = write!(out, " strength={:?}", c.strength);
        if let Some(t) = c.transfer {
            let _ = write!(out, " transfer={t:?}");
        }
        if c.phase != 0.0 {
            let _ = write!(out, " phase={:?}", c.phase);
        }
        out.push('\n');
    }

    let _ = writeln!(out, "\n[pulses]");
    for p in &s.pulses {
        let _ = write!(out, "{} mode={} t={:?}", p.id, p.mode, p.time);
        if let Some(into) = &p.into {
            let _ = write!(out, " into={into}");
        }
        out.push('\n');
    }

    let _ = writeln!(out, "\n[detectors]");
    for d in &s.detectors {
        let _ = write!(
            out,
            "{} target={} mode={} threshold={:?}",
            d.id, d.target, d.mode, d.threshold
        );
        if let Some(r) = d.rate {
            let _ = write!(out, " rate={r:?}");
        }
        out.push('\n');
    }

    if !s.extensions.is_empty() {
        let _ = writeln!(out, "\n[extensions]");
        for x in &s.extensions {
            let _ = writeln!(out, "{} root={} mode={} upper={}", x.id, x.root, x.mode, x.upper);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse_scheme;
    use super::*;

    #[test]
    fn empty_scheme_has_empty_sections() {
        let doc = serialize_scheme(&Scheme::default());
        for header in ["[modes]", "[couplings]", "[pulses]", "[detectors]"] {
            assert!(doc.contains(header), "{doc}");
        }
        assert_eq!(parse_scheme(&doc).unwrap(), Scheme::default());
    }

    #[test]
    fn one_detector_one_line() {
        let doc = "\
[family Z]
S0 j=0 g=0 term=Sigma spin=1 energy=0
[modes]
w omega=1
[detectors]
d1 target=Z.S0 mode=w threshold=0.5 rate=2
";
        let s = parse_scheme(doc).unwrap();
        let out = serialize_scheme(&s);
        let lines: Vec<_> = out.lines().filter(|l| l.contains("target=")).collect();
        assert_eq!(lines.len(), 1);
        assert_eq!(parse_scheme(&out).unwrap(), s);
    }

    #[test]
    fn awkward_floats_survive() {
        let doc = "[modes]\nw omega=0.1\nv omega=1e-300\nu omega=123456789.123456789 role=\"two words\"\n";
        let s = parse_scheme(doc).unwrap();
        let back = parse_scheme(&serialize_scheme(&s)).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.modes[2].role, "two words");
    }
}
