use super::{CouplingKind, LevelLabel, Scheme};
use crate::diag::{Diagnostic, Rule};

/// Maximum |ΔE − ω| for a gap to count as resonant with its mode.
pub const RESONANCE_TOLERANCE: f64 = 1e-6;

/// Level-only part of the selection rules for a declared coupling.
/// Returns the reason when the declaration can never be allowed.
pub fn selection_rule_for_levels(
    kind: CouplingKind,
    a: &LevelLabel,
    b: &LevelLabel,
) -> Result<(), String> {
    let d_lambda = (a.term.lambda() - b.term.lambda()).abs();
    let d_spin = (a.spin.multiplicity() - b.spin.multiplicity()).abs();
    match kind {
        CouplingKind::Dipole => {
            if d_spin != 0 {
                Err(format!(
                    "dipole {} -> {} changes spin multiplicity; forbidden in first order",
                    a.term_symbol(),
                    b.term_symbol()
                ))
            } else if d_lambda == 0 {
                Err(format!(
                    "direct EM transition forbidden: {} and {} have the same parity",
                    a.term_symbol(),
                    b.term_symbol()
                ))
            } else if d_lambda != 1 {
                Err(format!("dipole requires |dLambda| = 1, got {d_lambda}"))
            } else {
                Ok(())
            }
        }
        CouplingKind::Spinorbit => {
            if d_spin != 2 {
                Err(format!(
                    "spin-orbit mixing needs a singlet/triplet pair, got {} and {}",
                    a.term_symbol(),
                    b.term_symbol()
                ))
            } else if d_lambda != 1 {
                Err(format!("spin-orbit mixing requires |dLambda| = 1, got {d_lambda}"))
            } else {
                Ok(())
            }
        }
        CouplingKind::Gap => Ok(()),
    }
}

/// Checks a parsed scheme. The result is empty exactly for a well-formed,
/// physically consistent scheme. Ground-state ordering is only a warning.
pub fn validate_scheme(s: &Scheme) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if let (Some(z), Some(e)) = (s.ground_energy("Z"), s.ground_energy("E")) {
        if z <= e {
            let span = s
                .levels
                .iter()
                .find(|l| l.family == "E" && l.energy == e)
                .map(|l| l.span)
                .unwrap_or_default();
            out.push(Diagnostic::warning(
                Rule::GroundOrder,
                span,
                format!(
                    "ground-state ordering: E-family ground ({e}) should lie strictly below Z-family ground ({z})"
                ),
            ));
        }
    }

    for m in &s.modes {
        if m.omega <= 0.0 {
            out.push(Diagnostic::error(
                Rule::InvalidValue,
                m.span,
                format!("mode `{}` needs omega > 0", m.id),
            ));
        }
    }

    for c in &s.couplings {
        let (Some(a), Some(b)) = (s.level(&c.a), s.level(&c.b)) else {
            out.push(Diagnostic::error(Rule::UnresolvedReference, c.span, "coupling endpoint not declared"));
            continue;
        };
        if c.a == c.b {
            out.push(Diagnostic::error(Rule::Selection, c.span, "coupling endpoints must be distinct"));
            continue;
        }
        if let Err(msg) = selection_rule_for_levels(c.kind, a, b) {
            out.push(Diagnostic::error(Rule::Selection, c.span, msg));
        }
        match (&c.mode, c.kind) {
            (None, CouplingKind::Dipole | CouplingKind::Gap) => out.push(Diagnostic::error(
                Rule::MissingField,
                c.span,
                format!("{} coupling needs a mode", c.kind.keyword()),
            )),
            (Some(mid), _) => {
                if let Some(mode) = s.mode(mid) {
                    let gap = (a.energy - b.energy).abs();
                    let detuning = gap - mode.omega;
                    if detuning.abs() > RESONANCE_TOLERANCE {
                        out.push(Diagnostic::error(
                            Rule::Resonance,
                            c.span,
                            format!(
                                "gap {} -> {} is {gap} but mode `{mid}` has omega {} (detuning {detuning:e})",
                                c.a, c.b, mode.omega
                            ),
                        ));
                    }
                }
                if s.max_photons == 0 {
                    out.push(Diagnostic::error(
                        Rule::InvalidValue,
                        c.span,
                        "max_photons = 0 leaves no room for the gap quantum",
                    ));
                }
            }
            (None, CouplingKind::Spinorbit) => {}
        }
        if !c.strength.is_finite() || !c.phase.is_finite() || c.transfer.is_some_and(|t| !t.is_finite()) {
            out.push(Diagnostic::error(Rule::InvalidValue, c.span, "coupling values must be finite"));
        }
    }

    let mut last: Option<f64> = None;
    let mut preparations = 0;
    for (i, p) in s.pulses.iter().enumerate() {
        if p.time < 0.0 {
            out.push(Diagnostic::error(Rule::PulseOrder, p.span, "pulse time must be non-negative"));
        }
        if let Some(prev) = last {
            if p.time < prev {
                out.push(Diagnostic::error(
                    Rule::PulseOrder,
                    p.span,
                    format!("pulse `{}` at t={} precedes the previous pulse at t={prev}", p.id, p.time),
                ));
            }
        }
        last = Some(p.time);
        if p.is_preparation() {
            preparations += 1;
            if p.time != 0.0 || i != 0 {
                out.push(Diagnostic::error(
                    Rule::Preparation,
                    p.span,
                    "the preparation pulse (into=...) must be the first pulse, at t=0",
                ));
            }
            if preparations > 1 {
                out.push(Diagnostic::error(Rule::Preparation, p.span, "only one preparation pulse is allowed"));
            }
        }
    }

    for d in &s.detectors {
        if !(d.threshold > 0.0 && d.threshold <= 1.0) {
            out.push(Diagnostic::error(
                Rule::DetectorThreshold,
                d.span,
                format!("detector `{}` threshold {} is outside (0, 1]", d.id, d.threshold),
            ));
        }
        if d.rate.is_some_and(|r| r < 0.0) {
            out.push(Diagnostic::error(
                Rule::InvalidValue,
                d.span,
                format!("detector `{}` rate must be non-negative", d.id),
            ));
        }
    }

    for x in &s.extensions {
        if !x.root.entangled {
            out.push(Diagnostic::error(Rule::Extension, x.span, "extension root must be an entangled ket"));
            continue;
        }
        if x.root.stitches.iter().any(|(m, _)| m == &x.mode) {
            out.push(Diagnostic::error(
                Rule::Extension,
                x.span,
                format!("mode `{}` is already a stitch label of the root", x.mode),
            ));
            continue;
        }
        let (Some(root), Some(upper), Some(mode)) =
            (s.level(&x.root.level), s.level(&x.upper), s.mode(&x.mode))
        else {
            continue;
        };
        let stitched: f64 = x
            .root
            .stitches
            .iter()
            .filter_map(|(m, n)| s.mode(m).map(|m| m.omega * f64::from(*n)))
            .sum();
        let detuning = upper.energy - (root.energy + stitched + mode.omega);
        if detuning.abs() > RESONANCE_TOLERANCE {
            out.push(Diagnostic::error(
                Rule::Resonance,
                x.span,
                format!("extension `{}` is off resonance by {detuning:e}", x.id),
            ));
        }
    }

    out.sort_by_key(|d| (d.line, d.col));
    out
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::parse_scheme;

    const LEGAL: &str = "\
[family Z]
S0 j=0 g=0 term=Sigma spin=1 energy=0.5
P1 j=1 g=0 term=Pi spin=1 energy=1.5
[family E]
S0 j=0 g=0 term=Sigma spin=1 energy=0.0
[modes]
w omega=1.0
[couplings]
dipole Z.S0 Z.P1 mode=w strength=0.1
[pulses]
pump mode=w t=0 into=Z.S0
[detectors]
d target=Z.S0 mode=w threshold=0.5
";

    fn diags(text: &str) -> Vec<Diagnostic> {
        validate_scheme(&parse_scheme(text).unwrap())
    }

    fn rules(text: &str) -> Vec<Rule> {
        diags(text).into_iter().map(|d| d.rule).collect()
    }

    #[test]
    fn legal_two_family_scheme_is_clean() {
        assert!(diags(LEGAL).is_empty());
    }

    #[test]
    fn inverted_ground_order_is_a_warning() {
        let d = diags(&LEGAL.replace("energy=0.0", "energy=0.7"));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].rule, Rule::GroundOrder);
        assert!(!d[0].is_error());
        assert!(d[0].message.contains("ground-state ordering"));
        assert_eq!(d[0].line, 5);
    }

    #[test]
    fn sigma_sigma_dipole_is_forbidden() {
        let text = LEGAL.replace(
            "dipole Z.S0 Z.P1 mode=w strength=0.1",
            "dipole Z.S0 E.S0 mode=w strength=0.1",
        );
        let d = diags(&text);
        let sel = d.iter().find(|d| d.rule == Rule::Selection).expect("selection diagnostic");
        assert!(sel.is_error());
        assert!(sel.message.contains("direct EM transition forbidden"), "{}", sel.message);
        assert_eq!((sel.line, sel.col), (9, 1));
    }

    #[test]
    fn off_resonance_mode_reported() {
        assert_eq!(rules(&LEGAL.replace("omega=1.0", "omega=1.2")), vec![Rule::Resonance]);
    }

    #[test]
    fn dipole_without_mode_reported() {
        let text = LEGAL.replace("mode=w strength", "strength");
        assert!(rules(&text).contains(&Rule::MissingField));
    }

    #[test]
    fn preparation_must_come_first_at_zero() {
        let text = LEGAL.replace("pump mode=w t=0 into=Z.S0", "pump mode=w t=2 into=Z.S0");
        assert_eq!(rules(&text), vec![Rule::Preparation]);
    }

    #[test]
    fn unsorted_pulses_reported() {
        let text = LEGAL.replace("pump mode=w t=0 into=Z.S0", "pump mode=w t=0 into=Z.S0\nb mode=w t=5\nc mode=w t=3");
        assert_eq!(rules(&text), vec![Rule::PulseOrder]);
    }

    #[test]
    fn threshold_out_of_range_reported() {
        assert_eq!(rules(&LEGAL.replace("threshold=0.5", "threshold=0")), vec![Rule::DetectorThreshold]);
        assert_eq!(rules(&LEGAL.replace("threshold=0.5", "threshold=1.5")), vec![Rule::DetectorThreshold]);
    }

    #[test]
    fn spin_orbit_needs_spin_flip() {
        let text = LEGAL.replace("dipole Z.S0 Z.P1 mode=w strength=0.1", "spinorbit Z.S0 Z.P1 strength=0.1");
        assert_eq!(rules(&text), vec![Rule::Selection]);
    }

    #[test]
    fn validation_is_pure() {
        let s = parse_scheme(&LEGAL.replace("omega=1.0", "omega=3.0")).unwrap();
        assert_eq!(validate_scheme(&s), validate_scheme(&s));
    }

    #[test]
    fn every_diagnostic_has_a_location() {
        let text = LEGAL.replace("omega=1.0", "omega=3.0").replace("threshold=0.5", "threshold=2");
        for d in diags(&text) {
            assert!(d.line > 0 && d.col > 0, "{d}");
        }
    }
}
