//! Seeded random level schemes shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use qpath::basis::{scenario_basis, BasisSet, DEFAULT_DETUNING_TOLERANCE};
use qpath::operator::{assemble, DEFAULT_GATE};
use qpath::pathways::build_graph;
use qpath::diag::{has_errors, Span};
use qpath::scheme::{
    selection_rule_for_levels, CouplingDecl, CouplingKind, DetectorDecl, ExtensionDecl, KetRef, LevelLabel,
    PhotonMode, PulseDecl, Scheme, Spin, Term,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemes").join(name)
}

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    /// Reject schemes whose scenario basis is larger than this.
    pub max_kets: usize,
    pub pulses: bool,
    pub detectors: bool,
    pub extensions: bool,
}

impl GenConfig {
    /// Small coupled systems for dynamics and path checks.
    pub fn small() -> Self {
        GenConfig { max_kets: 12, pulses: false, detectors: false, extensions: false }
    }

    /// Small systems with a preparation and injection pulses.
    pub fn with_pulses() -> Self {
        GenConfig { max_kets: 12, pulses: true, detectors: false, extensions: false }
    }

    /// Everything the file format can express.
    pub fn full() -> Self {
        GenConfig { max_kets: usize::MAX, pulses: true, detectors: true, extensions: true }
    }
}

fn strength(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.05..0.25)
}

fn candidate(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Scheme {
    let mut s = Scheme::default();
    let families: &[&str] = if rng.gen_bool(0.5) { &["Z", "E"] } else { &["Z"] };
    for fam in families {
        s.families.push(fam.to_string());
        let n = rng.gen_range(1..=3);
        for j in 0..n {
            s.levels.push(LevelLabel {
                family: fam.to_string(),
                name: format!("L{j}"),
                j,
                g: rng.gen_range(0..3),
                term: *[Term::Sigma, Term::Pi, Term::Delta].choose(rng).unwrap(),
                spin: if rng.gen_bool(0.7) { Spin::Singlet } else { Spin::Triplet },
                energy: f64::from(rng.gen_range(0..=8u32)) * 0.25,
                span: Span::default(),
            });
        }
    }

    let units = rng.gen_range(0..=3);
    for u in 0..units {
        let mut pair: Vec<&LevelLabel> = s.levels.iter().collect();
        pair.shuffle(rng);
        let (Some(a), Some(b)) = (pair.first(), pair.get(1)) else { break };
        if a.energy == b.energy {
            continue;
        }
        let (g, e) = if a.energy < b.energy { (*a, *b) } else { (*b, *a) };
        let kind = if selection_rule_for_levels(CouplingKind::Dipole, g, e).is_ok() {
            CouplingKind::Dipole
        } else if selection_rule_for_levels(CouplingKind::Spinorbit, g, e).is_ok() {
            CouplingKind::Spinorbit
        } else {
            CouplingKind::Gap
        };
        let mode = format!("m{u}");
        let decl = CouplingDecl {
            kind,
            a: g.id(),
            b: e.id(),
            mode: Some(mode.clone()),
            strength: if kind == CouplingKind::Gap { 0.0 } else { strength(rng) },
            transfer: Some(strength(rng)),
            phase: if rng.gen_bool(0.3) { rng.gen_range(0.0..3.0) } else { 0.0 },
            span: Span::default(),
        };
        s.modes.push(PhotonMode { id: mode, omega: e.energy - g.energy, role: String::new(), span: Span::default() });
        s.couplings.push(decl);
    }

    for _ in 0..rng.gen_range(0..=2) {
        let mut pair: Vec<&LevelLabel> = s.levels.iter().collect();
        pair.shuffle(rng);
        let (Some(a), Some(b)) = (pair.first(), pair.get(1)) else { break };
        if selection_rule_for_levels(CouplingKind::Spinorbit, a, b).is_ok() {
            s.couplings.push(CouplingDecl {
                kind: CouplingKind::Spinorbit,
                a: a.id(),
                b: b.id(),
                mode: None,
                strength: strength(rng),
                transfer: None,
                phase: 0.0,
                span: Span::default(),
            });
        }
    }

    let units: Vec<(String, String)> = s
        .couplings
        .iter()
        .filter_map(|c| c.mode.clone().map(|m| (c.a.clone(), m)))
        .collect();

    if cfg.pulses && !units.is_empty() {
        let (ground, mode) = units.choose(rng).unwrap().clone();
        s.pulses.push(PulseDecl { id: "prep".into(), mode, time: 0.0, into: Some(ground), span: Span::default() });
        let mut t = 0.0;
        for i in 0..rng.gen_range(0..=2) {
            t += f64::from(rng.gen_range(4..40u32)) * 0.5;
            let mode = units.choose(rng).unwrap().1.clone();
            s.pulses.push(PulseDecl { id: format!("p{i}"), mode, time: t, into: None, span: Span::default() });
        }
        s.max_photons = s.pulses.len() as u32;
    }

    if cfg.detectors && !units.is_empty() {
        for i in 0..rng.gen_range(0..=2) {
            let (target, mode) = units.choose(rng).unwrap().clone();
            s.detectors.push(DetectorDecl {
                id: format!("d{i}"),
                target,
                mode,
                threshold: rng.gen_range(0.01..1.0),
                rate: if rng.gen_bool(0.5) { Some(rng.gen_range(0.0..2.0)) } else { None },
                span: Span::default(),
            });
        }
    }

    if cfg.extensions && rng.gen_bool(0.5) {
        'search: for c in &s.couplings {
            let Some(m1) = &c.mode else { continue };
            let excited = s.level(&c.b).unwrap().clone();
            for m2 in &s.modes {
                if &m2.id == m1 {
                    continue;
                }
                if let Some(upper) = s.levels.iter().find(|l| l.energy == excited.energy + m2.omega) {
                    let mut root = KetRef::bare(excited.id());
                    root.entangled = true;
                    root.stitches.push((m1.clone(), 0));
                    s.extensions.push(ExtensionDecl {
                        id: "x".into(),
                        root,
                        mode: m2.id.clone(),
                        upper: upper.id(),
                        span: Span::default(),
                    });
                    break 'search;
                }
            }
        }
    }
    s
}

/// Whether every ket that can be populated before a pulse has a partner
/// for that pulse, starting from the prepared ket.
pub fn injections_have_partners(s: &Scheme, b: &BasisSet) -> bool {
    let Some(prep) = s.preparation() else { return true };
    let Ok((op, _)) = assemble(b, s, DEFAULT_GATE) else { return false };
    let g = build_graph(&op);
    let mut r = KetRef::bare(prep.into.clone().unwrap());
    r.photons.push((prep.mode.clone(), 1));
    let Some(start) = b.find(&r) else { return false };
    let mut frontier = vec![start];
    for pulse in s.injections() {
        let mode = s.mode(&pulse.mode).unwrap();
        let mut seen = vec![false; b.len()];
        let mut stack = frontier.clone();
        for &k in &frontier {
            seen[k] = true;
        }
        while let Some(k) = stack.pop() {
            for &(n, _) in g.neighbors(k) {
                if !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
        frontier = Vec::new();
        for k in (0..b.len()).filter(|&k| seen[k]) {
            match b.partner(k, mode) {
                Some(p) => frontier.push(p),
                None => return false,
            }
        }
    }
    true
}

/// A valid scheme drawn from `seed`. Candidates that fail validation, fail
/// basis construction or exceed `cfg.max_kets` are redrawn.
pub fn random_scheme(seed: u64, cfg: &GenConfig) -> Scheme {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let s = candidate(&mut rng, cfg);
        if has_errors(&qpath::scheme::validate_scheme(&s)) {
            continue;
        }
        match scenario_basis(&s, DEFAULT_DETUNING_TOLERANCE) {
            Ok(b) if b.len() <= cfg.max_kets && !b.is_empty() && injections_have_partners(&s, &b) => return s,
            _ => continue,
        }
    }
}
