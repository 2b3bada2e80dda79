//! The level-scheme file: matter levels, photon modes, couplings, pulses and detectors.
//!
//! A scheme is the single configuration surface of the crate. Everything the
//! dynamics needs that is not pure bookkeeping (energies, frequencies, coupling
//! strengths, pulse times, detector thresholds) is read from it.
//!
//! ```text
//! unit = model
//! max_photons = 1
//!
//! [family Z]
//! S0 j=0 g=0 term=Sigma spin=1 energy=0.25
//! P1 j=1 g=0 term=Pi spin=1 energy=1.25
//!
//! [modes]
//! w01 omega=1.0 role=pump
//!
//! [couplings]
//! dipole Z.S0 Z.P1 mode=w01 strength=0.05 transfer=0.03
//!
//! [pulses]
//! pump mode=w01 t=0 into=Z.S0
//!
//! [detectors]
//! back target=Z.S0 mode=w01 threshold=0.5
//! ```

mod parse;
mod serialize;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::diag::Span;

pub use parse::parse_scheme;
pub use serialize::serialize_scheme;
pub use validate::{selection_rule_for_levels, validate_scheme, RESONANCE_TOLERANCE};

/// ħ in eV·fs. With `unit = eV` one model time unit is this many femtoseconds.
pub const HBAR_EV_FS: f64 = 0.658_211_956_947;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EnergyUnit {
    #[default]
    Model,
    ElectronVolt,
}

impl EnergyUnit {
    /// Femtoseconds per model time unit, when the unit has a physical scale.
    pub fn femtoseconds_per_time_unit(self) -> Option<f64> {
        match self {
            EnergyUnit::Model => None,
            EnergyUnit::ElectronVolt => Some(HBAR_EV_FS),
        }
    }
}

/// Orbital label; Λ is used only as a parity proxy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Term {
    Sigma,
    Pi,
    Delta,
}

impl Term {
    pub fn lambda(self) -> i32 {
        match self {
            Term::Sigma => 0,
            Term::Pi => 1,
            Term::Delta => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Term::Sigma => "Sigma",
            Term::Pi => "Pi",
            Term::Delta => "Delta",
        }
    }
}

impl FromStr for Term {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Sigma" => Ok(Term::Sigma),
            "Pi" => Ok(Term::Pi),
            "Delta" => Ok(Term::Delta),
            other => Err(format!("term must be Sigma, Pi or Delta, got `{other}`")),
        }
    }
}

/// Spin multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Spin {
    Singlet,
    Triplet,
}

impl Spin {
    pub fn multiplicity(self) -> i32 {
        match self {
            Spin::Singlet => 1,
            Spin::Triplet => 3,
        }
    }

    pub fn from_multiplicity(m: i64) -> Option<Spin> {
        match m {
            1 => Some(Spin::Singlet),
            3 => Some(Spin::Triplet),
            _ => None,
        }
    }
}

/// One electronuclear base state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelLabel {
    pub family: String,
    pub name: String,
    pub j: u32,
    pub g: u32,
    pub term: Term,
    pub spin: Spin,
    pub energy: f64,
    #[serde(skip)]
    pub span: Span,
}

impl LevelLabel {
    /// `family.name`, the reference syntax used throughout scheme files.
    pub fn id(&self) -> String {
        format!("{}.{}", self.family, self.name)
    }

    /// Short spectroscopic tag such as `1Pi` or `3Delta`.
    pub fn term_symbol(&self) -> String {
        format!("{}{}", self.spin.multiplicity(), self.term.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonMode {
    pub id: String,
    pub omega: f64,
    pub role: String,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    /// Electric-dipole mixing; always carries a mode.
    Dipole,
    /// Singlet/triplet mixing; a mode makes it photon-assisted.
    Spinorbit,
    /// Declares an entanglement unit over a gap without any dipole mixing.
    Gap,
}

impl CouplingKind {
    pub fn keyword(self) -> &'static str {
        match self {
            CouplingKind::Dipole => "dipole",
            CouplingKind::Spinorbit => "spinorbit",
            CouplingKind::Gap => "gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingDecl {
    pub kind: CouplingKind,
    /// Lower endpoint as written, `family.name`.
    pub a: String,
    pub b: String,
    pub mode: Option<String>,
    pub strength: f64,
    /// Sector-transfer strength of the entanglement unit this coupling opens.
    pub transfer: Option<f64>,
    pub phase: f64,
    #[serde(skip)]
    pub span: Span,
}

impl CouplingDecl {
    /// Whether the coupling opens an entanglement unit over its gap.
    pub fn opens_unit(&self) -> bool {
        self.mode.is_some()
    }

    pub fn transfer_strength(&self) -> f64 {
        self.transfer.unwrap_or(self.strength)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseDecl {
    pub id: String,
    pub mode: String,
    pub time: f64,
    /// Present on the laboratory preparation pulse: the matter level that
    /// receives the incoming quantum at t = 0.
    pub into: Option<String>,
    #[serde(skip)]
    pub span: Span,
}

impl PulseDecl {
    pub fn is_preparation(&self) -> bool {
        self.into.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorDecl {
    pub id: String,
    pub target: String,
    pub mode: String,
    pub threshold: f64,
    pub rate: Option<f64>,
    #[serde(skip)]
    pub span: Span,
}

/// A full-entangled ket built on `root` with one more stitch label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionDecl {
    pub id: String,
    pub root: KetRef,
    pub mode: String,
    pub upper: String,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scheme {
    pub unit: EnergyUnit,
    pub max_photons: u32,
    /// Family ids in declaration order.
    pub families: Vec<String>,
    pub levels: Vec<LevelLabel>,
    pub modes: Vec<PhotonMode>,
    pub couplings: Vec<CouplingDecl>,
    pub pulses: Vec<PulseDecl>,
    pub detectors: Vec<DetectorDecl>,
    pub extensions: Vec<ExtensionDecl>,
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme {
            unit: EnergyUnit::Model,
            max_photons: 1,
            families: Vec::new(),
            levels: Vec::new(),
            modes: Vec::new(),
            couplings: Vec::new(),
            pulses: Vec::new(),
            detectors: Vec::new(),
            extensions: Vec::new(),
        }
    }
}

impl Scheme {
    pub fn level(&self, id: &str) -> Option<&LevelLabel> {
        self.levels.iter().find(|l| l.id() == id)
    }

    pub fn mode(&self, id: &str) -> Option<&PhotonMode> {
        self.modes.iter().find(|m| m.id == id)
    }

    /// Lowest level energy of a family.
    pub fn ground_energy(&self, family: &str) -> Option<f64> {
        self.levels
            .iter()
            .filter(|l| l.family == family)
            .map(|l| l.energy)
            .min_by(f64::total_cmp)
    }

    pub fn preparation(&self) -> Option<&PulseDecl> {
        self.pulses.iter().find(|p| p.is_preparation())
    }

    /// Pulses that inject a quantum into an already running evolution.
    pub fn injections(&self) -> impl Iterator<Item = &PulseDecl> {
        self.pulses.iter().filter(|p| !p.is_preparation())
    }
}

/// Textual reference to a basis ket.
///
/// `Z.S0|w01=1` is a direct product with one free quantum, `Z.P1;w01=0` an
/// entangled ket stitched on `w01`, and `Z.P1;w01=0|push=1` the same with a
/// pending free quantum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct KetRef {
    pub level: String,
    pub entangled: bool,
    pub stitches: Vec<(String, u32)>,
    pub photons: Vec<(String, u32)>,
}

impl KetRef {
    pub fn bare(level: impl Into<String>) -> Self {
        KetRef {
            level: level.into(),
            entangled: false,
            stitches: Vec::new(),
            photons: Vec::new(),
        }
    }
}

fn parse_occupations(s: &str) -> Result<Vec<(String, u32)>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|item| {
            let (mode, n) = item
                .split_once('=')
                .ok_or_else(|| format!("expected mode=count, got `{item}`"))?;
            if mode.is_empty() {
                return Err(format!("empty mode id in `{item}`"));
            }
            let n = n
                .parse::<u32>()
                .map_err(|_| format!("occupation `{n}` is not a non-negative integer"))?;
            Ok((mode.to_string(), n))
        })
        .collect()
}

impl FromStr for KetRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (head, photons) = match s.split_once('|') {
            Some((h, p)) => (h, parse_occupations(p)?),
            None => (s, Vec::new()),
        };
        let (level, entangled, stitches) = match head.split_once(';') {
            Some((l, st)) => {
                let st = parse_occupations(st)?;
                if st.is_empty() {
                    return Err("entangled ket needs at least one stitch label".into());
                }
                (l, true, st)
            }
            None => (head, false, Vec::new()),
        };
        match level.split_once('.') {
            Some((f, n)) if !f.is_empty() && !n.is_empty() => {}
            _ => return Err(format!("level reference `{level}` is not family.name")),
        }
        Ok(KetRef {
            level: level.to_string(),
            entangled,
            stitches,
            photons,
        })
    }
}

impl fmt::Display for KetRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.level)?;
        let join = |v: &[(String, u32)]| {
            v.iter()
                .map(|(m, n)| format!("{m}={n}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        if self.entangled {
            write!(f, ";{}", join(&self.stitches))?;
        }
        let free: Vec<_> = self.photons.iter().filter(|(_, n)| *n > 0).cloned().collect();
        if !free.is_empty() {
            write!(f, "|{}", join(&free))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ket_ref_forms() {
        let k: KetRef = "Z.P1;w01=0|push=1".parse().unwrap();
        assert!(k.entangled);
        assert_eq!(k.level, "Z.P1");
        assert_eq!(k.stitches, vec![("w01".into(), 0)]);
        assert_eq!(k.photons, vec![("push".into(), 1)]);
        assert_eq!(k.to_string(), "Z.P1;w01=0|push=1");

        let k: KetRef = "E.S0|v01=1".parse().unwrap();
        assert!(!k.entangled);
        assert_eq!(k.to_string(), "E.S0|v01=1");

        assert!("S0".parse::<KetRef>().is_err());
        assert!("Z.S0;".parse::<KetRef>().is_err());
        assert!("Z.S0|w=x".parse::<KetRef>().is_err());
    }

    #[test]
    fn ground_energy_picks_family_minimum() {
        let mut s = Scheme::default();
        for (fam, name, e) in [("Z", "A", 1.0), ("Z", "B", 0.5), ("E", "C", 0.1)] {
            s.levels.push(LevelLabel {
                family: fam.into(),
                name: name.into(),
                j: 0,
                g: 0,
                term: Term::Sigma,
                spin: Spin::Singlet,
                energy: e,
                span: Span::default(),
            });
        }
        assert_eq!(s.ground_energy("Z"), Some(0.5));
        assert_eq!(s.ground_energy("E"), Some(0.1));
        assert_eq!(s.ground_energy("X"), None);
    }
}
