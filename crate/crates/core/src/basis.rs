//! The ordered Hilbert/Fock basis.
//!
//! Kets come in two sectors. Direct products `|level> x |n_w>` form the
//! non-entangled sector and always precede the entangled gap-related kets
//! `|level; n_w>`, whose photon labels are stitch labels rather than free
//! quanta. Entangled kets are represented purely by their labels.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scheme::{KetRef, LevelLabel, PhotonMode, Scheme};

/// Default resonance tolerance for building entanglement units.
pub const DEFAULT_DETUNING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum BasisError {
    #[error("gap {ground} -> {excited} is off resonance with mode `{mode}` by {detuning:e}")]
    OffResonance {
        ground: String,
        excited: String,
        mode: String,
        detuning: f64,
    },
    #[error("ket `{0}` is not in the basis")]
    UnknownKet(String),
    #[error("ket `{0}` is not entangled")]
    NotEntangled(String),
    #[error("mode `{mode}` is already a stitch label of `{ket}`")]
    DuplicateStitch { ket: String, mode: String },
    #[error("unknown {what} `{id}`")]
    Unresolved { what: &'static str, id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sector {
    NonEntangled,
    Entangled,
}

/// Photon count in one mode, carrying the mode's quantum so energies are
/// computable from the ket alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quanta {
    pub mode: String,
    pub omega: f64,
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisKet {
    pub matter: LevelLabel,
    /// Free quanta, sorted by mode id, zero counts omitted.
    pub photons: Vec<Quanta>,
    pub sector: Sector,
    /// Stitch labels in the order they were attached. Empty for direct products.
    pub stitches: Vec<Quanta>,
}

impl BasisKet {
    pub fn direct(matter: &LevelLabel, photons: impl IntoIterator<Item = (PhotonMode, u32)>) -> Self {
        let mut q: Vec<Quanta> = photons
            .into_iter()
            .filter(|(_, n)| *n > 0)
            .map(|(m, n)| Quanta { mode: m.id, omega: m.omega, n })
            .collect();
        q.sort_by(|a, b| a.mode.cmp(&b.mode));
        BasisKet {
            matter: matter.clone(),
            photons: q,
            sector: Sector::NonEntangled,
            stitches: Vec::new(),
        }
    }

    pub fn entangled(matter: &LevelLabel, stitches: impl IntoIterator<Item = (PhotonMode, u32)>) -> Self {
        BasisKet {
            matter: matter.clone(),
            photons: Vec::new(),
            sector: Sector::Entangled,
            stitches: stitches
                .into_iter()
                .map(|(m, n)| Quanta { mode: m.id, omega: m.omega, n })
                .collect(),
        }
    }

    /// Free occupation of a mode.
    pub fn free(&self, mode: &str) -> u32 {
        self.photons.iter().find(|q| q.mode == mode).map_or(0, |q| q.n)
    }

    /// Free plus stitched occupation per mode, zero counts omitted.
    pub fn occupation(&self) -> BTreeMap<&str, u32> {
        let mut occ = BTreeMap::new();
        for q in self.photons.iter().chain(&self.stitches) {
            if q.n > 0 {
                *occ.entry(q.mode.as_str()).or_insert(0) += q.n;
            }
        }
        occ
    }

    pub fn total_quanta(&self) -> u32 {
        self.photons.iter().chain(&self.stitches).map(|q| q.n).sum()
    }

    /// Matter energy plus every free and stitched quantum.
    pub fn total_energy(&self) -> f64 {
        self.matter.energy
            + self
                .photons
                .iter()
                .chain(&self.stitches)
                .map(|q| f64::from(q.n) * q.omega)
                .sum::<f64>()
    }

    pub fn is_entangled(&self) -> bool {
        self.sector == Sector::Entangled
    }

    /// The same ket with one more free quantum in `mode`.
    pub fn with_extra_quantum(&self, mode: &PhotonMode) -> BasisKet {
        let mut k = self.clone();
        match k.photons.iter_mut().find(|q| q.mode == mode.id) {
            Some(q) => q.n += 1,
            None => {
                k.photons.push(Quanta { mode: mode.id.clone(), omega: mode.omega, n: 1 });
                k.photons.sort_by(|a, b| a.mode.cmp(&b.mode));
            }
        }
        k
    }

    pub fn to_ref(&self) -> KetRef {
        KetRef {
            level: self.matter.id(),
            entangled: self.is_entangled(),
            stitches: self.stitches.iter().map(|q| (q.mode.clone(), q.n)).collect(),
            photons: self.photons.iter().map(|q| (q.mode.clone(), q.n)).collect(),
        }
    }

    /// Canonical label; two kets are the same basis element iff their labels match.
    pub fn label(&self) -> String {
        self.to_ref().to_string()
    }

    pub fn matches(&self, r: &KetRef) -> bool {
        let mut want: Vec<_> = r.photons.iter().filter(|(_, n)| *n > 0).cloned().collect();
        want.sort();
        let have: Vec<_> = self.photons.iter().map(|q| (q.mode.clone(), q.n)).collect();
        self.matter.id() == r.level
            && self.is_entangled() == r.entangled
            && have == want
            && self.stitches.len() == r.stitches.len()
            && self.stitches.iter().zip(&r.stitches).all(|(q, (m, n))| &q.mode == m && q.n == *n)
    }
}

impl fmt::Display for BasisKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Free function form of [`BasisKet::total_energy`].
pub fn total_energy(ket: &BasisKet) -> f64 {
    ket.total_energy()
}

/// Ordered, duplicate-free basis. Direct products first, entangled kets after.
#[derive(Debug, Clone, Default)]
pub struct BasisSet {
    kets: Vec<BasisKet>,
    index: HashMap<String, usize>,
    n_direct: usize,
}

impl PartialEq for BasisSet {
    fn eq(&self, other: &Self) -> bool {
        self.kets == other.kets
    }
}

impl BasisSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from kets, keeping first occurrences and moving every
    /// direct product ahead of every entangled ket (stable within sectors).
    pub fn from_kets(kets: impl IntoIterator<Item = BasisKet>) -> Self {
        let mut direct = Vec::new();
        let mut entangled = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for k in kets {
            if seen.insert(k.label()) {
                match k.sector {
                    Sector::NonEntangled => direct.push(k),
                    Sector::Entangled => entangled.push(k),
                }
            }
        }
        let n_direct = direct.len();
        direct.extend(entangled);
        let index = direct.iter().enumerate().map(|(i, k)| (k.label(), i)).collect();
        BasisSet { kets: direct, index, n_direct }
    }

    pub fn len(&self) -> usize {
        self.kets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kets.is_empty()
    }

    pub fn kets(&self) -> &[BasisKet] {
        &self.kets
    }

    pub fn iter(&self) -> impl Iterator<Item = &BasisKet> {
        self.kets.iter()
    }

    pub fn get(&self, i: usize) -> Option<&BasisKet> {
        self.kets.get(i)
    }

    pub fn non_entangled_len(&self) -> usize {
        self.n_direct
    }

    pub fn index_of(&self, ket: &BasisKet) -> Option<usize> {
        self.index.get(&ket.label()).copied()
    }

    pub fn contains(&self, ket: &BasisKet) -> bool {
        self.index_of(ket).is_some()
    }

    /// Looks up a ket by its textual reference.
    pub fn find(&self, r: &KetRef) -> Option<usize> {
        self.kets.iter().position(|k| k.matches(r))
    }

    /// Looks up by label text or by 1-based position.
    pub fn resolve(&self, text: &str) -> Result<usize, BasisError> {
        if let Ok(pos) = text.parse::<usize>() {
            return if pos >= 1 && pos <= self.len() {
                Ok(pos - 1)
            } else {
                Err(BasisError::UnknownKet(text.to_string()))
            };
        }
        let r: KetRef = text.parse().map_err(|_| BasisError::UnknownKet(text.to_string()))?;
        self.find(&r).ok_or_else(|| BasisError::UnknownKet(text.to_string()))
    }

    /// Index of `k` with one more free quantum in `mode`, if present.
    pub fn partner(&self, k: usize, mode: &PhotonMode) -> Option<usize> {
        self.index_of(&self.kets[k].with_extra_quantum(mode))
    }

    pub fn energies(&self) -> Vec<f64> {
        self.kets.iter().map(BasisKet::total_energy).collect()
    }

    /// Extends the basis with the full-entangled ket over `root`: the root's
    /// stitch labels plus `second`, carried by `upper`, the level resonant
    /// with the root's stitched energy plus one quantum of `second`.
    /// The new ket goes to the tail; existing indices do not move.
    pub fn extend_two_photon(
        &self,
        root: &BasisKet,
        second: &PhotonMode,
        upper: &LevelLabel,
        tolerance: f64,
    ) -> Result<BasisSet, BasisError> {
        if !self.contains(root) {
            return Err(BasisError::UnknownKet(root.label()));
        }
        if !root.is_entangled() {
            return Err(BasisError::NotEntangled(root.label()));
        }
        if root.stitches.iter().any(|q| q.mode == second.id) {
            return Err(BasisError::DuplicateStitch { ket: root.label(), mode: second.id.clone() });
        }
        let stitched: f64 = root.stitches.iter().map(|q| f64::from(q.n) * q.omega).sum();
        let detuning = upper.energy - (root.matter.energy + stitched + second.omega);
        if detuning.abs() > tolerance {
            return Err(BasisError::OffResonance {
                ground: root.label(),
                excited: upper.id(),
                mode: second.id.clone(),
                detuning,
            });
        }
        let mut stitches = root.stitches.clone();
        stitches.push(Quanta { mode: second.id.clone(), omega: second.omega, n: 0 });
        let ket = BasisKet {
            matter: upper.clone(),
            photons: root.photons.clone(),
            sector: Sector::Entangled,
            stitches,
        };
        let mut out = self.clone();
        if !out.contains(&ket) {
            out.index.insert(ket.label(), out.kets.len());
            out.kets.push(ket);
        }
        Ok(out)
    }

    /// Adds, for each mode in turn, the photon-added partner of every ket that
    /// still has room under `max_photons`. Partners join the tail of their sector.
    pub fn close_under(&self, modes: &[PhotonMode], max_photons: u32) -> BasisSet {
        let mut kets = self.kets.clone();
        for mode in modes {
            let mut added = Vec::new();
            for k in &kets {
                if k.free(&mode.id) < max_photons {
                    added.push(k.with_extra_quantum(mode));
                }
            }
            kets.extend(added);
            kets = BasisSet::from_kets(kets).kets;
        }
        BasisSet::from_kets(kets)
    }
}

/// The four gap-related kets over one resonant gap, in the order
/// `|excited> x |0>`, `|ground> x |1>`, `|ground; 1>`, `|excited; 0>`.
pub fn build_entanglement_unit(
    ground: &LevelLabel,
    excited: &LevelLabel,
    mode: &PhotonMode,
    tolerance: f64,
) -> Result<BasisSet, BasisError> {
    let detuning = (excited.energy - ground.energy) - mode.omega;
    if detuning.abs() > tolerance {
        return Err(BasisError::OffResonance {
            ground: ground.id(),
            excited: excited.id(),
            mode: mode.id.clone(),
            detuning,
        });
    }
    Ok(BasisSet::from_kets(unit_kets(ground, excited, mode)))
}

fn unit_kets(ground: &LevelLabel, excited: &LevelLabel, mode: &PhotonMode) -> [BasisKet; 4] {
    [
        BasisKet::direct(excited, []),
        BasisKet::direct(ground, [(mode.clone(), 1)]),
        BasisKet::entangled(ground, [(mode.clone(), 1)]),
        BasisKet::entangled(excited, [(mode.clone(), 0)]),
    ]
}

/// Enumerates the gap-related basis of a scheme.
///
/// Every coupling that names a mode opens the entanglement unit of its gap.
/// Units contribute in declaration order: their two direct products to the
/// first sector and their two entangled kets (excited first) to the second.
/// Levels that no unit touches, and that are not reserved as an extension's
/// upper level, get a bare `|level> x |0>` ket at the end of the first sector.
pub fn enumerate_basis(s: &Scheme, tolerance: f64) -> Result<BasisSet, BasisError> {
    let mut direct = Vec::new();
    let mut entangled = Vec::new();
    for c in s.couplings.iter().filter(|c| c.opens_unit()) {
        let mode_id = c.mode.as_deref().unwrap_or_default();
        let mode = s
            .mode(mode_id)
            .ok_or_else(|| BasisError::Unresolved { what: "mode", id: mode_id.to_string() })?;
        let a = s.level(&c.a).ok_or_else(|| BasisError::Unresolved { what: "level", id: c.a.clone() })?;
        let b = s.level(&c.b).ok_or_else(|| BasisError::Unresolved { what: "level", id: c.b.clone() })?;
        let (ground, excited) = if a.energy <= b.energy { (a, b) } else { (b, a) };
        let unit = build_entanglement_unit(ground, excited, mode, tolerance)?;
        let [ex0, g1, g1e, ex0e] = unit_kets(ground, excited, mode);
        debug_assert_eq!(unit.len(), 4);
        direct.push(ex0);
        direct.push(g1);
        entangled.push(ex0e);
        entangled.push(g1e);
    }
    let touched: std::collections::HashSet<String> = direct.iter().map(|k| k.matter.id()).collect();
    for l in &s.levels {
        let id = l.id();
        let reserved = s.extensions.iter().any(|x| x.upper == id);
        if !touched.contains(&id) && !reserved {
            direct.push(BasisKet::direct(l, []));
        }
    }
    direct.extend(entangled);
    Ok(BasisSet::from_kets(direct))
}

/// Photon-added closure under the injection pulses of the scheme, repeated
/// until no ket under `max_photons` lacks a partner.
pub fn close_under_injections(b: &BasisSet, s: &Scheme) -> BasisSet {
    let modes: Vec<PhotonMode> = s.injections().filter_map(|p| s.mode(&p.mode).cloned()).collect();
    let mut out = b.clone();
    loop {
        let next = out.close_under(&modes, s.max_photons);
        if next.len() == out.len() {
            return out;
        }
        out = next;
    }
}

/// Applies every declared extension in order.
pub fn apply_extensions(b: &BasisSet, s: &Scheme, tolerance: f64) -> Result<BasisSet, BasisError> {
    let mut out = b.clone();
    for x in &s.extensions {
        let root = out
            .find(&x.root)
            .map(|i| out.kets[i].clone())
            .ok_or_else(|| BasisError::UnknownKet(x.root.to_string()))?;
        let mode = s
            .mode(&x.mode)
            .ok_or_else(|| BasisError::Unresolved { what: "mode", id: x.mode.clone() })?;
        let upper = s
            .level(&x.upper)
            .ok_or_else(|| BasisError::Unresolved { what: "level", id: x.upper.clone() })?;
        out = out.extend_two_photon(&root, mode, upper, tolerance)?;
    }
    Ok(out)
}

/// The basis a scenario runs on: enumeration, closure under injection
/// pulses, then declared extensions at the tail.
pub fn scenario_basis(s: &Scheme, tolerance: f64) -> Result<BasisSet, BasisError> {
    let b = enumerate_basis(s, tolerance)?;
    let b = close_under_injections(&b, s);
    apply_extensions(&b, s, tolerance)
}
