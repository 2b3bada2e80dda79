//! Diagonal Hamiltonian and gated hermitian coupling matrix.
//!
//! `H[k]` is the total energy of ket `k`. `V` is assembled pair by pair from
//! the scheme's coupling declarations, and a pair only receives a value when
//! [`selection_check`] allows it. The energy gate is a hard pre-filter: two
//! kets whose energies differ by more than `gate` are never coupled.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::basis::{BasisKet, BasisSet, Sector};
use crate::diag::{Diagnostic, Rule};
use crate::scheme::{CouplingKind, Scheme};

/// Default energy gate, in model energy units.
pub const DEFAULT_GATE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum OperatorError {
    #[error("energy gate must be positive and finite, got {0}")]
    BadGate(f64),
    #[error("coupling endpoint `{0}` is not a declared level")]
    UnknownLevel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    Parity,
    Spin,
    PhotonCount,
    EnergyGate,
    Sector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionVerdict {
    pub allowed: bool,
    pub rule: Option<SelectionRule>,
    pub detail: String,
}

impl SelectionVerdict {
    fn allow() -> Self {
        SelectionVerdict { allowed: true, rule: None, detail: String::new() }
    }

    fn deny(rule: SelectionRule, detail: impl Into<String>) -> Self {
        SelectionVerdict { allowed: false, rule: Some(rule), detail: detail.into() }
    }
}

/// Which mechanism a candidate pair is tested against.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    /// One quantum of `mode` is exchanged; spin is conserved.
    Dipole { mode: String },
    /// Singlet/triplet mixing. With a mode, one quantum is exchanged as well.
    SpinOrbit { mode: Option<String> },
    /// Non-entangled <-> entangled transfer inside the unit of `mode`.
    Transfer { mode: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    Dipole,
    SpinOrbit,
    Transfer,
}

impl Channel {
    pub fn edge_kind(&self) -> EdgeKind {
        match self {
            Channel::Dipole { .. } => EdgeKind::Dipole,
            Channel::SpinOrbit { .. } => EdgeKind::SpinOrbit,
            Channel::Transfer { .. } => EdgeKind::Transfer,
        }
    }
}

/// True when the occupations differ by exactly one quantum of `mode` and
/// agree on every other mode.
fn one_quantum_apart(a: &BasisKet, b: &BasisKet, mode: &str) -> bool {
    let (oa, ob) = (a.occupation(), b.occupation());
    let mut keys: Vec<&str> = oa.keys().chain(ob.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let mut hit = false;
    for k in keys {
        let d = i64::from(oa.get(k).copied().unwrap_or(0)) - i64::from(ob.get(k).copied().unwrap_or(0));
        match (k == mode, d.abs()) {
            (_, 0) => {}
            (true, 1) => hit = true,
            _ => return false,
        }
    }
    hit
}

/// Decides whether `channel` may couple kets `a` and `b` under energy gate `gate`.
pub fn selection_check(channel: &Channel, a: &BasisKet, b: &BasisKet, gate: f64) -> SelectionVerdict {
    let d_lambda = (a.matter.term.lambda() - b.matter.term.lambda()).abs();
    let d_spin = (a.matter.spin.multiplicity() - b.matter.spin.multiplicity()).abs();
    let gap = (a.total_energy() - b.total_energy()).abs();

    match channel {
        Channel::Transfer { mode } => {
            if a.sector == b.sector {
                return SelectionVerdict::deny(SelectionRule::Sector, "transfer must cross sectors");
            }
            let ent = if a.is_entangled() { a } else { b };
            if a.matter.id() != b.matter.id() || a.occupation() != b.occupation() {
                return SelectionVerdict::deny(
                    SelectionRule::Sector,
                    "sector transfer only links label-identical kets",
                );
            }
            if ent.stitches.last().map(|q| q.mode.as_str()) != Some(mode.as_str()) {
                return SelectionVerdict::deny(
                    SelectionRule::Sector,
                    format!("entangled ket is not stitched on `{mode}`"),
                );
            }
        }
        Channel::Dipole { mode } => {
            if a.sector != b.sector {
                return SelectionVerdict::deny(SelectionRule::Sector, "dipole mixing stays within a sector");
            }
            if d_spin != 0 {
                return SelectionVerdict::deny(SelectionRule::Spin, "dipole transitions conserve spin multiplicity");
            }
            if d_lambda != 1 {
                return SelectionVerdict::deny(
                    SelectionRule::Parity,
                    format!("dipole needs |dLambda| = 1, got {d_lambda}"),
                );
            }
            if !one_quantum_apart(a, b, mode) {
                return SelectionVerdict::deny(
                    SelectionRule::PhotonCount,
                    format!("occupations must differ by one quantum of `{mode}` only"),
                );
            }
        }
        Channel::SpinOrbit { mode } => {
            if a.sector != b.sector {
                return SelectionVerdict::deny(SelectionRule::Sector, "spin-orbit mixing stays within a sector");
            }
            if d_spin != 2 {
                return SelectionVerdict::deny(SelectionRule::Spin, "spin-orbit mixing links a singlet with a triplet");
            }
            if d_lambda != 1 {
                return SelectionVerdict::deny(
                    SelectionRule::Parity,
                    format!("spin-orbit mixing needs |dLambda| = 1, got {d_lambda}"),
                );
            }
            let photons_ok = match mode {
                None => a.occupation() == b.occupation(),
                Some(m) => one_quantum_apart(a, b, m),
            };
            if !photons_ok {
                return SelectionVerdict::deny(SelectionRule::PhotonCount, "photon occupations do not match the channel");
            }
        }
    }
    if gap.is_nan() || gap > gate {
        return SelectionVerdict::deny(
            SelectionRule::EnergyGate,
            format!("energy mismatch {gap:e} exceeds gate {gate:e}"),
        );
    }
    SelectionVerdict::allow()
}

/// One stored off-diagonal element, `row < col`; `V[col,row]` is its conjugate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingEntry {
    pub row: usize,
    pub col: usize,
    pub value: Complex64,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPair {
    diagonal: Vec<f64>,
    entries: Vec<CouplingEntry>,
    gate: f64,
}

impl OperatorPair {
    /// Builds an operator from explicit pieces; entries are merged and
    /// normalized to the upper triangle. Exact zeros are dropped.
    pub fn from_parts(diagonal: Vec<f64>, entries: impl IntoIterator<Item = CouplingEntry>, gate: f64) -> Self {
        let mut merged: std::collections::BTreeMap<(usize, usize), CouplingEntry> = Default::default();
        for mut e in entries {
            assert!(e.row != e.col, "coupling on the diagonal");
            if e.row > e.col {
                std::mem::swap(&mut e.row, &mut e.col);
                e.value = e.value.conj();
            }
            merged
                .entry((e.row, e.col))
                .and_modify(|x| x.value += e.value)
                .or_insert(e);
        }
        let entries = merged.into_values().filter(|e| e.value != Complex64::new(0.0, 0.0)).collect();
        OperatorPair { diagonal, entries, gate }
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn entries(&self) -> &[CouplingEntry] {
        &self.entries
    }

    pub fn gate(&self) -> f64 {
        self.gate
    }

    pub fn coupling(&self, a: usize, b: usize) -> Complex64 {
        let (r, c, flip) = if a <= b { (a, b, false) } else { (b, a, true) };
        self.entries
            .iter()
            .find(|e| e.row == r && e.col == c)
            .map(|e| if flip { e.value.conj() } else { e.value })
            .unwrap_or_default()
    }

    /// Dense `V`, with the lower triangle written as the exact conjugate.
    pub fn coupling_matrix(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut v = DMatrix::zeros(n, n);
        for e in &self.entries {
            v[(e.row, e.col)] = e.value;
            v[(e.col, e.row)] = e.value.conj();
        }
        v
    }

    /// Dense `H + V`.
    pub fn hamiltonian(&self) -> DMatrix<Complex64> {
        let mut m = self.coupling_matrix();
        for (i, &h) in self.diagonal.iter().enumerate() {
            m[(i, i)] = Complex64::new(h, 0.0);
        }
        m
    }

    /// `<c|H+V|c>`.
    pub fn energy_expectation(&self, c: &[Complex64]) -> f64 {
        let mut e: f64 = self.diagonal.iter().zip(c).map(|(h, a)| h * a.norm_sqr()).sum();
        for x in &self.entries {
            // c_r* V_rc c_c + c_c* V_cr c_r = 2 Re(c_r* V_rc c_c)
            e += 2.0 * (c[x.row].conj() * x.value * c[x.col]).re;
        }
        e
    }

    pub fn to_dump(&self) -> MatrixDump {
        let mut triplets = Vec::with_capacity(2 * self.entries.len());
        for e in &self.entries {
            triplets.push((e.row, e.col, e.value.re, e.value.im));
            triplets.push((e.col, e.row, e.value.re, -e.value.im));
        }
        triplets.sort_by_key(|t| (t.0, t.1));
        MatrixDump { schema: 1, dimension: self.dim(), gate: self.gate, diagonal: self.diagonal.clone(), triplets }
    }
}

/// JSON form of an operator: dimension, diagonal and every nonzero `V` entry
/// as `[row, col, re, im]`.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixDump {
    pub schema: u32,
    pub dimension: usize,
    pub gate: f64,
    pub diagonal: Vec<f64>,
    pub triplets: Vec<(usize, usize, f64, f64)>,
}

/// Assembles `H` and `V` for basis `b` from the couplings of `s`.
///
/// Returns warnings for declarations that end up inducing no allowed pair.
pub fn assemble(b: &BasisSet, s: &Scheme, gate: f64) -> Result<(OperatorPair, Vec<Diagnostic>), OperatorError> {
    if !(gate > 0.0 && gate.is_finite()) {
        return Err(OperatorError::BadGate(gate));
    }
    let kets = b.kets();
    let mut entries = Vec::new();
    let mut warnings = Vec::new();

    for c in &s.couplings {
        for id in [&c.a, &c.b] {
            if s.level(id).is_none() {
                return Err(OperatorError::UnknownLevel(id.clone()));
            }
        }
        let value = Complex64::from_polar(c.strength, c.phase);
        let main = match c.kind {
            CouplingKind::Dipole => c.mode.clone().map(|mode| Channel::Dipole { mode }),
            CouplingKind::Spinorbit => Some(Channel::SpinOrbit { mode: c.mode.clone() }),
            CouplingKind::Gap => None,
        };
        let mut induced = 0usize;
        if let Some(channel) = &main {
            for (i, ki) in kets.iter().enumerate() {
                if ki.matter.id() != c.a {
                    continue;
                }
                for (j, kj) in kets.iter().enumerate() {
                    if kj.matter.id() != c.b {
                        continue;
                    }
                    if selection_check(channel, ki, kj, gate).allowed {
                        entries.push(CouplingEntry { row: i, col: j, value, kind: channel.edge_kind() });
                        induced += 1;
                    }
                }
            }
        }
        if let Some(mode) = &c.mode {
            let channel = Channel::Transfer { mode: mode.clone() };
            let t = Complex64::new(c.transfer_strength(), 0.0);
            for (i, ki) in kets.iter().enumerate().filter(|(_, k)| k.sector == Sector::NonEntangled) {
                if ki.matter.id() != c.a && ki.matter.id() != c.b {
                    continue;
                }
                for (j, kj) in kets.iter().enumerate().filter(|(_, k)| k.sector == Sector::Entangled) {
                    if selection_check(&channel, ki, kj, gate).allowed {
                        entries.push(CouplingEntry { row: i, col: j, value: t, kind: EdgeKind::Transfer });
                        if main.is_none() {
                            induced += 1;
                        }
                    }
                }
            }
        }
        if induced == 0 {
            warnings.push(Diagnostic::warning(
                Rule::DeadCoupling,
                c.span,
                format!("{} {} {} induces no allowed pair in this basis", c.kind.keyword(), c.a, c.b),
            ));
        }
    }

    let op = OperatorPair::from_parts(b.energies(), entries, gate);
    Ok((op, warnings))
}
