//! Coherent evolution of the amplitude vector and the laboratory transfers
//! around it.
//!
//! Segments between pulses are propagated exactly: `H + V` is split into its
//! connected blocks, each block is diagonalized once, and a step of length
//! `dt` applies `Q exp(-i E dt) Q†`. The step size therefore only sets the
//! sampling and detector-check granularity.
//!
//! `|C_k|^2` is reported as "population" purely as a numerical observable of
//! the amplitude vector.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::basis::BasisSet;
use crate::operator::OperatorPair;
use crate::scheme::{DetectorDecl, KetRef, PhotonMode, Scheme};

/// Amplitudes at or below this magnitude count as unpopulated.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;
/// Population floor used when reporting that a ket "developed".
pub const POPULATION_FLOOR: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum PropagationError {
    #[error("ket `{0}` is not in the basis")]
    UnknownKet(String),
    #[error("amplitude assignment has zero norm")]
    ZeroNorm,
    #[error("state has dimension {state} but the operator has {operator}")]
    DimensionMismatch { state: usize, operator: usize },
    #[error("H + V is not hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("populated ket `{ket}` has no partner with one more `{mode}` quantum")]
    MissingPartner { ket: String, mode: String },
    #[error("detector `{id}` threshold {threshold} is outside (0, 1]")]
    BadThreshold { id: String, threshold: f64 },
    #[error("detector `{id}`: precursor ket `{ket}` is not in the basis")]
    MissingPrecursor { id: String, ket: String },
    #[error("pulse at t={time} lies outside [0, {t_end}]")]
    PulseOutOfRange { time: f64, t_end: f64 },
    #[error("pulses must be sorted by time")]
    UnsortedPulses,
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl StateVector {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn population(&self, k: usize) -> f64 {
        self.amplitudes[k].norm_sqr()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    /// Basis vector `k` at t = 0.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        StateVector { amplitudes, time: 0.0 }
    }
}

/// Normalized state at t = 0 from weights on named kets. Weights on the same
/// ket add up.
pub fn prepare(b: &BasisSet, assignment: &[(&str, Complex64)]) -> Result<StateVector, PropagationError> {
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); b.len()];
    for (name, w) in assignment {
        let k = b.resolve(name).map_err(|_| PropagationError::UnknownKet((*name).to_string()))?;
        amplitudes[k] += *w;
    }
    let norm = amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(PropagationError::ZeroNorm);
    }
    for a in &mut amplitudes {
        *a /= norm;
    }
    Ok(StateVector { amplitudes, time: 0.0 })
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    energies: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

/// Spectral decomposition of `H + V`, block by block.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    blocks: Vec<Block>,
}

fn components(op: &OperatorPair) -> Vec<Vec<usize>> {
    let n = op.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in op.entries() {
        let (a, b) = (find(&mut parent, e.row), find(&mut parent, e.col));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

impl Propagator {
    /// Diagonalizes each connected block of `H + V` separately, so amplitude
    /// can never leak between disconnected kets.
    pub fn new(op: &OperatorPair) -> Result<Self, PropagationError> {
        Self::build(op, components(op))
    }

    /// One dense diagonalization of the full matrix.
    pub fn dense(op: &OperatorPair) -> Result<Self, PropagationError> {
        Self::build(op, vec![(0..op.dim()).collect()])
    }

    fn build(op: &OperatorPair, groups: Vec<Vec<usize>>) -> Result<Self, PropagationError> {
        let full = op.hamiltonian();
        let deviation = (&full - full.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if deviation != 0.0 {
            return Err(PropagationError::NotHermitian(deviation));
        }
        let blocks = groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|indices| {
                let m = DMatrix::from_fn(indices.len(), indices.len(), |r, c| full[(indices[r], indices[c])]);
                let (energies, vectors) = if indices.len() == 1 {
                    (DVector::from_element(1, m[(0, 0)].re), DMatrix::identity(1, 1))
                } else {
                    let eig = SymmetricEigen::new(m);
                    (eig.eigenvalues, eig.eigenvectors)
                };
                Block { indices, energies, vectors }
            })
            .collect();
        Ok(Propagator { dim: op.dim(), blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Precomputes the unitary for a fixed step `dt` (any sign).
    pub fn unitary(&self, dt: f64) -> StepOperator {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let phases = DMatrix::from_diagonal(&b.energies.map(|e| Complex64::from_polar(1.0, -e * dt)));
                (b.indices.clone(), &b.vectors * phases * b.vectors.adjoint())
            })
            .collect();
        StepOperator { dim: self.dim, dt, blocks }
    }

    /// `c(t + dt)`; negative `dt` runs the coherent segment backwards.
    pub fn propagate(&self, c: &StateVector, dt: f64) -> Result<StateVector, PropagationError> {
        if !dt.is_finite() {
            return Err(PropagationError::BadStep(dt));
        }
        let mut out = c.clone();
        self.unitary(dt).apply(&mut out)?;
        Ok(out)
    }
}

/// A precomputed `U(dt)`.
#[derive(Debug, Clone)]
pub struct StepOperator {
    dim: usize,
    dt: f64,
    blocks: Vec<(Vec<usize>, DMatrix<Complex64>)>,
}

impl StepOperator {
    pub fn apply(&self, c: &mut StateVector) -> Result<(), PropagationError> {
        if c.dim() != self.dim {
            return Err(PropagationError::DimensionMismatch { state: c.dim(), operator: self.dim });
        }
        for (idx, u) in &self.blocks {
            if idx.len() == 1 {
                c.amplitudes[idx[0]] *= u[(0, 0)];
                continue;
            }
            let local = DVector::from_iterator(idx.len(), idx.iter().map(|&i| c.amplitudes[i]));
            let next = u * local;
            for (k, &i) in idx.iter().enumerate() {
                c.amplitudes[i] = next[k];
            }
        }
        c.time += self.dt;
        Ok(())
    }
}

/// One exact step of `i dC/dt = (H + V) C`.
pub fn step(c: &StateVector, op: &OperatorPair, dt: f64) -> Result<StateVector, PropagationError> {
    if c.dim() != op.dim() {
        return Err(PropagationError::DimensionMismatch { state: c.dim(), operator: op.dim() });
    }
    Propagator::new(op)?.propagate(c, dt)
}

/// Moves every populated ket onto its partner with one more quantum of
/// `mode`. Amplitude below [`AMPLITUDE_FLOOR`] on kets without a partner is
/// dropped.
pub fn inject_pulse(c: &StateVector, b: &BasisSet, mode: &PhotonMode) -> Result<StateVector, PropagationError> {
    let mut out = vec![Complex64::new(0.0, 0.0); c.dim()];
    for (k, a) in c.amplitudes.iter().enumerate() {
        if a.norm() <= AMPLITUDE_FLOOR {
            if let Some(p) = b.partner(k, mode) {
                out[p] += *a;
            }
            continue;
        }
        let p = b.partner(k, mode).ok_or_else(|| PropagationError::MissingPartner {
            ket: b.get(k).map(|x| x.label()).unwrap_or_default(),
            mode: mode.id.clone(),
        })?;
        out[p] += *a;
    }
    Ok(StateVector { amplitudes: out, time: c.time })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectMode {
    /// Fires when the precursor population rises to the threshold.
    Threshold,
    /// Fires with probability `rate * population * dt` per step.
    Stochastic,
}

/// A detector resolved against a basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detector {
    pub id: String,
    pub ket: usize,
    pub label: String,
    pub mode: String,
    pub threshold: f64,
    pub rate: Option<f64>,
}

/// The precursor of a detector is the direct product of its target level
/// with exactly one free quantum of its mode.
pub fn resolve_detectors(b: &BasisSet, decls: &[DetectorDecl]) -> Result<Vec<Detector>, PropagationError> {
    decls
        .iter()
        .map(|d| {
            if !(d.threshold > 0.0 && d.threshold <= 1.0) {
                return Err(PropagationError::BadThreshold { id: d.id.clone(), threshold: d.threshold });
            }
            let mut r = KetRef::bare(d.target.clone());
            r.photons.push((d.mode.clone(), 1));
            let ket = b
                .find(&r)
                .ok_or_else(|| PropagationError::MissingPrecursor { id: d.id.clone(), ket: r.to_string() })?;
            Ok(Detector {
                id: d.id.clone(),
                ket,
                label: r.to_string(),
                mode: d.mode.clone(),
                threshold: d.threshold,
                rate: d.rate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmissionEvent {
    pub time: f64,
    pub detector: String,
    pub ket: usize,
    pub ket_label: String,
    /// Outgoing quantum, written with the `-` laboratory convention.
    pub photon: String,
    pub population: f64,
    pub collapsed: bool,
}

/// Stateful detector checks across a run. A detector fires at most once.
#[derive(Debug, Clone)]
pub struct DetectorBank {
    detectors: Vec<Detector>,
    mode: DetectMode,
    armed: Vec<bool>,
    fired: Vec<bool>,
    rng: ChaCha8Rng,
}

impl DetectorBank {
    pub fn new(detectors: Vec<Detector>, mode: DetectMode, seed: u64) -> Result<Self, PropagationError> {
        for d in &detectors {
            if !(d.threshold > 0.0 && d.threshold <= 1.0) {
                return Err(PropagationError::BadThreshold { id: d.id.clone(), threshold: d.threshold });
            }
        }
        let n = detectors.len();
        Ok(DetectorBank {
            detectors,
            mode,
            armed: vec![false; n],
            fired: vec![false; n],
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    /// Arms threshold detectors whose population currently sits below threshold.
    pub fn arm(&mut self, c: &StateVector) {
        for (i, d) in self.detectors.iter().enumerate() {
            if c.population(d.ket) < d.threshold {
                self.armed[i] = true;
            }
        }
    }

    /// Checks the state after a step of length `dt`. Returns the first firing.
    pub fn check(&mut self, c: &StateVector, dt: f64) -> Option<EmissionEvent> {
        let mut hit = None;
        for (i, d) in self.detectors.iter().enumerate() {
            let p = c.population(d.ket);
            let fires = match self.mode {
                DetectMode::Threshold => {
                    let f = self.armed[i] && p >= d.threshold;
                    if p < d.threshold {
                        self.armed[i] = true;
                    }
                    f
                }
                DetectMode::Stochastic => {
                    // One draw per detector per step keeps the stream aligned across runs.
                    let u: f64 = self.rng.gen();
                    let prob = (d.rate.unwrap_or(0.0) * p * dt).min(1.0);
                    u < prob
                }
            };
            if fires && !self.fired[i] && hit.is_none() {
                self.fired[i] = true;
                hit = Some(EmissionEvent {
                    time: c.time,
                    detector: d.id.clone(),
                    ket: d.ket,
                    ket_label: d.label.clone(),
                    photon: format!("1-_{}", d.mode),
                    population: p,
                    collapsed: false,
                });
            }
        }
        hit
    }
}

/// Single-shot detector check on one state.
pub fn detect(
    c: &StateVector,
    detectors: &[Detector],
    mode: DetectMode,
    dt: f64,
    seed: u64,
) -> Result<Option<EmissionEvent>, PropagationError> {
    let mut bank = DetectorBank::new(detectors.to_vec(), mode, seed)?;
    bank.armed.iter_mut().for_each(|a| *a = true);
    Ok(bank.check(c, dt))
}

/// Projects onto ket `k` and renormalizes, keeping the phase of `C_k`.
pub fn collapse(c: &StateVector, k: usize) -> StateVector {
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); c.dim()];
    let a = c.amplitudes[k];
    amplitudes[k] = if a.norm() > 0.0 { a / a.norm() } else { Complex64::new(1.0, 0.0) };
    StateVector { amplitudes, time: c.time }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preparation {
    pub ket: usize,
    pub mode: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Injection {
    pub time: f64,
    pub mode: PhotonMode,
}

/// Laboratory transfers around a run: the preparation that brings the first
/// quantum in, and later pulses that inject more.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Schedule {
    pub preparation: Option<Preparation>,
    pub injections: Vec<Injection>,
}

impl Schedule {
    /// Reads the scheme's pulses. The preparation pulse points at the direct
    /// product of its target level with one quantum of its mode.
    pub fn from_scheme(s: &Scheme, b: &BasisSet) -> Result<Self, PropagationError> {
        let preparation = match s.preparation() {
            Some(p) => {
                let mut r = KetRef::bare(p.into.clone().unwrap_or_default());
                r.photons.push((p.mode.clone(), 1));
                let ket = b.find(&r).ok_or_else(|| PropagationError::UnknownKet(r.to_string()))?;
                Some(Preparation { ket, mode: p.mode.clone() })
            }
            None => None,
        };
        let injections = s
            .injections()
            .map(|p| {
                s.mode(&p.mode)
                    .map(|m| Injection { time: p.time, mode: m.clone() })
                    .ok_or_else(|| PropagationError::UnknownMode(p.mode.clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Schedule { preparation, injections })
    }

    pub fn without_injections(&self) -> Self {
        Schedule { preparation: self.preparation.clone(), injections: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LabEvent {
    /// `+=>`: the prepared laboratory state enters the Hilbert/Fock evolution.
    Prepared { time: f64, ket: usize, ket_label: String, mode: String, direction: char },
    /// `+=>`: a delayed pulse adds one quantum to every populated ket.
    Injected { time: f64, mode: String, direction: char },
    /// `-=>`: a detector fired.
    Emitted { direction: char, #[serde(flatten)] event: EmissionEvent },
}

#[derive(Debug, Clone, Serialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// Quanta injected before this segment (preparation included).
    pub injected: usize,
    /// Largest population of every ket over all steps of the segment.
    pub max_population: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub detect_mode: DetectMode,
    pub collapse: bool,
    pub seed: u64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            t_end: 200.0,
            dt: 0.05,
            sample_every: 20,
            detect_mode: DetectMode::Threshold,
            collapse: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub energies: Vec<f64>,
    /// `populations[s][k]` is `|C_k|^2` at sample `s`.
    pub populations: Vec<Vec<f64>>,
    pub events: Vec<LabEvent>,
    pub segments: Vec<Segment>,
    /// Set when a collapsing emission ended coherent evolution.
    pub terminated_at: Option<f64>,
    #[serde(skip)]
    pub final_state: Option<StateVector>,
}

impl Trajectory {
    pub fn emissions(&self) -> impl Iterator<Item = &EmissionEvent> {
        self.events.iter().filter_map(|e| match e {
            LabEvent::Emitted { event, .. } => Some(event),
            _ => None,
        })
    }

    /// Largest population of ket `k` over the whole run.
    pub fn max_population(&self, k: usize) -> f64 {
        self.segments.iter().map(|s| s.max_population[k]).fold(0.0, f64::max)
    }

    /// CSV with columns `t, norm, energy` then `|C_k|^2` per ket, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,norm,energy");
        for l in &self.labels {
            let _ = write!(out, ",\"|C({l})|^2\"");
        }
        out.push('\n');
        for (s, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t:.11e},{:.11e},{:.11e}", self.norms[s], self.energies[s]);
            for p in &self.populations[s] {
                let _ = write!(out, ",{p:.11e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Runs a full sequence: exact coherent segments, injections at their
/// scheduled step, and a detector check after every step.
///
/// Within a segment, `<C|H+V|C>` is conserved. A collapsing emission
/// projects onto the precursor and ends the run.
pub fn evolve(
    c0: &StateVector,
    op: &OperatorPair,
    b: &BasisSet,
    schedule: &Schedule,
    detectors: &[Detector],
    cfg: &EvolveConfig,
) -> Result<Trajectory, PropagationError> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(PropagationError::BadStep(cfg.dt));
    }
    if c0.dim() != op.dim() || b.len() != op.dim() {
        return Err(PropagationError::DimensionMismatch { state: c0.dim(), operator: op.dim() });
    }
    let mut last = 0.0;
    for inj in &schedule.injections {
        if inj.time < last {
            return Err(PropagationError::UnsortedPulses);
        }
        if inj.time < 0.0 || inj.time > cfg.t_end {
            return Err(PropagationError::PulseOutOfRange { time: inj.time, t_end: cfg.t_end });
        }
        last = inj.time;
    }
    let sample_every = cfg.sample_every.max(1);
    let ratio = cfg.t_end / cfg.dt;
    let n_steps = if (ratio - ratio.round()).abs() < 1e-9 { ratio.round() } else { ratio.ceil() }.max(0.0) as usize;
    let u = Propagator::new(op)?.unitary(cfg.dt);
    let mut bank = DetectorBank::new(detectors.to_vec(), cfg.detect_mode, cfg.seed)?;

    let mut traj = Trajectory {
        labels: b.iter().map(|k| k.label()).collect(),
        times: Vec::new(),
        norms: Vec::new(),
        energies: Vec::new(),
        populations: Vec::new(),
        events: Vec::new(),
        segments: Vec::new(),
        terminated_at: None,
        final_state: None,
    };
    let mut c = c0.clone();
    let record = |traj: &mut Trajectory, c: &StateVector| {
        traj.times.push(c.time);
        traj.norms.push(c.norm());
        traj.energies.push(op.energy_expectation(&c.amplitudes));
        traj.populations.push(c.populations());
    };

    let mut injected = 0;
    if let Some(p) = &schedule.preparation {
        traj.events.push(LabEvent::Prepared {
            time: c.time,
            ket: p.ket,
            ket_label: b.get(p.ket).map(|k| k.label()).unwrap_or_default(),
            mode: p.mode.clone(),
            direction: '+',
        });
        injected += 1;
    }
    let mut segment = Segment { start: c.time, end: c.time, injected, max_population: c.populations() };
    record(&mut traj, &c);
    bank.arm(&c);

    let mut next_pulse = 0;
    for k in 0..n_steps {
        while next_pulse < schedule.injections.len()
            && (schedule.injections[next_pulse].time / cfg.dt).round() as usize <= k
        {
            let inj = &schedule.injections[next_pulse];
            c = inject_pulse(&c, b, &inj.mode)?;
            segment.end = c.time;
            traj.segments.push(segment);
            injected += 1;
            segment = Segment { start: c.time, end: c.time, injected, max_population: c.populations() };
            traj.events.push(LabEvent::Injected { time: c.time, mode: inj.mode.id.clone(), direction: '+' });
            record(&mut traj, &c);
            next_pulse += 1;
        }

        u.apply(&mut c)?;
        c.time = c0.time + (k + 1) as f64 * cfg.dt;
        for (m, p) in segment.max_population.iter_mut().zip(c.amplitudes.iter()) {
            *m = m.max(p.norm_sqr());
        }
        let fired = bank.check(&c, cfg.dt);
        let sampled = (k + 1) % sample_every == 0 || k + 1 == n_steps;
        if let Some(mut ev) = fired {
            if cfg.collapse {
                c = collapse(&c, ev.ket);
                ev.collapsed = true;
            }
            traj.events.push(LabEvent::Emitted { direction: '-', event: ev });
            record(&mut traj, &c);
            if cfg.collapse {
                traj.terminated_at = Some(c.time);
                break;
            }
        } else if sampled {
            record(&mut traj, &c);
        }
    }
    segment.end = c.time;
    traj.segments.push(segment);
    traj.final_state = Some(c);
    Ok(traj)
}
