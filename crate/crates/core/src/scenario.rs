//! A scheme file taken through the whole pipeline: parse, validate, basis,
//! operator, schedule and detectors.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::basis::{scenario_basis, BasisError, BasisSet, DEFAULT_DETUNING_TOLERANCE};
use crate::diag::{has_errors, Diagnostic};
use crate::operator::{assemble, OperatorError, OperatorPair, DEFAULT_GATE};
use crate::pathways::{build_graph, photon_budget, reachable, route_families, PulsePlan, RouteFamily};
use crate::propagator::{
    evolve, resolve_detectors, Detector, EvolveConfig, LabEvent, PropagationError, Schedule, StateVector, Trajectory,
};
use crate::scheme::{parse_scheme, serialize_scheme, validate_scheme, Scheme};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read `{path}`: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scheme does not parse")]
    Parse(Vec<Diagnostic>),
    #[error("scheme does not validate")]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
}

impl ScenarioError {
    /// 2 for I/O problems, 1 for everything the scheme itself gets wrong.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Io { .. } => 2,
            _ => 1,
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            ScenarioError::Parse(d) | ScenarioError::Invalid(d) => d,
            _ => &[],
        }
    }
}

/// Hex SHA-256 of the canonical serialization.
pub fn scheme_digest(s: &Scheme) -> String {
    Sha256::digest(serialize_scheme(s).as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_scheme(path: &Path) -> Result<Scheme, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    parse_scheme(&text).map_err(ScenarioError::Parse)
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub scheme: Scheme,
    /// Validation and assembly warnings.
    pub diagnostics: Vec<Diagnostic>,
    pub basis: BasisSet,
    pub operator: OperatorPair,
    pub schedule: Schedule,
    pub detectors: Vec<Detector>,
}

impl Scenario {
    pub fn from_scheme(scheme: Scheme) -> Result<Self, ScenarioError> {
        let mut diagnostics = validate_scheme(&scheme);
        if has_errors(&diagnostics) {
            return Err(ScenarioError::Invalid(diagnostics));
        }
        let basis = scenario_basis(&scheme, DEFAULT_DETUNING_TOLERANCE)?;
        let (operator, warnings) = assemble(&basis, &scheme, DEFAULT_GATE)?;
        diagnostics.extend(warnings);
        let schedule = Schedule::from_scheme(&scheme, &basis)?;
        let detectors = resolve_detectors(&basis, &scheme.detectors)?;
        Ok(Scenario { scheme, diagnostics, basis, operator, schedule, detectors })
    }

    pub fn from_text(text: &str) -> Result<Self, ScenarioError> {
        Self::from_scheme(parse_scheme(text).map_err(ScenarioError::Parse)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::from_scheme(read_scheme(path.as_ref())?)
    }

    /// The prepared ket, or the first basis ket when nothing is prepared.
    pub fn start(&self) -> usize {
        self.schedule.preparation.as_ref().map_or(0, |p| p.ket)
    }

    /// Precursor ket of the first detector.
    pub fn target(&self) -> Option<usize> {
        self.detectors.first().map(|d| d.ket)
    }

    pub fn plan(&self) -> PulsePlan {
        PulsePlan::from_schedule(&self.schedule)
    }

    pub fn verdict(&self, from: usize, to: usize, plan: &PulsePlan) -> Verdict {
        let r = reachable(&build_graph(&self.operator), &self.basis, from, to, plan);
        let label = |k: usize| self.basis.kets()[k].label();
        Verdict {
            from: label(from),
            to: label(to),
            reachable: r.reachable,
            witness: r.witness.as_ref().map(|w| w.kets.iter().map(|&k| label(k)).collect()),
            photon_budget: r.witness.as_ref().map(photon_budget),
            routes: r.witness.as_ref().map(|w| route_families(w, &self.basis)).unwrap_or_default(),
        }
    }

    pub fn initial_state(&self) -> StateVector {
        StateVector::basis(self.basis.len(), self.start())
    }

    pub fn evolve(&self, cfg: &EvolveConfig) -> Result<Trajectory, ScenarioError> {
        Ok(evolve(&self.initial_state(), &self.operator, &self.basis, &self.schedule, &self.detectors, cfg)?)
    }

    pub fn digest(&self) -> String {
        scheme_digest(&self.scheme)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub from: String,
    pub to: String,
    pub reachable: bool,
    pub witness: Option<Vec<String>>,
    pub photon_budget: Option<usize>,
    pub routes: Vec<RouteFamily>,
}

/// Everything a run produced, reconstructible from the scheme and the seed.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub schema: u32,
    pub scheme: String,
    pub digest: String,
    pub basis_size: usize,
    pub diagnostics: Vec<Diagnostic>,
    pub reachability: Vec<Verdict>,
    pub config: EvolveConfig,
    pub trajectory_files: Vec<String>,
    pub events: Vec<LabEvent>,
    pub terminated_at: Option<f64>,
}

impl ScenarioReport {
    pub fn new(scenario: &Scenario, scheme_name: &str, cfg: &EvolveConfig, traj: &Trajectory, files: Vec<String>) -> Self {
        let reachability = scenario
            .target()
            .map(|t| vec![scenario.verdict(scenario.start(), t, &scenario.plan())])
            .unwrap_or_default();
        ScenarioReport {
            schema: 1,
            scheme: scheme_name.to_string(),
            digest: scenario.digest(),
            basis_size: scenario.basis.len(),
            diagnostics: scenario.diagnostics.clone(),
            reachability,
            config: *cfg,
            trajectory_files: files,
            events: traj.events.clone(),
            terminated_at: traj.terminated_at,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
[family Z]
S0 j=0 g=0 term=Sigma spin=1 energy=0.0
P1 j=1 g=0 term=Pi spin=1 energy=1.0
[modes]
w omega=1.0
[couplings]
dipole Z.S0 Z.P1 mode=w strength=0.1
[pulses]
pump mode=w t=0 into=Z.S0
";

    #[test]
    fn digest_ignores_formatting() {
        let a = Scenario::from_text(SMALL).unwrap();
        let b = Scenario::from_text(&SMALL.replace(' ', "  ")).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn start_is_the_prepared_ket() {
        let s = Scenario::from_text(SMALL).unwrap();
        assert_eq!(s.basis.kets()[s.start()].label(), "Z.S0|w=1");
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let e = Scenario::load("/nonexistent/x.scheme").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
