//! The `qpath` command line: `validate`, `basis`, `paths`, `evolve`, `dump`.
//!
//! Every command returns an [`Outcome`] instead of printing, so it can be
//! driven from tests and examples. Exit codes are 0 on success, 1 when the
//! scheme or a requested ket is wrong, and 2 for I/O or usage problems.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::basis::{enumerate_basis, scenario_basis, BasisSet, DEFAULT_DETUNING_TOLERANCE};
use crate::diag::{has_errors, Diagnostic};
use crate::pathways::{build_graph, enumerate_qpaths, photon_budget, route_families, PulsePlan, QPath, MAX_PATH_LEN};
use crate::propagator::{evolve, DetectMode, EvolveConfig, StateVector};
use crate::scenario::{read_scheme, Scenario, ScenarioError, ScenarioReport};
use crate::scheme::validate_scheme;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn fail(code: i32, stderr: String) -> Self {
        Outcome { code, stdout: String::new(), stderr }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qpath", version, about = "Photon-dressed level schemes: basis, q-paths and coherent evolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectArg {
    Threshold,
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a scheme file.
    Validate { scheme: PathBuf },
    /// Print the ordered basis.
    Basis {
        scheme: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: BasisFormat,
        /// Include pulse partners and extension kets.
        #[arg(long)]
        two_photon: bool,
    },
    /// Reachability and q-path enumeration as JSON.
    Paths {
        scheme: PathBuf,
        /// Start ket, by label or 1-based index. Defaults to the prepared ket.
        #[arg(long)]
        from: Option<String>,
        /// Target ket. Defaults to the first detector's precursor.
        #[arg(long)]
        to: Option<String>,
        #[arg(long, default_value_t = MAX_PATH_LEN)]
        max_len: usize,
        /// Let the scheme's injection pulses open further layers.
        #[arg(long)]
        pulses_from_scheme: bool,
        /// Longest listing of paths in the report, shortest paths first.
        #[arg(long, default_value_t = DEFAULT_LISTED_PATHS)]
        max_paths: usize,
    },
    /// Propagate the prepared state and write trajectory files.
    Evolve {
        scheme: PathBuf,
        #[arg(long, default_value_t = 200.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        #[arg(long, default_value_t = 20)]
        sample_every: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "threshold")]
        detect_mode: DetectArg,
        #[arg(long, value_enum, default_value = "on")]
        collapse: Switch,
        #[arg(long, default_value = "qpath-out")]
        out_dir: PathBuf,
        /// Start ket instead of the prepared one.
        #[arg(long)]
        from: Option<String>,
    },
    /// Print `H` and `V` as JSON.
    Dump { scheme: PathBuf },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Outcome::ok(text)
            } else {
                Outcome::fail(code, text)
            }
        }
    }
}

pub fn execute(cmd: Command) -> Outcome {
    match cmd {
        Command::Validate { scheme } => cmd_validate(&scheme),
        Command::Basis { scheme, format, two_photon } => cmd_basis(&scheme, format, two_photon),
        Command::Paths { scheme, from, to, max_len, pulses_from_scheme, max_paths } => {
            let q = PathQuery { from, to, max_len, pulses_from_scheme, max_paths };
            cmd_paths(&scheme, &q)
        }
        Command::Evolve { scheme, t_end, dt, sample_every, seed, detect_mode, collapse, out_dir, from } => {
            let cfg = EvolveConfig {
                t_end,
                dt,
                sample_every,
                detect_mode: match detect_mode {
                    DetectArg::Threshold => DetectMode::Threshold,
                    DetectArg::Stochastic => DetectMode::Stochastic,
                },
                collapse: collapse == Switch::On,
                seed,
            };
            cmd_evolve(&scheme, &cfg, &out_dir, from.as_deref())
        }
        Command::Dump { scheme } => cmd_dump(&scheme),
    }
}

fn render(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}

fn failure(e: ScenarioError) -> Outcome {
    let mut text = render(e.diagnostics());
    if text.is_empty() {
        text = format!("error: {e}\n");
    }
    Outcome::fail(e.exit_code(), text)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values always serialize");
    s.push('\n');
    s
}

pub fn cmd_validate(path: &Path) -> Outcome {
    let scheme = match read_scheme(path) {
        Ok(s) => s,
        Err(e) => return failure(e),
    };
    let diags = validate_scheme(&scheme);
    let mut out = render(&diags);
    if has_errors(&diags) {
        return Outcome { code: 1, stdout: out, stderr: String::new() };
    }
    let _ = writeln!(out, "ok: {} levels, {} couplings", scheme.levels.len(), scheme.couplings.len());
    Outcome::ok(out)
}

fn basis_rows(b: &BasisSet) -> Vec<serde_json::Value> {
    b.iter()
        .enumerate()
        .map(|(i, k)| {
            json!({
                "index": i + 1,
                "label": k.label(),
                "sector": if k.is_entangled() { "entangled" } else { "direct" },
                "level": k.matter.id(),
                "term": k.matter.term_symbol(),
                "energy": k.total_energy(),
            })
        })
        .collect()
}

pub fn cmd_basis(path: &Path, format: BasisFormat, two_photon: bool) -> Outcome {
    let scheme = match read_scheme(path) {
        Ok(s) => s,
        Err(e) => return failure(e),
    };
    let diags = validate_scheme(&scheme);
    if has_errors(&diags) {
        return Outcome::fail(1, render(&diags));
    }
    let built = if two_photon {
        scenario_basis(&scheme, DEFAULT_DETUNING_TOLERANCE)
    } else {
        enumerate_basis(&scheme, DEFAULT_DETUNING_TOLERANCE)
    };
    let b = match built {
        Ok(b) => b,
        Err(e) => return Outcome::fail(1, format!("error: {e}\n")),
    };
    match format {
        BasisFormat::Json => Outcome::ok(to_json(&json!({
            "schema": 1,
            "size": b.len(),
            "direct": b.non_entangled_len(),
            "kets": basis_rows(&b),
        }))),
        BasisFormat::Table => {
            let mut out = format!("{:>3}  {:<9}  {:<28}  {:<6}  {:>10}\n", "#", "sector", "ket", "term", "energy");
            for (i, k) in b.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:>3}  {:<9}  {:<28}  {:<6}  {:>10.6}",
                    i + 1,
                    if k.is_entangled() { "entangled" } else { "direct" },
                    k.label(),
                    k.matter.term_symbol(),
                    k.total_energy()
                );
            }
            Outcome::ok(out)
        }
    }
}

fn resolve(s: &Scenario, text: Option<&str>, fallback: Option<usize>, what: &str) -> Result<usize, Outcome> {
    match text {
        Some(t) => s.basis.resolve(t).map_err(|e| Outcome::fail(1, format!("error: {e}\n"))),
        None => fallback.ok_or_else(|| Outcome::fail(1, format!("error: no {what} ket given and none implied by the scheme\n"))),
    }
}

fn path_json(p: &QPath, s: &Scenario) -> serde_json::Value {
    let label = |k: usize| s.basis.kets()[k].label();
    json!({
        "kets": p.kets.iter().map(|&k| label(k)).collect::<Vec<_>>(),
        "steps": p.steps.iter().map(|st| json!({
            "from": label(st.from),
            "to": label(st.to),
            "kind": st.kind,
            "d_lambda": st.d_lambda,
            "d_spin": st.d_spin,
        })).collect::<Vec<_>>(),
        "photon_budget": photon_budget(p),
        "routes": route_families(p, &s.basis),
    })
}

/// Default cap on the number of paths listed by `paths`.
pub const DEFAULT_LISTED_PATHS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathQuery {
    pub from: Option<String>,
    pub to: Option<String>,
    pub max_len: usize,
    pub pulses_from_scheme: bool,
    pub max_paths: usize,
}

impl Default for PathQuery {
    fn default() -> Self {
        PathQuery {
            from: None,
            to: None,
            max_len: MAX_PATH_LEN,
            pulses_from_scheme: false,
            max_paths: DEFAULT_LISTED_PATHS,
        }
    }
}

pub fn cmd_paths(path: &Path, q: &PathQuery) -> Outcome {
    let (from, to) = (q.from.as_deref(), q.to.as_deref());
    let s = match Scenario::load(path) {
        Ok(s) => s,
        Err(e) => return failure(e),
    };
    let start = match resolve(&s, from, (!s.basis.is_empty()).then(|| s.start()), "start") {
        Ok(k) => k,
        Err(o) => return o,
    };
    let target = match resolve(&s, to, s.target(), "target") {
        Ok(k) => k,
        Err(o) => return o,
    };
    let mut plan = s.plan();
    plan.prepared &= s.schedule.preparation.as_ref().is_some_and(|p| p.ket == start);
    if !q.pulses_from_scheme {
        plan = PulsePlan { injections: Vec::new(), ..plan };
    }
    let verdict = s.verdict(start, target, &plan);
    let mut set = enumerate_qpaths(&build_graph(&s.operator), &s.basis, start, target, &plan, q.max_len);
    set.paths.sort_by(|a, b| (a.len(), &a.kets).cmp(&(b.len(), &b.kets)));
    let found = set.paths.len();
    let listed = found.min(q.max_paths);
    Outcome::ok(to_json(&json!({
        "schema": 1,
        "from": verdict.from,
        "to": verdict.to,
        "injections": plan.injections.iter().map(|m| m.id.clone()).collect::<Vec<_>>(),
        "reachable": verdict.reachable,
        "witness": verdict.witness,
        "photon_budget": verdict.photon_budget,
        "routes": verdict.routes,
        "max_len": set.max_len,
        "truncated": set.truncated || listed < found,
        "path_count": found,
        "paths": set.paths[..listed].iter().map(|p| path_json(p, &s)).collect::<Vec<_>>(),
    })))
}

pub fn cmd_evolve(path: &Path, cfg: &EvolveConfig, out_dir: &Path, from: Option<&str>) -> Outcome {
    let s = match Scenario::load(path) {
        Ok(s) => s,
        Err(e) => return failure(e),
    };
    if s.basis.is_empty() {
        return Outcome::fail(1, "error: the scheme has an empty basis\n".into());
    }
    let start = match resolve(&s, from, Some(s.start()), "start") {
        Ok(k) => k,
        Err(o) => return o,
    };
    let mut schedule = s.schedule.clone();
    if schedule.preparation.as_ref().is_some_and(|p| p.ket != start) {
        schedule.preparation = None;
    }
    let c0 = StateVector::basis(s.basis.len(), start);
    let traj = match evolve(&c0, &s.operator, &s.basis, &schedule, &s.detectors, cfg) {
        Ok(t) => t,
        Err(e) => return Outcome::fail(1, format!("error: {e}\n")),
    };
    let files = vec!["trajectory.csv".to_string(), "report.json".to_string()];
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let report = ScenarioReport::new(&s, &name, cfg, &traj, files);
    let report_text = to_json(&report);
    let written = std::fs::create_dir_all(out_dir)
        .and_then(|_| std::fs::write(out_dir.join("trajectory.csv"), traj.to_csv()))
        .and_then(|_| std::fs::write(out_dir.join("report.json"), &report_text));
    if let Err(e) = written {
        return Outcome::fail(2, format!("error: cannot write to `{}`: {e}\n", out_dir.display()));
    }
    let mut out = format!(
        "{} kets, {} samples, {} events\n",
        s.basis.len(),
        traj.times.len(),
        traj.events.len()
    );
    for ev in traj.emissions() {
        let _ = write!(out, "emission at t={:.6} by {} from {}", ev.time, ev.detector, ev.ket_label);
        if let Some(fs) = s.scheme.unit.femtoseconds_per_time_unit() {
            let _ = write!(out, " ({:.3} fs)", ev.time * fs);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "wrote {}", out_dir.display());
    Outcome::ok(out)
}

pub fn cmd_dump(path: &Path) -> Outcome {
    match Scenario::load(path) {
        Ok(s) => {
            let dump = s.operator.to_dump();
            let labels: Vec<String> = s.basis.iter().map(|k| k.label()).collect();
            Outcome::ok(to_json(&json!({
                "schema": dump.schema,
                "dimension": dump.dimension,
                "gate": dump.gate,
                "labels": labels,
                "diagonal": dump.diagonal,
                "triplets": dump.triplets,
            })))
        }
        Err(e) => failure(e),
    }
}
