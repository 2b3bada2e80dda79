//! Static reachability over the coupling graph.
//!
//! Nodes are basis indices and edges are the nonzero off-diagonal entries of
//! `V`. Pulses are not edges: an injection relabels the whole frontier onto
//! photon-added partners and opens the next layer of the search, exactly as
//! [`crate::propagator::inject_pulse`] does to the amplitude vector.

use std::collections::VecDeque;

use serde::Serialize;

use crate::basis::BasisSet;
use crate::operator::{EdgeKind, OperatorPair};
use crate::propagator::Schedule;
use crate::scheme::{PhotonMode, Scheme, Spin, Term};

/// Largest `max_len` accepted by [`enumerate_qpaths`].
pub const MAX_PATH_LEN: usize = 12;
/// Enumeration stops after this many paths and flags the result truncated.
pub const MAX_PATHS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingGraph {
    dim: usize,
    edges: Vec<GraphEdge>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl CouplingGraph {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// `(neighbor, edge index)` pairs of node `k`, neighbors ascending.
    pub fn neighbors(&self, k: usize) -> &[(usize, usize)] {
        &self.adjacency[k]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&GraphEdge> {
        self.adjacency[a].iter().find(|(n, _)| *n == b).map(|(_, e)| &self.edges[*e])
    }
}

/// Mirrors the sparsity pattern of `V`.
pub fn build_graph(op: &OperatorPair) -> CouplingGraph {
    let dim = op.dim();
    let mut edges = Vec::new();
    let mut adjacency = vec![Vec::new(); dim];
    for e in op.entries() {
        if e.value.norm() == 0.0 {
            continue;
        }
        let id = edges.len();
        edges.push(GraphEdge { a: e.row, b: e.col, kind: e.kind });
        adjacency[e.row].push((e.col, id));
        adjacency[e.col].push((e.row, id));
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    CouplingGraph { dim, edges, adjacency }
}

/// Photon-number bookkeeping for a search: whether the start ket came from a
/// laboratory preparation, and the ordered injection pulses that follow.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PulsePlan {
    pub prepared: bool,
    pub injections: Vec<PhotonMode>,
}

impl PulsePlan {
    pub fn from_schedule(s: &Schedule) -> Self {
        PulsePlan {
            prepared: s.preparation.is_some(),
            injections: s.injections.iter().map(|i| i.mode.clone()).collect(),
        }
    }

    pub fn from_scheme(s: &Scheme) -> Self {
        PulsePlan {
            prepared: s.preparation().is_some(),
            injections: s.injections().filter_map(|p| s.mode(&p.mode).cloned()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "mode", rename_all = "kebab-case")]
pub enum StepKind {
    Dipole,
    SpinOrbit,
    Transfer,
    Injection(String),
}

impl From<EdgeKind> for StepKind {
    fn from(k: EdgeKind) -> Self {
        match k {
            EdgeKind::Dipole => StepKind::Dipole,
            EdgeKind::SpinOrbit => StepKind::SpinOrbit,
            EdgeKind::Transfer => StepKind::Transfer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathStep {
    pub from: usize,
    pub to: usize,
    pub kind: StepKind,
    /// Change of `Lambda` from `from` to `to`.
    pub d_lambda: i32,
    /// Change of spin multiplicity.
    pub d_spin: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QPath {
    pub kets: Vec<usize>,
    pub steps: Vec<PathStep>,
    pub prepared: bool,
}

impl QPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn injections(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s.kind, StepKind::Injection(_))).count()
    }

    /// Matter levels visited, with consecutive repeats collapsed.
    pub fn matter_trace(&self, b: &BasisSet) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for &k in &self.kets {
            let id = b.kets()[k].matter.id();
            if out.last() != Some(&id) {
                out.push(id);
            }
        }
        out
    }

    /// Kets written with their labels, `a -> b -> ...`.
    pub fn describe(&self, b: &BasisSet) -> String {
        self.kets.iter().map(|&k| b.kets()[k].label()).collect::<Vec<_>>().join(" -> ")
    }
}

/// Quanta the path needs from the laboratory: its injections, plus the
/// preparation quantum when the path starts from a prepared ket.
pub fn photon_budget(p: &QPath) -> usize {
    p.injections() + usize::from(p.prepared)
}

fn make_step(b: &BasisSet, from: usize, to: usize, kind: StepKind) -> PathStep {
    let (x, y) = (&b.kets()[from].matter, &b.kets()[to].matter);
    PathStep {
        from,
        to,
        kind,
        d_lambda: y.term.lambda() - x.term.lambda(),
        d_spin: y.spin.multiplicity() - x.spin.multiplicity(),
    }
}

/// Nodes of the layered search: a ket and the number of pulses already applied.
type Node = (usize, usize);

fn successors(g: &CouplingGraph, b: &BasisSet, plan: &PulsePlan, (k, layer): Node) -> Vec<(Node, StepKind)> {
    let mut out: Vec<(Node, StepKind)> =
        g.neighbors(k).iter().map(|&(n, e)| ((n, layer), g.edges[e].kind.into())).collect();
    if let Some(mode) = plan.injections.get(layer) {
        if let Some(p) = b.partner(k, mode) {
            out.push(((p, layer + 1), StepKind::Injection(mode.id.clone())));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reachability {
    pub reachable: bool,
    pub witness: Option<QPath>,
}

/// Whether `target` can ever carry amplitude when the run starts on `start`.
/// The witness has the fewest steps among all q-paths.
pub fn reachable(g: &CouplingGraph, b: &BasisSet, start: usize, target: usize, plan: &PulsePlan) -> Reachability {
    let layers = plan.injections.len() + 1;
    let idx = |(k, l): Node| l * g.dim + k;
    let mut parent: Vec<Option<(Node, StepKind)>> = vec![None; g.dim * layers];
    let mut seen = vec![false; g.dim * layers];
    let mut queue = VecDeque::new();
    seen[idx((start, 0))] = true;
    queue.push_back((start, 0));
    while let Some(node) = queue.pop_front() {
        if node.0 == target {
            let mut kets = vec![node.0];
            let mut steps = Vec::new();
            let mut cur = node;
            while let Some((prev, kind)) = parent[idx(cur)].clone() {
                steps.push(make_step(b, prev.0, cur.0, kind));
                kets.push(prev.0);
                cur = prev;
            }
            kets.reverse();
            steps.reverse();
            return Reachability {
                reachable: true,
                witness: Some(QPath { kets, steps, prepared: plan.prepared }),
            };
        }
        for (next, kind) in successors(g, b, plan, node) {
            if !seen[idx(next)] {
                seen[idx(next)] = true;
                parent[idx(next)] = Some((node, kind));
                queue.push_back(next);
            }
        }
    }
    Reachability { reachable: false, witness: None }
}

/// Every ket that can carry amplitude at some point of the run.
pub fn reachable_set(g: &CouplingGraph, b: &BasisSet, start: usize, plan: &PulsePlan) -> Vec<bool> {
    let layers = plan.injections.len() + 1;
    let mut seen = vec![false; g.dim * layers];
    let mut out = vec![false; g.dim];
    let mut queue = VecDeque::from([(start, 0)]);
    seen[start] = true;
    while let Some(node) = queue.pop_front() {
        out[node.0] = true;
        for (next, _) in successors(g, b, plan, node) {
            let i = next.1 * g.dim + next.0;
            if !seen[i] {
                seen[i] = true;
                queue.push_back(next);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QPathSet {
    pub paths: Vec<QPath>,
    pub max_len: usize,
    pub truncated: bool,
}

/// All simple q-paths from `start` to `target` with at most `max_len` steps.
///
/// A path ends on its first arrival at `target`, and never visits the same
/// (ket, layer) node twice. `max_len` above [`MAX_PATH_LEN`] is clamped and
/// the result flagged truncated, as is a result cut at [`MAX_PATHS`].
pub fn enumerate_qpaths(
    g: &CouplingGraph,
    b: &BasisSet,
    start: usize,
    target: usize,
    plan: &PulsePlan,
    max_len: usize,
) -> QPathSet {
    let mut truncated = max_len > MAX_PATH_LEN;
    let max_len = max_len.min(MAX_PATH_LEN);
    let layers = plan.injections.len() + 1;
    let mut on_path = vec![false; g.dim * layers];
    let mut paths = Vec::new();
    let mut nodes = vec![(start, 0)];
    let mut steps: Vec<PathStep> = Vec::new();
    on_path[start] = true;

    struct Walk<'a> {
        g: &'a CouplingGraph,
        b: &'a BasisSet,
        plan: &'a PulsePlan,
        target: usize,
        max_len: usize,
    }

    fn dfs(
        w: &Walk<'_>,
        nodes: &mut Vec<Node>,
        steps: &mut Vec<PathStep>,
        on_path: &mut [bool],
        paths: &mut Vec<QPath>,
        truncated: &mut bool,
    ) {
        let node = *nodes.last().expect("path is never empty");
        if node.0 == w.target {
            paths.push(QPath {
                kets: nodes.iter().map(|n| n.0).collect(),
                steps: steps.clone(),
                prepared: w.plan.prepared,
            });
            if paths.len() >= MAX_PATHS {
                *truncated = true;
            }
            return;
        }
        if steps.len() == w.max_len {
            return;
        }
        for (next, kind) in successors(w.g, w.b, w.plan, node) {
            if *truncated && paths.len() >= MAX_PATHS {
                return;
            }
            let i = next.1 * w.g.dim + next.0;
            if on_path[i] {
                continue;
            }
            on_path[i] = true;
            steps.push(make_step(w.b, node.0, next.0, kind));
            nodes.push(next);
            dfs(w, nodes, steps, on_path, paths, truncated);
            nodes.pop();
            steps.pop();
            on_path[i] = false;
        }
    }

    let walk = Walk { g, b, plan, target, max_len };
    dfs(&walk, &mut nodes, &mut steps, &mut on_path, &mut paths, &mut truncated);
    QPathSet { paths, max_len, truncated }
}

/// The two isomerization route shapes of the sequential two-photon process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteFamily {
    /// `1Sigma -> 1Pi -> 3Delta` in the start family, then `1Pi -> 1Sigma` in the other.
    SameFamilyTriplet,
    /// `1Pi` in the start family, then `3Delta -> 1Pi -> 1Sigma` in the other.
    CrossFamilyTriplet,
}

type Shape = (bool, Term, Spin);

const SAME_FAMILY_TRIPLET: [Shape; 5] = [
    (false, Term::Sigma, Spin::Singlet),
    (false, Term::Pi, Spin::Singlet),
    (false, Term::Delta, Spin::Triplet),
    (true, Term::Pi, Spin::Singlet),
    (true, Term::Sigma, Spin::Singlet),
];

const CROSS_FAMILY_TRIPLET: [Shape; 4] = [
    (false, Term::Pi, Spin::Singlet),
    (true, Term::Delta, Spin::Triplet),
    (true, Term::Pi, Spin::Singlet),
    (true, Term::Sigma, Spin::Singlet),
];

/// Route families realized by the path's matter trace, as contiguous runs,
/// with "other family" meaning any family other than the start ket's.
pub fn route_families(p: &QPath, b: &BasisSet) -> Vec<RouteFamily> {
    let Some(&first) = p.kets.first() else {
        return Vec::new();
    };
    let home = b.kets()[first].matter.family.clone();
    let mut trace: Vec<Shape> = Vec::new();
    let mut last: Option<String> = None;
    for &k in &p.kets {
        let m = &b.kets()[k].matter;
        if last.as_deref() == Some(m.id().as_str()) {
            continue;
        }
        last = Some(m.id());
        trace.push((m.family != home, m.term, m.spin));
    }
    let mut out = Vec::new();
    if trace.windows(5).any(|w| w == SAME_FAMILY_TRIPLET) {
        out.push(RouteFamily::SameFamilyTriplet);
    }
    if trace.windows(4).any(|w| w == CROSS_FAMILY_TRIPLET) {
        out.push(RouteFamily::CrossFamilyTriplet);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisKet;
    use crate::diag::Span;
    use crate::operator::CouplingEntry;
    use crate::scheme::LevelLabel;
    use num_complex::Complex64;

    fn level(name: &str, term: Term, spin: Spin, e: f64) -> LevelLabel {
        LevelLabel { family: "Z".into(), name: name.into(), j: 0, g: 0, term, spin, energy: e, span: Span::default() }
    }

    fn chain(n: usize) -> (BasisSet, OperatorPair) {
        let kets: Vec<_> = (0..n)
            .map(|i| BasisKet::direct(&level(&format!("L{i}"), Term::Pi, Spin::Singlet, 0.0), []))
            .collect();
        let entries = (1..n).map(|i| CouplingEntry {
            row: i - 1,
            col: i,
            value: Complex64::new(0.1, 0.0),
            kind: EdgeKind::SpinOrbit,
        });
        (BasisSet::from_kets(kets), OperatorPair::from_parts(vec![0.0; n], entries, 1e-6))
    }

    #[test]
    fn zero_coupling_gives_edgeless_graph() {
        let op = OperatorPair::from_parts(vec![0.0; 3], [], 1e-6);
        assert!(build_graph(&op).edges().is_empty());
    }

    #[test]
    fn start_equals_target_is_trivially_reachable() {
        let (b, op) = chain(3);
        let g = build_graph(&op);
        let r = reachable(&g, &b, 1, 1, &PulsePlan::default());
        assert!(r.reachable);
        assert!(r.witness.unwrap().is_empty());
    }

    #[test]
    fn two_level_graph_has_one_path() {
        let (b, op) = chain(2);
        let g = build_graph(&op);
        let set = enumerate_qpaths(&g, &b, 0, 1, &PulsePlan::default(), 12);
        assert_eq!(set.paths.len(), 1);
        assert_eq!(set.paths[0].len(), 1);
        assert!(!set.truncated);
    }

    #[test]
    fn witness_is_shortest() {
        let (b, op) = chain(5);
        let g = build_graph(&op);
        let w = reachable(&g, &b, 0, 4, &PulsePlan::default()).witness.unwrap();
        assert_eq!(w.kets, vec![0, 1, 2, 3, 4]);
        assert_eq!(photon_budget(&w), 0);
    }

    #[test]
    fn over_long_bound_is_clamped_and_flagged() {
        let (b, op) = chain(3);
        let g = build_graph(&op);
        let set = enumerate_qpaths(&g, &b, 0, 2, &PulsePlan::default(), 40);
        assert!(set.truncated);
        assert_eq!(set.max_len, MAX_PATH_LEN);
        assert_eq!(set.paths.len(), 1);
    }

    #[test]
    fn disconnected_target_unreachable() {
        let op = OperatorPair::from_parts(vec![0.0; 2], [], 1e-6);
        let (b, _) = chain(2);
        let g = build_graph(&op);
        assert!(!reachable(&g, &b, 0, 1, &PulsePlan::default()).reachable);
        assert!(enumerate_qpaths(&g, &b, 0, 1, &PulsePlan::default(), 12).paths.is_empty());
    }
}
