//! Photon-dressed electronuclear states: basis construction, gated coupling
//! operators, exact coherent propagation with laboratory transfers, and
//! static q-path reachability.
//!
//! The usual flow is
//!
//! 1. [`scheme::parse_scheme`] and [`scheme::validate_scheme`] a level-scheme file,
//! 2. build the ordered basis with [`basis::scenario_basis`],
//! 3. [`operator::assemble`] `H` and `V`,
//! 4. either [`propagator::evolve`] a prepared state or ask
//!    [`pathways::reachable`] whether a target ket can ever be populated.
//!
//! [`scenario::Scenario`] bundles the steps. Runnable walkthroughs live in
//! `examples/`.

pub mod basis;
pub mod cli;
pub mod diag;
pub mod operator;
pub mod pathways;
pub mod propagator;
pub mod scenario;
pub mod scheme;
