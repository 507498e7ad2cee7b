//! Decision procedures for the cut-off and bounded-loss cut-off problems of
//! rendez-vous protocols and Petri net systems.
//!
//! The cut-off problem asks whether there is a bound `B` such that for every
//! `n >= B`, the marking `n*M'` is reachable from `n*M`. For nets derived from
//! rendez-vous protocols this means: `n` agents starting in the initial state
//! can all reach the final state. The deciders here reduce these questions to
//! continuous (rational) reachability plus exact linear algebra over Q, Z and
//! GF(2), and every answer carries machine-checkable certificates that are
//! re-verified against independent brute-force oracles in the test suites.
//!
//! Module map:
//!
//! * [`model`] - protocols, Petri nets, markings, translations, text formats.
//! * [`exact`] - exact rational LP with Farkas certificates, integer linear
//!   systems via Hermite-style elimination, GF(2) systems, branch-and-bound
//!   integer feasibility.
//! * [`continuous`] - continuous Petri net semantics: maximal fireable sets,
//!   maximum-support solutions, continuous reachability and coverability.
//! * [`analysis`] - the cut-off deciders, explicit cut-off bounds and
//!   constructive witness runs.
//! * [`symmetric`] - specialized algorithms for symmetric protocols, with and
//!   without a leader.
//! * [`oracle`] - explicit-state BFS ground truth and run-length-encoded run
//!   validation.
//! * [`generators`] - instance generators: circuit-value and 3-SAT reductions,
//!   random instances, and the built-in catalog.

pub mod analysis;
pub mod continuous;
pub mod exact;
pub mod generators;
pub mod model;
pub mod oracle;
pub mod par;
pub mod symmetric;
