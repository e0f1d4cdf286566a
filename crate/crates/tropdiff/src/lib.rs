//! Exact arithmetic for differential forms on non-archimedean curves.
//!
//! The crate computes with truncated Puiseux series over the rationals and
//! builds four layers on top of them:
//!
//! * [`annulus`] — Laurent-series differential forms on oriented annuli:
//!   dominance analysis, residues, coordinate changes, and the
//!   successive-approximation normalization to binomial shape
//!   `(c_n t^n + c_0) dt/t` in a good coordinate.
//! * [`complex`] — metrized curve complexes with boundary, tropical
//!   reduction data, and a validator for their compatibility conditions
//!   (log-orders vs. slopes, graded residues, harmonicity, vanishing on
//!   negative-slope legs) plus the global residue condition.
//! * [`model`] — explicit glued analytic models `(X, ω)` with genus-0 star
//!   pieces, and tropicalization of a model back to a reduction datum.
//! * [`lifting`] — the constructive converse: lifting a validated genus-0
//!   datum to a glued model whose tropicalization is the input, via local
//!   lifts, exact residue correction and annulus gluing.
//! * [`torsor`] — good formal coordinates at a point, the group
//!   `G_n = 𝔾_m ⋉ₙ 𝔾_a` acting on them, and the edge-matching map between
//!   coordinate torsors on the two sides of an edge.
//!
//! All values are immutable and all operations are pure; every type is
//! `Send + Sync` and may be shared freely across threads.

pub mod annulus;
pub mod cli;
pub mod complex;
pub mod error;
pub mod fixtures;
pub mod formats;
pub mod lifting;
pub mod model;
pub mod poly;
pub mod puiseux;
pub mod rational;
pub mod report;
pub mod torsor;

pub use error::{Error, Result};
pub use puiseux::{GradedScalar, PuiseuxScalar, Valuation};
pub use rational::{Rational, Val};
