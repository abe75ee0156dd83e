//! Verification and exploration engine for ternary floor-quadratic forms
//! `⌊x²/a⌋ + ⌊y²/b⌋ + ⌊z²/c⌋`.
//!
//! The crate is organised around the chain of reductions that makes such
//! forms tractable:
//!
//! - [`arith`] — exact integer number theory (squarefree parts, p-adic
//!   orders, quadratic residue symbols).
//! - [`padic`] — local solubility of shifted quadratics over the p-adic
//!   integers, Hilbert symbols and anisotropy tests.
//! - [`form`] — the floor form itself: evaluation, representation search,
//!   counting and range scanning.
//! - [`coset`] — the bridge between floor-form representations and
//!   representations by a shifted lattice coset `L + v`.
//! - [`planner`] — the constructive residue selection that certifies, case
//!   by case, why a given `n` is representable, together with the
//!   verification of every claim a plan makes.
//! - [`theta`] — congruence theta coefficients of lattice cosets, unary
//!   theta coefficients, and the square-class obstruction sets that govern
//!   them.
//!
//! All arithmetic is exact; there is no floating point anywhere in the
//! crate.

pub mod arith;
pub mod coset;
mod error;
pub mod form;
pub mod padic;
pub mod planner;
pub mod theta;

pub use coset::{CosetConvention, CosetDescriptor, ResidueTriple};
pub use error::{Error, Result};
pub use form::{FloorForm, Representation, ScanReport};
pub use padic::{LocalProblem, LocalStatus, Place, SolveMethod};
pub use planner::{PlanVerification, ResiduePlan, Verdict};
pub use theta::{ObstructionEntry, ObstructionReport, PlannerMode, ThetaSeries};

/// Version string recorded in scan reports; scans cached under a different
/// version are recomputed.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
