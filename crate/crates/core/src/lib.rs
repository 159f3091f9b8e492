//! Numerical laboratory for the Martinet-type sub-Riemannian structure on ℝ³
//! spanned by `∂₁` and `∂₂ + P²∂₃` with `P = x₁² − x₂ᵇ`.
//!
//! The crate is organised bottom-up:
//!
//! - [`martinet`]: the structure itself, the reference curves `γ`/`γ̄`,
//!   lifts, projections, lengths and the holonomy constraint.
//! - [`flow`]: normal extremals in angle form and in Hamiltonian form,
//!   plus single-start shooting.
//! - [`geometry`]: winding numbers, weighted areas, the Radó bound,
//!   turning numbers, loop detection and loop statistics.
//! - [`levelset`]: the explicit sublevel-set minimizer and its length and
//!   asymptotic diagnostics.
//! - [`optimizer`]: discretized competitor minimization, shooting sweeps
//!   and the minimality report.
//! - [`verify`]: the invariant suites exposed by the `lab verify` command.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` rejects NaN on purpose

pub mod curve;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod levelset;
pub mod martinet;
pub mod optimizer;
pub mod quadrature;
pub mod roots;
pub mod verify;

pub use curve::{HorizontalCurve, PlanarCurve, PlanePoint, SpacePoint};
pub use error::{LabError, Result};
pub use martinet::StructureParams;
