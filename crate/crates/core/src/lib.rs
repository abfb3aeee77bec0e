//! Global stability machinery for scalar delay differential equations
//! `x'(t) = f(t, x_t)` under negative feedback.
//!
//! The crate is organised around the generalized Yorke sandwich
//! `r(M(φ)) ≤ f(t, φ) ≤ r(−M(−φ))` with the rational envelope
//! `r(x) = ax/(1 + bx)`:
//!
//! * [`bounds`] evaluates `r` and the auxiliary bound functions `A`, `B`,
//!   `D`, `R` together with the composed maps used to bound the limit
//!   superior and inferior of oscillating solutions.
//! * [`calculus`] covers scalar nonlinearities: Schwarz derivative,
//!   rational-envelope fitting and grid checks of the envelope and of the
//!   sign/critical-point/Schwarzian conditions.
//! * [`criterion`] turns envelope parameters into stability verdicts,
//!   samples the functional sandwich, and runs the m–M iteration.
//! * [`integrator`] is a fixed-step method-of-steps RK4 integrator with
//!   cubic Hermite dense output.
//! * [`models`] is the catalog of model families (Wright, linear variable
//!   delay, logistic, food-limited, equations with maxima) and the
//!   logarithmic change of variables to canonical form.
//! * [`cli`] drives checks, simulations, sweeps and bound tables and backs
//!   the `dde-stability` binary.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod calculus;
pub mod cli;
pub mod criterion;
mod error;
pub mod integrator;
pub mod models;
pub mod numeric;

pub use bounds::{BoundTable, RationalBound};
pub use calculus::{ConditionId, ConditionReport, SmoothScalarMap};
pub use criterion::{StabilityVerdict, Status, Theorem};
pub use error::{Error, Result};
pub use integrator::{integrate, HistoryView, Prehistory, Trajectory};
pub use models::Model;
