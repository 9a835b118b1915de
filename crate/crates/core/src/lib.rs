//! Eigenfunctions of one-dimensional Schrödinger operators `-u'' + V u = E u`
//! with piecewise-constant potentials, and numerical checks of the pointwise
//! and local L^p estimates relating `u'` to `u`.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod family;
pub mod harness;
pub mod potential;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod verifier;
pub mod weight;
pub mod window;

pub use constants::{constants_for, constants_with_floor, Energy, EstimateConstants};
pub use error::{Error, Result};
pub use family::{make_family, Family};
pub use potential::{PiecewisePotential, WindowIntegralProfile};
pub use solver::{
    propagate_exact, propagate_rk, solve_span, transfer_matrix, InitialData, Method, SolutionTrace, TransferMatrix,
};
pub use spectral::{
    prufer_decompose, prufer_residuals, simon_stolz_curve, NormKind, PruferResiduals, PruferTrace, SimonStolzCurve,
};
pub use verifier::{check_decay, CheckOutcome, Checker};
pub use weight::{WeightKind, WeightSpec};
