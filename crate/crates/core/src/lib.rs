//! Estimation of the ruin-theoretic adjustment coefficient for stationary,
//! weakly dependent claim-surplus increments.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; file formats, the command line and parallel
//! drivers live in the `ruin-adjust` companion crate.
//!
//! Module map:
//!
//! - [`processes`]: seeded simulators (iid, AR(1), MA(1), nonlinear AR(1),
//!   finite-window Bernoulli shifts) and closed-form coefficients.
//! - [`empirical`]: block sums, empirical MGF / CGF curves, covariance decay.
//! - [`rootfind`]: existence conditions and the bracketing positive-root solver.
//! - [`adjust`]: the `ŵⁱ` and block `ŵ_r` estimators, plug-in variances and
//!   the block-length selection rule.
//! - [`ruin`]: Monte Carlo ruin frequencies and the log-linear tail fit.
//! - [`limits`]: approximate subadditivity diagnostics.
#![cfg_attr(not(test), no_std)]
// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod adjust;
pub mod empirical;
mod error;
pub mod limits;
pub mod processes;
pub mod rng;
pub mod rootfind;
pub mod ruin;

pub use adjust::{
    default_block_length, estimate_w_d, estimate_w_i, select_r, variance_plugin,
    AdjustmentEstimate, RSelection,
};
pub use empirical::{block_sums, cgf_curve, empirical_mgf, CgfCurve};
pub use error::{Error, Result};
pub use processes::{
    analytic_w_ar1, analytic_w_iid, analytic_w_ma1, analytic_w_r_ma1, simulate, InnovationSpec,
    ModelKind, ModelSpec, Sample, SampleOrigin, ShiftKernel,
};
pub use rootfind::{check_existence, solve_positive_root, ExistenceReport, RootResult};
pub use ruin::{lundberg_check, simulate_ruin, RuinConfig, RuinStudy};
