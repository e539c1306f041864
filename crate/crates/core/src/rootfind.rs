//! Existence gating and positive-root extraction for convex log-MGF equations.
//!
//! Every objective handled here is convex on its domain with value 0 at
//! `t = 0`. Such a function has at most one positive zero; it exists when
//! the function dips below zero and later turns positive. The solver first
//! locates the dip with logarithmically spaced probes, then expands upward
//! until the sign changes, then bisects.

use crate::empirical::exact_sum;
use crate::error::{Error, Result};

/// Why the abscissa-of-convergence condition is satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbscissaNote {
    /// Empirical moments are finite sums, so the abscissa is infinite.
    FiniteSumInfiniteA,
    /// Closed-form MGF; the condition was checked analytically.
    AnalyticA,
}

impl AbscissaNote {
    pub fn as_str(self) -> &'static str {
        match self {
            AbscissaNote::FiniteSumInfiniteA => "FINITE_SUM_INFINITE_A",
            AbscissaNote::AnalyticA => "ANALYTIC_A",
        }
    }
}

/// Outcome of the existence conditions for the adjustment coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExistenceReport {
    pub mean_negative: bool,
    pub has_positive: bool,
    pub abscissa_note: AbscissaNote,
    pub verdict: bool,
}

impl ExistenceReport {
    /// Report for a closed-form model; `abscissa_ok` is the third condition
    /// (either the abscissa is infinite or the MGF reaches 1 before it).
    pub fn analytic(mean_negative: bool, has_positive: bool, abscissa_ok: bool) -> Self {
        ExistenceReport {
            mean_negative,
            has_positive,
            abscissa_note: AbscissaNote::AnalyticA,
            verdict: mean_negative && has_positive && abscissa_ok,
        }
    }
}

/// Empirical existence check: negative sample mean and at least one
/// positive observation.
///
/// The mean's sign comes from a correctly rounded sum, so the verdict does
/// not depend on the order of `values`.
pub fn check_existence(values: &[f64]) -> ExistenceReport {
    let mean_negative = !values.is_empty() && exact_sum(values) < 0.0;
    let has_positive = values.iter().any(|&x| x > 0.0);
    ExistenceReport {
        mean_negative,
        has_positive,
        abscissa_note: AbscissaNote::FiniteSumInfiniteA,
        verdict: mean_negative && has_positive,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: f64,
    /// Objective evaluated at `root`.
    pub residual: f64,
    /// Final enclosing interval `(lo, hi)` with `f(lo) < 0 <= f(hi)`.
    pub bracket: (f64, f64),
    /// Bisection steps taken.
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Absolute bracket width target on `t`.
    pub abs_tol: f64,
    /// Relative bracket width target, so that roots of rescaled objectives
    /// agree to well below the absolute tolerance.
    pub rel_tol: f64,
    /// Number of logarithmically spaced probes used to find the dip.
    pub probes: usize,
    /// Smallest probe as a fraction of the upper hint.
    pub probe_span: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            abs_tol: 1e-9,
            rel_tol: 1e-12,
            probes: 64,
            probe_span: 1e-6,
            max_iterations: 400,
        }
    }
}

/// Positive root of a convex objective with `objective(0) = 0`, using the
/// default [`SolverOptions`].
///
/// `upper_hint` sets the probe range `[upper_hint * 1e-6, upper_hint]`.
/// The objective may return `+inf` beyond its domain; `NaN` is treated as
/// the end of the searchable domain.
pub fn solve_positive_root<F>(objective: F, upper_hint: f64) -> Result<RootResult>
where
    F: Fn(f64) -> f64,
{
    solve_positive_root_with(objective, upper_hint, &SolverOptions::default())
}

pub fn solve_positive_root_with<F>(
    objective: F,
    upper_hint: f64,
    opts: &SolverOptions,
) -> Result<RootResult>
where
    F: Fn(f64) -> f64,
{
    if !(upper_hint.is_finite() && upper_hint > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "upper_hint must be positive and finite, got {upper_hint}"
        )));
    }
    let probes = opts.probes.max(2);
    let log_span = libm::log(opts.probe_span);

    // Ascending probe scan: remember the last negative value before the
    // first non-negative one.
    let mut last_negative: Option<f64> = None;
    let mut first_nonneg: Option<f64> = None;
    let mut hit_boundary = false;
    for j in 0..probes {
        let frac = (probes - 1 - j) as f64 / (probes - 1) as f64;
        let t = upper_hint * libm::exp(log_span * frac);
        let v = objective(t);
        if v.is_nan() {
            hit_boundary = true;
            break;
        }
        if v < 0.0 {
            last_negative = Some(t);
        } else {
            first_nonneg = Some(t);
            break;
        }
    }

    let (lo, hi) = match (last_negative, first_nonneg) {
        (Some(lo), Some(hi)) => (lo, hi),
        (None, Some(smallest)) => {
            // The dip, if any, sits below the smallest probe.
            let mut hi = smallest;
            let mut t = smallest;
            loop {
                t *= 0.5;
                if t <= f64::MIN_POSITIVE {
                    return Err(Error::NoNegativeDip {
                        searched_to: upper_hint,
                    });
                }
                let v = objective(t);
                if v < 0.0 {
                    break (t, hi);
                }
                hi = t;
            }
        }
        (Some(lo), None) => {
            if hit_boundary {
                return Err(Error::NoSignChange { searched_to: lo });
            }
            let mut lo = lo;
            let mut t = lo;
            loop {
                t *= 2.0;
                if !t.is_finite() {
                    return Err(Error::NoSignChange { searched_to: lo });
                }
                let v = objective(t);
                if v.is_nan() {
                    return Err(Error::NoSignChange { searched_to: lo });
                }
                if v >= 0.0 {
                    break (lo, t);
                }
                lo = t;
            }
        }
        (None, None) => {
            return Err(Error::NoNegativeDip {
                searched_to: upper_hint,
            })
        }
    };

    bisect(&objective, lo, hi, opts)
}

fn bisect<F>(objective: &F, mut lo: f64, mut hi: f64, opts: &SolverOptions) -> Result<RootResult>
where
    F: Fn(f64) -> f64,
{
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let width = hi - lo;
        if width <= opts.abs_tol && width <= opts.rel_tol * hi {
            break;
        }
        let mid = lo + 0.5 * width;
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if objective(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = lo + 0.5 * (hi - lo);
    let f_mid = objective(mid);
    // At float resolution next to a pole the midpoint can land on +inf.
    let (root, residual) = if f_mid.is_finite() {
        (mid, f_mid)
    } else {
        (lo, objective(lo))
    };
    Ok(RootResult {
        root,
        residual,
        bracket: (lo, hi),
        iterations,
    })
}
