//! Empirical adjustment-coefficient estimators, the block-length selection
//! rule, and plug-in confidence intervals.
//!
//! `ŵ_r` is the positive root of `(1/r) log M̂(t)`, where `M̂` is the
//! empirical MGF of the non-overlapping block sums `Z_i^r`. The iid
//! estimator `ŵⁱ` is the special case `r = 1`.

use alloc::vec::Vec;

use crate::empirical::{autocovariances, block_sums, log_empirical_mgf, BlockConfig};
use crate::error::{Error, Result};
use crate::processes::{
    analytic_w_iid, analytic_w_r_ar1, analytic_w_r_ma1, simulate, ModelKind, ModelSpec, Sample,
};
use crate::rootfind::{check_existence, solve_positive_root, ExistenceReport};

/// Normal quantile for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustmentEstimate {
    pub w_hat: f64,
    pub r: usize,
    pub k_effective: usize,
    pub k_blocks: usize,
    /// Long-run variance of `exp(w_hat Z)`.
    pub gamma2: f64,
    /// Mean of `Z exp(w_hat Z)`.
    pub denom: f64,
    pub ci95: (f64, f64),
    pub existence: ExistenceReport,
    /// `(1/r) log M̂(w_hat)`.
    pub residual: f64,
    pub solver_iterations: usize,
    /// The interval relies on a fixed-r normal approximation (`r > 1`).
    pub heuristic_ci: bool,
}

impl AdjustmentEstimate {
    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.ci95.1 - self.ci95.0)
    }

    pub fn covers(&self, w: f64) -> bool {
        self.ci95.0 <= w && w <= self.ci95.1
    }
}

/// `ŵⁱ`: identical to [`estimate_w_d`] with `r = 1`.
pub fn estimate_w_i(sample: &Sample) -> Result<AdjustmentEstimate> {
    estimate_w_d(sample, 1)
}

/// Probe range for an empirical objective. At `t = hint` the largest block
/// term alone forces `log M̂(t) >= t max(z) - ln k > 0`.
fn empirical_hint(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_k = libm::log(z.len() as f64);
    2.0 * ln_k.max(1.0) / max
}

pub fn estimate_w_d(sample: &Sample, r: usize) -> Result<AdjustmentEstimate> {
    let cfg = BlockConfig::new(sample.len(), r)?;
    let z = block_sums(sample.values(), r)?;
    let existence = check_existence(&z);
    if !existence.verdict {
        return Err(Error::Existence(existence));
    }
    let inv_r = 1.0 / r as f64;
    let objective = |t: f64| log_empirical_mgf(&z, t).map_or(f64::NAN, |v| v * inv_r);
    let res = solve_positive_root(objective, empirical_hint(&z))?;
    let w = res.root;
    let (gamma2, denom) = variance_plugin(&z, w)?;
    let half = Z95 * libm::sqrt(gamma2) / (denom * libm::sqrt(cfg.k_blocks as f64));
    Ok(AdjustmentEstimate {
        w_hat: w,
        r,
        k_effective: cfg.k_effective(),
        k_blocks: cfg.k_blocks,
        gamma2,
        denom,
        ci95: (w - half, w + half),
        existence,
        residual: res.residual,
        solver_iterations: res.iterations,
        heuristic_ci: r > 1,
    })
}

/// Default Bartlett truncation lag `floor(k^{1/3})`.
pub fn bartlett_lag(k: usize) -> usize {
    let mut l = libm::cbrt(k as f64) as usize;
    while (l + 1).pow(3) <= k {
        l += 1;
    }
    while l > 0 && l.pow(3) > k {
        l -= 1;
    }
    l
}

/// `(gamma2, denom)` at `t` with the default lag [`bartlett_lag`].
pub fn variance_plugin(z: &[f64], t: f64) -> Result<(f64, f64)> {
    variance_plugin_with_lag(z, t, bartlett_lag(z.len()))
}

/// Bartlett-windowed long-run variance of `exp(t z_i)` with truncation lag
/// `lag`, and the mean of `z_i exp(t z_i)`.
pub fn variance_plugin_with_lag(z: &[f64], t: f64, lag: usize) -> Result<(f64, f64)> {
    if z.is_empty() {
        return Err(Error::InvalidParameter("empty series".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "need t > 0, got {t}"
        )));
    }
    let e: Vec<f64> = z.iter().map(|&x| libm::exp(t * x)).collect();
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::Unbounded { t });
    }
    let denom = z.iter().zip(&e).map(|(x, v)| x * v).sum::<f64>() / z.len() as f64;
    let cov = autocovariances(&e, lag);
    let l1 = (lag + 1) as f64;
    let gamma2 = cov[0]
        + 2.0
            * cov
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| (1.0 - j as f64 / l1) * c)
                .sum::<f64>();
    Ok((gamma2.max(0.0), denom))
}

/// `min(6, floor(0.75 ln k))`, at least 1.
pub fn default_block_length(k: usize) -> usize {
    let r = (0.75 * libm::log(k.max(1) as f64)) as usize;
    r.clamp(1, 6)
}

/// Maximal stretch of the `ŵ_r` trace that is monotone under the slack rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonotoneRun {
    pub start_r: usize,
    pub end_r: usize,
    /// `-1` decreasing, `1` increasing, `0` flat within slack.
    pub direction: i8,
}

/// Split a trace (index 0 is `r = 1`) into monotone runs.
///
/// A run continues while each consecutive difference either lies within
/// `slack` or agrees in sign with the first difference larger than `slack`.
/// A missing value ends the run before it; the next run starts after it.
pub fn monotone_runs(trace: &[Option<f64>], slack: f64) -> Vec<MonotoneRun> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < trace.len() {
        if trace[i].is_none() {
            i += 1;
            continue;
        }
        let start = i;
        let mut dir: i8 = 0;
        let mut end = i;
        while end + 1 < trace.len() {
            let (Some(a), Some(b)) = (trace[end], trace[end + 1]) else {
                break;
            };
            let d = b - a;
            let step: i8 = if d > slack {
                1
            } else if d < -slack {
                -1
            } else {
                0
            };
            if step != 0 && dir != 0 && step != dir {
                break;
            }
            if dir == 0 {
                dir = step;
            }
            end += 1;
        }
        runs.push(MonotoneRun {
            start_r: start + 1,
            end_r: end + 1,
            direction: dir,
        });
        // A reversal shares its turning point with the next run.
        i = if end + 1 < trace.len() && trace[end + 1].is_some() && end > start {
            end
        } else {
            end + 1
        };
    }
    runs
}

/// Length of the leading monotone run, i.e. the selected block length.
pub fn monotone_prefix(trace: &[Option<f64>], slack: f64) -> usize {
    match monotone_runs(trace, slack).first() {
        Some(run) if run.start_r == 1 => run.end_r,
        _ => 1,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct REntry {
    pub r: usize,
    pub estimate: core::result::Result<AdjustmentEstimate, Error>,
}

impl REntry {
    pub fn w_hat(&self) -> Option<f64> {
        self.estimate.as_ref().ok().map(|e| e.w_hat)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RSelection {
    pub r_grid: Vec<usize>,
    pub w_by_r: Vec<REntry>,
    pub chosen_r: usize,
    pub slack: f64,
    pub rule_trace: Vec<MonotoneRun>,
    /// Set when the rule could not move past `r = 1`.
    pub warning: bool,
}

impl RSelection {
    pub fn chosen(&self) -> &AdjustmentEstimate {
        self.w_by_r[self.chosen_r - 1]
            .estimate
            .as_ref()
            .expect("chosen r always has an estimate")
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Estimate `ŵ_r` for `r = 1..=r_max` and pick the end of the leading
/// monotone run, with slack `0.25 ×` the median CI half-width.
pub fn select_r(sample: &Sample, r_max: usize) -> Result<RSelection> {
    if r_max < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "r_max must be >= 2, got {r_max}"
        )));
    }
    BlockConfig::new(sample.len(), r_max)?;
    let w_by_r: Vec<REntry> = (1..=r_max)
        .map(|r| REntry {
            r,
            estimate: estimate_w_d(sample, r),
        })
        .collect();
    if let Err(e) = &w_by_r[0].estimate {
        return Err(e.clone());
    }
    let halves: Vec<f64> = w_by_r
        .iter()
        .filter_map(|e| {
            e.estimate
                .as_ref()
                .ok()
                .map(AdjustmentEstimate::ci_half_width)
        })
        .collect();
    let slack = 0.25 * median(halves);
    Ok(select_from_entries(w_by_r, slack))
}

fn select_from_entries(w_by_r: Vec<REntry>, slack: f64) -> RSelection {
    let trace: Vec<Option<f64>> = w_by_r.iter().map(REntry::w_hat).collect();
    let rule_trace = monotone_runs(&trace, slack);
    let chosen_r = monotone_prefix(&trace, slack);
    RSelection {
        r_grid: w_by_r.iter().map(|e| e.r).collect(),
        w_by_r,
        chosen_r,
        slack,
        rule_trace,
        warning: chosen_r == 1,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub r: usize,
    pub w_hat: core::result::Result<f64, Error>,
    /// Closed-form `w_r` where the model admits one.
    pub analytic: Option<f64>,
}

/// Closed-form `w_r` for IID, MA(1) and AR(1) models.
pub fn analytic_w_r(spec: &ModelSpec, r: usize) -> Option<f64> {
    match spec.kind {
        ModelKind::Iid => analytic_w_iid(&spec.innovation).ok(),
        ModelKind::Ma1 => analytic_w_r_ma1(&spec.innovation, spec.a, r).ok(),
        ModelKind::Ar1 => analytic_w_r_ar1(&spec.innovation, spec.a, r).ok(),
        _ => None,
    }
}

/// One simulated sample, block estimates over `r_grid`, and the closed-form
/// overlay.
pub fn convergence_study(
    spec: &ModelSpec,
    n: usize,
    r_grid: &[usize],
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    let sample = simulate(spec, n, seed)?;
    Ok(r_grid
        .iter()
        .map(|&r| ConvergenceRow {
            r,
            w_hat: estimate_w_d(&sample, r).map(|e| e.w_hat),
            analytic: analytic_w_r(spec, r),
        })
        .collect())
}
