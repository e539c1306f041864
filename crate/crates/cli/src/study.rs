//! Parallel drivers: Monte Carlo replication studies and chunked ruin
//! simulation. Work items are independent and seeded by index, so results do
//! not depend on the number of worker threads.

use rayon::prelude::*;
use ruin_adjust_core::adjust::analytic_w_r;
use ruin_adjust_core::rng::derive_seed;
use ruin_adjust_core::ruin::{tally_paths, RuinTally};
use ruin_adjust_core::{
    analytic_w_ar1, analytic_w_iid, analytic_w_ma1, estimate_w_d, select_r, simulate,
    Error as CoreError, ModelKind, ModelSpec, RuinConfig, RuinStudy,
};
use serde::Serialize;

/// Replication counts below this get the `wide_ci` flag.
pub const MIN_NARROW_REPS: usize = 30;
pub const DEFAULT_R_MAX: usize = 35;
const Z95: f64 = 1.959963984540054;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RMode {
    Fixed(usize),
    Auto { r_max: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReplicateOk {
    pub r: usize,
    pub w_hat: f64,
    pub ci95: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateOutcome {
    pub index: usize,
    pub seed: u64,
    pub result: Result<ReplicateOk, CoreError>,
}

fn replicate(spec: &ModelSpec, n: usize, mode: RMode, index: usize, seed: u64) -> ReplicateOutcome {
    let result = simulate(spec, n, seed).and_then(|s| {
        let est = match mode {
            RMode::Fixed(r) => estimate_w_d(&s, r)?,
            RMode::Auto { r_max } => select_r(&s, r_max)?.chosen().clone(),
        };
        Ok(ReplicateOk {
            r: est.r,
            w_hat: est.w_hat,
            ci95: est.ci95,
        })
    });
    ReplicateOutcome {
        index,
        seed,
        result,
    }
}

/// Replicate `i` simulates with `derive_seed(master_seed, i)`.
pub fn run_mc_study(
    spec: &ModelSpec,
    n: usize,
    reps: usize,
    mode: RMode,
    master_seed: u64,
) -> Vec<ReplicateOutcome> {
    (0..reps)
        .into_par_iter()
        .map(|i| replicate(spec, n, mode, i, derive_seed(master_seed, i as u64)))
        .collect()
}

/// Population `w^d` for models with a closed form.
pub fn default_target(spec: &ModelSpec) -> Option<f64> {
    match spec.kind {
        ModelKind::Iid => analytic_w_iid(&spec.innovation).ok(),
        ModelKind::Ar1 => analytic_w_ar1(&spec.innovation, spec.a).ok(),
        ModelKind::Ma1 => analytic_w_ma1(&spec.innovation, spec.a).ok(),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McStudySummary {
    /// Successful replications.
    pub reps: usize,
    pub mean_w: f64,
    pub sd_w: f64,
    pub min_w: f64,
    pub max_w: f64,
    /// Normal-approximation interval for the mean of the replicates.
    pub mean_ci95: [f64; 2],
    pub wide_ci: bool,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub mean_r: f64,
    pub target: Option<f64>,
    pub target_source: Option<&'static str>,
    pub abs_error: Option<f64>,
    /// Fraction of replicate intervals covering the target.
    pub ci_coverage: Option<f64>,
    /// Closed-form `w_r` at a fixed block length, when available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population_w_r: Option<f64>,
}

/// Sample moments of the successful replicates. `None` when fewer than two
/// replicates succeeded.
pub fn summarize(
    outcomes: &[ReplicateOutcome],
    target: Option<(f64, &'static str)>,
    population_w_r: Option<f64>,
) -> Option<McStudySummary> {
    let ok: Vec<&ReplicateOk> = outcomes
        .iter()
        .filter_map(|o| o.result.as_ref().ok())
        .collect();
    let k = ok.len();
    if k < 2 {
        return None;
    }
    let kf = k as f64;
    let w: Vec<f64> = ok.iter().map(|o| o.w_hat).collect();
    let mean = w.iter().sum::<f64>() / kf;
    let central = |p: i32| w.iter().map(|x| (x - mean).powi(p)).sum::<f64>() / kf;
    let (m2, m3, m4) = (central(2), central(3), central(4));
    let sd = (m2 * kf / (kf - 1.0)).sqrt();
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };
    let half = Z95 * sd / kf.sqrt();
    Some(McStudySummary {
        reps: k,
        mean_w: mean,
        sd_w: sd,
        min_w: w.iter().copied().fold(f64::INFINITY, f64::min),
        max_w: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_ci95: [mean - half, mean + half],
        wide_ci: k < MIN_NARROW_REPS,
        skewness,
        excess_kurtosis,
        mean_r: ok.iter().map(|o| o.r as f64).sum::<f64>() / kf,
        target: target.map(|t| t.0),
        target_source: target.map(|t| t.1),
        abs_error: target.map(|t| (mean - t.0).abs()),
        ci_coverage: target
            .map(|(t, _)| ok.iter().filter(|o| o.ci95.0 <= t && t <= o.ci95.1).count() as f64 / kf),
        population_w_r,
    })
}

pub fn population_w_r(spec: &ModelSpec, mode: RMode) -> Option<f64> {
    match mode {
        RMode::Fixed(r) => analytic_w_r(spec, r),
        RMode::Auto { .. } => None,
    }
}

/// Paths per work item in [`simulate_ruin_parallel`].
pub const RUIN_CHUNK: usize = 2000;

/// Same tallies as the sequential simulator; chunks are merged in index order.
pub fn simulate_ruin_parallel(spec: &ModelSpec, cfg: &RuinConfig) -> Result<RuinStudy, CoreError> {
    cfg.validate()?;
    spec.validate()?;
    let chunks: Vec<(usize, usize)> = (0..cfg.paths)
        .step_by(RUIN_CHUNK)
        .map(|s| (s, (s + RUIN_CHUNK).min(cfg.paths)))
        .collect();
    let tallies: Vec<Result<RuinTally, CoreError>> = chunks
        .par_iter()
        .map(|&(a, b)| tally_paths(spec, cfg, a..b))
        .collect();
    let mut total = RuinTally::empty(cfg.u_grid.len());
    for t in tallies {
        total = total.merge(&t?);
    }
    Ok(total.finish(cfg))
}
