//! Monte Carlo ruin probabilities for the claim surplus `Y_n = X_1 + … + X_n`.
//!
//! Ruin at reserve `u` means `max_{n <= horizon} Y_n > u`. Each path uses its
//! own seed `derive_seed(seed, path_index)`, so any partition of the path
//! range produces the same tallies, and [`RuinTally::merge`] combines them.

use alloc::{vec, vec::Vec};
use core::ops::Range;

use crate::error::{Error, Result};
use crate::processes::{ModelPath, ModelSpec};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct RuinConfig {
    /// Non-negative, strictly increasing reserves.
    pub u_grid: Vec<f64>,
    pub horizon: usize,
    pub paths: usize,
    pub seed: u64,
    /// Coefficient used for the Gerber denominator diagnostic.
    pub gerber_w: Option<f64>,
}

pub const MIN_PATHS: usize = 100;
pub const DEFAULT_HORIZON: usize = 5000;

impl RuinConfig {
    pub fn new(u_grid: Vec<f64>, horizon: usize, paths: usize, seed: u64) -> Result<Self> {
        let cfg = RuinConfig {
            u_grid,
            horizon,
            paths,
            seed,
            gerber_w: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_gerber_w(mut self, w: f64) -> Self {
        self.gerber_w = Some(w);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be >= 1".into()));
        }
        if self.paths < MIN_PATHS {
            return Err(Error::InvalidParameter(alloc::format!(
                "need at least {MIN_PATHS} paths, got {}",
                self.paths
            )));
        }
        if self.u_grid.is_empty()
            || self.u_grid.iter().any(|u| !(u.is_finite() && *u >= 0.0))
            || self.u_grid.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(Error::InvalidParameter(
                "u grid must be non-empty, finite, non-negative and strictly increasing".into(),
            ));
        }
        if let Some(w) = self.gerber_w {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter(
                    "Gerber coefficient must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Mergeable per-u counters for a set of paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RuinTally {
    pub paths: u64,
    pub ruined: Vec<u64>,
    /// Sum of first-passage times over ruined paths.
    pub time_sum: Vec<u64>,
    /// Sum of `exp(w (Y_T - u))` over ruined paths.
    pub gerber_sum: Vec<f64>,
    /// Paths that ran the full horizon without exceeding the largest `u`.
    pub full_horizon: u64,
    /// Sum of `Y_horizon` over those paths.
    pub terminal_sum: f64,
    /// Full-horizon paths ending below zero.
    pub drifting_down: u64,
}

impl RuinTally {
    pub fn empty(grid_len: usize) -> Self {
        RuinTally {
            paths: 0,
            ruined: vec![0; grid_len],
            time_sum: vec![0; grid_len],
            gerber_sum: vec![0.0; grid_len],
            full_horizon: 0,
            terminal_sum: 0.0,
            drifting_down: 0,
        }
    }

    pub fn merge(mut self, other: &RuinTally) -> Self {
        self.paths += other.paths;
        for i in 0..self.ruined.len() {
            self.ruined[i] += other.ruined[i];
            self.time_sum[i] += other.time_sum[i];
            self.gerber_sum[i] += other.gerber_sum[i];
        }
        self.full_horizon += other.full_horizon;
        self.terminal_sum += other.terminal_sum;
        self.drifting_down += other.drifting_down;
        self
    }
}

/// Simulate the paths with indices in `range`.
pub fn tally_paths(spec: &ModelSpec, cfg: &RuinConfig, range: Range<usize>) -> Result<RuinTally> {
    cfg.validate()?;
    let u = &cfg.u_grid;
    let mut tally = RuinTally::empty(u.len());
    for p in range {
        let mut path = ModelPath::new(spec, derive_seed(cfg.seed, p as u64))?;
        let mut y = 0.0f64;
        let mut next = 0;
        for n in 1..=cfg.horizon {
            y += path.next().expect("model paths are infinite");
            if !y.is_finite() {
                return Err(Error::NonFinite { index: n - 1 });
            }
            while next < u.len() && y > u[next] {
                tally.ruined[next] += 1;
                tally.time_sum[next] += n as u64;
                if let Some(w) = cfg.gerber_w {
                    tally.gerber_sum[next] += libm::exp(w * (y - u[next]));
                }
                next += 1;
            }
            if next == u.len() {
                break;
            }
        }
        if next < u.len() {
            tally.full_horizon += 1;
            tally.terminal_sum += y;
            if y < 0.0 {
                tally.drifting_down += 1;
            }
        }
        tally.paths += 1;
    }
    Ok(tally)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    /// Least-squares slope of `ln ruin_freq` against `u`.
    pub slope: f64,
    pub intercept: f64,
    /// Delta-method standard error from binomial sampling noise, ignoring
    /// the positive correlation between grid points.
    pub stderr: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GerberDiagnostic {
    pub w: f64,
    /// Estimate of `E[exp(w (Y_T - u)) | T <= horizon]` per u.
    pub denominator: Vec<Option<f64>>,
    /// `exp(-w u) / denominator`.
    pub psi: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuinStudy {
    pub u_grid: Vec<f64>,
    pub horizon: usize,
    pub paths: usize,
    pub ruin_freq: Vec<f64>,
    pub stderr: Vec<f64>,
    pub ruin_time_mean: Vec<Option<f64>>,
    pub solvent_fraction: Vec<f64>,
    pub slope_fit: Option<SlopeFit>,
    /// Mean `Y_horizon` over paths that never exceeded the largest `u`.
    pub terminal_mean: Option<f64>,
    /// Fraction of those paths that finished below zero.
    pub drifting_down_fraction: Option<f64>,
    pub gerber: Option<GerberDiagnostic>,
}

/// Minimum ruin count for a grid point to enter the slope fit.
pub const SLOPE_MIN_COUNT: u64 = 25;

impl RuinTally {
    pub fn finish(&self, cfg: &RuinConfig) -> RuinStudy {
        let n = self.paths as f64;
        let ruin_freq: Vec<f64> = self.ruined.iter().map(|&k| k as f64 / n).collect();
        let stderr = ruin_freq
            .iter()
            .map(|p| libm::sqrt(p * (1.0 - p) / n))
            .collect();
        let ruin_time_mean = self
            .ruined
            .iter()
            .zip(&self.time_sum)
            .map(|(&k, &s)| (k > 0).then(|| s as f64 / k as f64))
            .collect();
        let solvent_fraction = ruin_freq.iter().map(|p| 1.0 - p).collect();
        let used: Vec<(f64, f64)> = cfg
            .u_grid
            .iter()
            .zip(&self.ruined)
            .filter(|(_, &k)| k >= SLOPE_MIN_COUNT)
            .map(|(&u, &k)| (u, k as f64 / n))
            .collect();
        let slope_fit = fit_slope(&used, n);
        let full = self.full_horizon as f64;
        let gerber = cfg.gerber_w.map(|w| {
            let denominator: Vec<Option<f64>> = self
                .ruined
                .iter()
                .zip(&self.gerber_sum)
                .map(|(&k, &s)| (k > 0).then(|| s / k as f64))
                .collect();
            let psi = denominator
                .iter()
                .zip(&cfg.u_grid)
                .map(|(d, &u)| d.map(|d| libm::exp(-w * u) / d))
                .collect();
            GerberDiagnostic {
                w,
                denominator,
                psi,
            }
        });
        RuinStudy {
            u_grid: cfg.u_grid.clone(),
            horizon: cfg.horizon,
            paths: self.paths as usize,
            ruin_freq,
            stderr,
            ruin_time_mean,
            solvent_fraction,
            slope_fit,
            terminal_mean: (self.full_horizon > 0).then(|| self.terminal_sum / full),
            drifting_down_fraction: (self.full_horizon > 0)
                .then(|| self.drifting_down as f64 / full),
            gerber,
        }
    }
}

fn fit_slope(points: &[(f64, f64)], paths: f64) -> Option<SlopeFit> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let ubar = points.iter().map(|p| p.0).sum::<f64>() / m;
    let lbar = points.iter().map(|p| libm::log(p.1)).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - ubar) * (p.0 - ubar)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - ubar) * (libm::log(p.1) - lbar))
        .sum();
    let slope = sxy / sxx;
    let var: f64 = points
        .iter()
        .map(|&(u, p)| (u - ubar) * (u - ubar) * (1.0 - p) / (paths * p))
        .sum();
    Some(SlopeFit {
        slope,
        intercept: lbar - slope * ubar,
        stderr: libm::sqrt(var) / sxx,
        points_used: points.len(),
    })
}

/// Run every path sequentially.
pub fn simulate_ruin(spec: &ModelSpec, cfg: &RuinConfig) -> Result<RuinStudy> {
    Ok(tally_paths(spec, cfg, 0..cfg.paths)?.finish(cfg))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LundbergCheck {
    pub slope: f64,
    pub w_ref: f64,
    /// `|-slope - w_ref|`.
    pub abs_error: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn lundberg_check(study: &RuinStudy, w_ref: f64, tol: f64) -> Result<LundbergCheck> {
    let fit = study.slope_fit.ok_or_else(|| {
        Error::Infeasible("slope undefined: fewer than two grid points with enough ruins".into())
    })?;
    Ok(lundberg_from_slope(fit.slope, w_ref, tol))
}

pub fn lundberg_from_slope(slope: f64, w_ref: f64, tol: f64) -> LundbergCheck {
    let abs_error = (-slope - w_ref).abs();
    LundbergCheck {
        slope,
        w_ref,
        abs_error,
        tol,
        pass: abs_error <= tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeFinettiPoint {
    pub u: f64,
    pub ruin_freq: f64,
    pub bound: f64,
    /// `ruin_freq <= exp(-w u) + 3 stderr`.
    pub pass: bool,
}

pub fn de_finetti_check(study: &RuinStudy, w: f64) -> Vec<DeFinettiPoint> {
    study
        .u_grid
        .iter()
        .zip(study.ruin_freq.iter().zip(&study.stderr))
        .map(|(&u, (&p, &se))| {
            let bound = libm::exp(-w * u);
            DeFinettiPoint {
                u,
                ruin_freq: p,
                bound,
                pass: p <= bound + 3.0 * se,
            }
        })
        .collect()
}
