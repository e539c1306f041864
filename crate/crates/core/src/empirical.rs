//! Empirical moment machinery: block sums, empirical MGF and CGF curves,
//! and autocovariance diagnostics.
//!
//! Exponential averages are evaluated on the log scale with the largest
//! exponent factored out, so `log m̂(t)` stays finite for any finite `t`
//! with finite `t * x`.

use alloc::{vec, vec::Vec};

use crate::error::{Error, Result};

/// Non-overlapping block layout for a series of length `len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockConfig {
    pub r: usize,
    /// `floor(len / r)` complete blocks; trailing observations are dropped.
    pub k_blocks: usize,
}

impl BlockConfig {
    pub fn new(len: usize, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter(
                "block length r must be >= 1".into(),
            ));
        }
        let k_blocks = len / r;
        if k_blocks < 2 {
            return Err(Error::Infeasible(alloc::format!(
                "{len} observations give {k_blocks} block(s) of length {r}; need at least 2"
            )));
        }
        Ok(BlockConfig { r, k_blocks })
    }

    /// Observations actually used.
    pub fn k_effective(&self) -> usize {
        self.r * self.k_blocks
    }
}

/// Block sums `Z_i = x[i*r] + ... + x[i*r + r - 1]` for `i = 0..floor(len/r)`.
pub fn block_sums(values: &[f64], r: usize) -> Result<Vec<f64>> {
    let cfg = BlockConfig::new(values.len(), r)?;
    Ok(values[..cfg.k_effective()]
        .chunks_exact(r)
        .map(|c| c.iter().sum())
        .collect())
}

/// `log((1/k) Σ exp(t x_i))`, stabilized by factoring out `max(t x_i)`.
///
/// Returns exactly `0.0` at `t = 0`.
pub fn log_empirical_mgf(values: &[f64], t: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty series".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let max = values
        .iter()
        .map(|&x| t * x)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Unbounded { t });
    }
    // Correctly rounded, so the value does not depend on the order of `values`.
    let terms: Vec<f64> = values.iter().map(|&x| libm::exp(t * x - max)).collect();
    Ok(max + libm::log(exact_sum(&terms)) - libm::log(values.len() as f64))
}

/// Mean of `exp(t x_i)`.
pub fn empirical_mgf(values: &[f64], t: f64) -> Result<f64> {
    if t == 0.0 && !values.is_empty() {
        return Ok(1.0);
    }
    let log_m = log_empirical_mgf(values, t)?;
    let m = libm::exp(log_m);
    if !m.is_finite() {
        return Err(Error::Unbounded { t });
    }
    Ok(m)
}

/// Tabulated `(1/r) log M̂(t)` of the block sums over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CgfCurve {
    pub t_grid: Vec<f64>,
    /// `+inf` where the stabilized evaluation overflowed.
    pub values: Vec<f64>,
    pub bounded: Vec<bool>,
    pub r: usize,
    pub k_effective: usize,
}

impl CgfCurve {
    /// Second differences of the curve, normalized so that a uniform grid
    /// gives `f[i+1] - 2 f[i] + f[i-1]`. Triples touching an unbounded point
    /// are skipped. Convexity means every entry is `>= 0` up to rounding.
    pub fn second_differences(&self) -> Vec<f64> {
        let t = &self.t_grid;
        let f = &self.values;
        (1..t.len().saturating_sub(1))
            .filter(|&i| self.bounded[i - 1] && self.bounded[i] && self.bounded[i + 1])
            .map(|i| {
                let hl = t[i] - t[i - 1];
                let hr = t[i + 1] - t[i];
                ((f[i + 1] - f[i]) * hl - (f[i] - f[i - 1]) * hr) / (0.5 * (hl + hr))
            })
            .collect()
    }

    /// Smallest positive grid point where the curve changes sign from
    /// negative to non-negative, linearly interpolated.
    pub fn crossing(&self) -> Option<f64> {
        let t = &self.t_grid;
        let f = &self.values;
        (1..t.len()).find_map(|i| {
            (self.bounded[i] && f[i - 1] < 0.0 && f[i] >= 0.0)
                .then(|| t[i - 1] + (t[i] - t[i - 1]) * (-f[i - 1]) / (f[i] - f[i - 1]))
        })
    }
}

/// `points` evenly spaced values on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0 && t_max.is_finite()) || points < 2 {
        return Err(Error::InvalidParameter(
            "grid needs t_max > 0 and at least 2 points".into(),
        ));
    }
    let step = t_max / (points - 1) as f64;
    Ok((0..points).map(|i| step * i as f64).collect())
}

pub fn cgf_curve(values: &[f64], r: usize, t_grid: &[f64]) -> Result<CgfCurve> {
    let cfg = BlockConfig::new(values.len(), r)?;
    let z = block_sums(values, r)?;
    if t_grid.first() != Some(&0.0) {
        return Err(Error::InvalidParameter("t grid must start at 0".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(
            "t grid must be finite and increasing".into(),
        ));
    }
    let inv_r = 1.0 / r as f64;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut bounded = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        match log_empirical_mgf(&z, t) {
            Ok(v) if v.is_finite() => {
                out.push(v * inv_r);
                bounded.push(true);
            }
            Ok(_) | Err(Error::Unbounded { .. }) => {
                out.push(f64::INFINITY);
                bounded.push(false);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(CgfCurve {
        t_grid: t_grid.to_vec(),
        values: out,
        bounded,
        r,
        k_effective: cfg.k_effective(),
    })
}

/// Biased (divide-by-`n`) autocovariances at lags `0..=max_lag`.
pub(crate) fn autocovariances(values: &[f64], max_lag: usize) -> Vec<f64> {
    let n = values.len();
    if values.iter().all(|&v| v == values[0]) {
        return vec![0.0; max_lag.min(n.saturating_sub(1)) + 1];
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|x| x - mean).collect();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|j| {
            centered[..n - j]
                .iter()
                .zip(&centered[j..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Lag-window autocovariance profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CovDecay {
    pub lags: Vec<usize>,
    pub coeffs: Vec<f64>,
}

impl CovDecay {
    /// `coeffs[j] / coeffs[0]`, or `None` for a degenerate series.
    pub fn autocorrelation(&self, lag: usize) -> Option<f64> {
        let c0 = *self.coeffs.first()?;
        (c0 > 0.0)
            .then(|| self.coeffs.get(lag).map(|c| c / c0))
            .flatten()
    }
}

fn check_lag(len: usize, max_lag: usize) -> Result<()> {
    if 4 * max_lag >= len {
        return Err(Error::InvalidParameter(alloc::format!(
            "max lag {max_lag} must be below len/4 (len = {len})"
        )));
    }
    Ok(())
}

pub fn cov_decay(values: &[f64], max_lag: usize) -> Result<CovDecay> {
    check_lag(values.len(), max_lag)?;
    Ok(CovDecay {
        lags: (0..=max_lag).collect(),
        coeffs: autocovariances(values, max_lag),
    })
}

/// Empirical check of `E(S_n²) <= 2n Σ_{j<n} C_j` for the centered series,
/// with `n = max_lag + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMomentCheck {
    pub batch_len: usize,
    pub batches: usize,
    /// Mean squared sum over non-overlapping batches.
    pub lhs: f64,
    /// `2 n Σ_{j=0}^{n-1} C_j` from the biased autocovariances.
    pub rhs: f64,
    /// `lhs <= 1.1 * rhs`.
    pub pass: bool,
}

pub fn second_moment_bound_check(values: &[f64], max_lag: usize) -> Result<SecondMomentCheck> {
    check_lag(values.len(), max_lag)?;
    let n = max_lag + 1;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let batches = values.len() / n;
    let lhs = values[..batches * n]
        .chunks_exact(n)
        .map(|c| {
            let s: f64 = c.iter().map(|x| x - mean).sum();
            s * s
        })
        .sum::<f64>()
        / batches as f64;
    let rhs = 2.0 * n as f64 * autocovariances(values, max_lag).iter().sum::<f64>();
    Ok(SecondMomentCheck {
        batch_len: n,
        batches,
        lhs,
        rhs,
        pass: lhs <= rhs * 1.1,
    })
}

/// Correctly rounded sum (Shewchuk's exact partials), independent of the
/// order of `values`.
pub fn exact_sum(values: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for &v in values {
        let mut x = v;
        let mut kept = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                core::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }
    // Round the partials to nearest, including the half-way correction.
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}
