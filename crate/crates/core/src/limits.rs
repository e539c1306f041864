//! Approximately subadditive sequences: the limit of `h(n)/n` and
//! Hammersley's explicit upper bound, plus a Monte Carlo check of the
//! block-MGF subadditivity inequality for simulated models.
//!
//! A sequence is approximately subadditive with defect `Δ` when
//! `h(n + m) <= h(n) + h(m) + Δ(n + m)`. For such `h` the limit `λ` of
//! `h(n)/n` satisfies, for every `m`,
//!
//! ```text
//! λ <= h(m)/m - Δ(m)/m + 4 Σ_{r >= 2m} Δ(r) / (r (r + 1))
//! ```

use alloc::{vec, vec::Vec};

use crate::error::{Error, Result};
use crate::processes::{ModelPath, ModelSpec};
use crate::rng::derive_seed;

/// `h(1..=N)` and `Δ(1..=N)`; index 0 holds `n = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubadditiveSeq {
    h: Vec<f64>,
    delta: Vec<f64>,
}

impl SubadditiveSeq {
    pub fn new(h: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        if h.len() < 4 {
            return Err(Error::InvalidParameter(alloc::format!(
                "need N >= 4 terms, got {}",
                h.len()
            )));
        }
        if delta.len() != h.len() {
            return Err(Error::InvalidParameter("h and delta lengths differ".into()));
        }
        if h.iter().chain(&delta).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("h and delta must be finite".into()));
        }
        if delta.windows(2).any(|w| w[1] < w[0]) || delta[0] < 0.0 {
            return Err(Error::InvalidParameter(
                "delta must be non-negative and non-decreasing".into(),
            ));
        }
        Ok(SubadditiveSeq { h, delta })
    }

    /// Exactly subadditive candidate (`Δ ≡ 0`).
    pub fn exact(h: Vec<f64>) -> Result<Self> {
        let n = h.len();
        Self::new(h, vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// `h(n)` for `1 <= n <= N`.
    pub fn h(&self, n: usize) -> f64 {
        self.h[n - 1]
    }

    pub fn delta(&self, n: usize) -> f64 {
        self.delta[n - 1]
    }
}

/// A pair where `h(n + m) > h(n) + h(m) + Δ(n + m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub n: usize,
    pub m: usize,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    /// `min h(n)/n` over `N/2 < n <= N`.
    pub lambda_hat: f64,
    /// `h(N)/N`.
    pub last_ratio: f64,
    /// `(m, bound)` for `1 <= m <= N/2`.
    pub bound_at_m: Vec<(usize, f64)>,
    /// The tail `Σ_{r > N}` was added as `Δ(N)/(N + 1)`; it is exact when
    /// `Δ` is constant on `[N/2, N]` and otherwise a lower estimate.
    pub tail_exact: bool,
    pub violations: Vec<Violation>,
    pub violation_count: usize,
    pub subadditive: bool,
}

impl LimitEstimate {
    pub fn min_bound(&self) -> Option<f64> {
        self.bound_at_m.iter().map(|b| b.1).reduce(f64::min)
    }
}

/// Relative slack on the subadditivity test, so that sequences which are
/// exactly subadditive in real arithmetic pass after floating-point evaluation.
pub const ROUNDING_SLACK: f64 = 8.0 * f64::EPSILON;

/// Violations stored in [`LimitEstimate::violations`]; the count is exact.
pub const MAX_REPORTED_VIOLATIONS: usize = 32;

pub fn estimate_limit(seq: &SubadditiveSeq) -> LimitEstimate {
    let big_n = seq.len();
    let lambda_hat = (big_n / 2 + 1..=big_n)
        .map(|n| seq.h(n) / n as f64)
        .fold(f64::INFINITY, f64::min);

    // tail[r] = Σ_{s=r}^{N} Δ(s)/(s(s+1)) + Δ(N)/(N+1).
    let mut tail = vec![0.0; big_n + 2];
    tail[big_n + 1] = seq.delta(big_n) / (big_n + 1) as f64;
    for r in (1..=big_n).rev() {
        tail[r] = tail[r + 1] + seq.delta(r) / (r as f64 * (r + 1) as f64);
    }
    let bound_at_m = (1..=big_n / 2)
        .map(|m| {
            let mf = m as f64;
            (m, seq.h(m) / mf - seq.delta(m) / mf + 4.0 * tail[2 * m])
        })
        .collect();
    let tail_exact = seq.delta((big_n / 2).max(1)) == seq.delta(big_n);

    let mut violations = Vec::new();
    let mut violation_count = 0;
    for n in 1..=big_n / 2 {
        for m in n..=big_n - n {
            let (a, b, c, d) = (seq.h(n + m), seq.h(n), seq.h(m), seq.delta(n + m));
            let excess = a - b - c - d;
            if excess > ROUNDING_SLACK * (a.abs() + b.abs() + c.abs() + d) {
                violation_count += 1;
                if violations.len() < MAX_REPORTED_VIOLATIONS {
                    violations.push(Violation { n, m, excess });
                }
            }
        }
    }

    LimitEstimate {
        lambda_hat,
        last_ratio: seq.h(big_n) / big_n as f64,
        bound_at_m,
        tail_exact,
        violations,
        violation_count,
        subadditive: violation_count == 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgfCheckConfig {
    pub t: f64,
    pub n_max: usize,
    pub reps: usize,
    /// Declared constant `D` in `E e^{tS_{n+m}} <= e^{4tD} E e^{tS_n} E e^{tS_m}`.
    pub d_const: f64,
    pub seed: u64,
}

impl Default for CgfCheckConfig {
    fn default() -> Self {
        CgfCheckConfig {
            t: 0.2,
            n_max: 32,
            reps: 4000,
            d_const: 0.0,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMargin {
    pub n: usize,
    pub m: usize,
    /// `log M(n+m) - log M(n) - log M(m) - 4 t D`; positive means violated.
    pub margin: f64,
    /// `margin` over its delta-method standard error.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgfSubadditivity {
    pub config: CgfCheckConfig,
    /// Estimated `log E e^{t S_n}` for `n = 1..=n_max`.
    pub log_mgf: Vec<f64>,
    pub pairs_checked: usize,
    /// Pair with the largest z-score.
    pub worst: Option<PairMargin>,
    /// Pairs with `z > 3`.
    pub violations: usize,
    pub pass: bool,
}

/// Monte Carlo check of the block-MGF inequality for `n, m >= 1`,
/// `n + m <= n_max`, using shared replications of the prefix sums.
pub fn check_cgf_subadditivity(spec: &ModelSpec, cfg: &CgfCheckConfig) -> Result<CgfSubadditivity> {
    if cfg.n_max < 2 || cfg.reps < 2 {
        return Err(Error::InvalidParameter(
            "need n_max >= 2 and reps >= 2".into(),
        ));
    }
    if !(cfg.t > 0.0 && cfg.t.is_finite()) || !(cfg.d_const >= 0.0) {
        return Err(Error::InvalidParameter("need t > 0 and D >= 0".into()));
    }
    let nm = cfg.n_max;
    // e[i * nm + (n - 1)] = exp(t S_n) for replication i, shifted by the
    // per-n scale so that the mean is near 1.
    let mut e = vec![0.0; cfg.reps * nm];
    for i in 0..cfg.reps {
        let mut path = ModelPath::new(spec, derive_seed(cfg.seed, i as u64))?;
        let mut s = 0.0;
        for n in 0..nm {
            s += path.next().expect("model paths are infinite");
            e[i * nm + n] = cfg.t * s;
        }
    }
    // Stabilize column-wise with the max exponent.
    let mut col_max = vec![f64::NEG_INFINITY; nm];
    for i in 0..cfg.reps {
        for n in 0..nm {
            col_max[n] = col_max[n].max(e[i * nm + n]);
        }
    }
    for i in 0..cfg.reps {
        for n in 0..nm {
            e[i * nm + n] = libm::exp(e[i * nm + n] - col_max[n]);
        }
    }
    let reps = cfg.reps as f64;
    let mean: Vec<f64> = (0..nm)
        .map(|n| (0..cfg.reps).map(|i| e[i * nm + n]).sum::<f64>() / reps)
        .collect();
    let log_mgf: Vec<f64> = (0..nm).map(|n| libm::log(mean[n]) + col_max[n]).collect();
    if log_mgf.iter().any(|v| !v.is_finite()) {
        return Err(Error::Unbounded { t: cfg.t });
    }

    let shift = 4.0 * cfg.t * cfg.d_const;
    let mut worst: Option<PairMargin> = None;
    let mut violations = 0;
    let mut pairs = 0;
    for n in 1..=nm / 2 {
        for m in n..=nm - n {
            pairs += 1;
            let (a, b, c) = (n + m - 1, n - 1, m - 1);
            let margin = log_mgf[a] - log_mgf[b] - log_mgf[c] - shift;
            // Influence of each replication on the log-ratio.
            let g = |i: usize| {
                e[i * nm + a] / mean[a] - e[i * nm + b] / mean[b] - e[i * nm + c] / mean[c]
            };
            let gbar = (0..cfg.reps).map(g).sum::<f64>() / reps;
            let var = (0..cfg.reps)
                .map(|i| (g(i) - gbar) * (g(i) - gbar))
                .sum::<f64>()
                / (reps - 1.0)
                / reps;
            let z = if var > 0.0 {
                margin / libm::sqrt(var)
            } else if margin > 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            if z > 3.0 {
                violations += 1;
            }
            if worst.is_none_or(|w| z > w.z) {
                worst = Some(PairMargin { n, m, margin, z });
            }
        }
    }
    Ok(CgfSubadditivity {
        config: *cfg,
        log_mgf,
        pairs_checked: pairs,
        worst,
        violations,
        pass: violations == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::InnovationSpec;

    #[test]
    fn linear_sequence() {
        let seq = SubadditiveSeq::exact((1..=20).map(|n| 3.0 * n as f64).collect()).unwrap();
        let est = estimate_limit(&seq);
        assert_eq!(est.lambda_hat, 3.0);
        assert!(est.bound_at_m.iter().all(|&(_, b)| b == 3.0));
        assert!(est.subadditive && est.tail_exact);
    }

    #[test]
    fn affine_sequence_matches_closed_form_bound() {
        // h = 2n + 5, Δ = 10: bound(m) = 2 + 5/m - 10/m + 40/(2m) = 2 + 15/m.
        let n = 200;
        let seq = SubadditiveSeq::new(
            (1..=n).map(|k| 2.0 * k as f64 + 5.0).collect(),
            vec![10.0; n],
        )
        .unwrap();
        let est = estimate_limit(&seq);
        assert!((est.lambda_hat - (2.0 + 5.0 / n as f64)).abs() < 1e-12);
        for &(m, b) in &est.bound_at_m {
            assert!((b - (2.0 + 15.0 / m as f64)).abs() < 1e-12, "m = {m}");
            assert!(b >= est.lambda_hat);
        }
        assert!(est.subadditive && est.tail_exact);
    }

    #[test]
    fn last_index_can_exceed_the_minimum() {
        // ceil(n/2) is subadditive; at odd N the last ratio is above 1/2.
        let seq = SubadditiveSeq::exact((1..=9).map(|n| ((n + 1) / 2) as f64).collect()).unwrap();
        let est = estimate_limit(&seq);
        assert!(est.subadditive);
        assert_eq!(est.lambda_hat, 0.5);
        assert!(est.last_ratio > 0.5);
    }

    #[test]
    fn violation_is_flagged() {
        let seq = SubadditiveSeq::exact((1..=10).map(|n| (n * n) as f64).collect()).unwrap();
        let est = estimate_limit(&seq);
        assert!(!est.subadditive);
        assert_eq!(
            est.violations[0],
            Violation {
                n: 1,
                m: 1,
                excess: 2.0
            }
        );
        assert_eq!(est.violation_count, 25);
    }

    #[test]
    fn rounding_does_not_count_as_violation() {
        // 0.7 n + ceil(n/k) is subadditive, but its float values are not.
        let h: Vec<f64> = (1..=50usize)
            .map(|n| 0.7 * n as f64 + n.div_ceil(3) as f64)
            .collect();
        assert!(h[12] - h[0] - h[11] > 0.0);
        assert!(estimate_limit(&SubadditiveSeq::exact(h).unwrap()).subadditive);
    }

    #[test]
    fn seq_validation() {
        assert!(SubadditiveSeq::exact(vec![1.0; 3]).is_err());
        assert!(SubadditiveSeq::new(vec![1.0; 5], vec![2.0, 1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(SubadditiveSeq::new(vec![1.0; 5], vec![0.0; 4]).is_err());
    }

    #[test]
    fn iid_cgf_sequence() {
        let inn = InnovationSpec::new(1.2, 1.0).unwrap();
        let l = inn.log_mgf(0.2);
        let seq = SubadditiveSeq::exact((1..=64).map(|n| n as f64 * l).collect()).unwrap();
        let est = estimate_limit(&seq);
        assert!((est.lambda_hat - l).abs() <= 4.0 * f64::EPSILON * l.abs());
    }

    #[test]
    fn cgf_check_iid_and_ma1() {
        let inn = InnovationSpec::new(1.2, 1.0).unwrap();
        let cfg = CgfCheckConfig {
            reps: 2000,
            n_max: 16,
            ..CgfCheckConfig::default()
        };
        let r = check_cgf_subadditivity(&ModelSpec::iid(inn), &cfg).unwrap();
        assert!(r.pass, "{:?}", r.worst);
        assert_eq!(r.pairs_checked, 64);
        let d = 0.2 * inn.mean_abs();
        let r = check_cgf_subadditivity(
            &ModelSpec::ma1(0.2, inn),
            &CgfCheckConfig { d_const: d, ..cfg },
        )
        .unwrap();
        assert!(r.pass);
        assert!(r.worst.unwrap().margin < 0.0);
    }
}
