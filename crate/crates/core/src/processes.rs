//! Seeded simulators for the increment models and closed-form adjustment
//! coefficients where they exist.
//!
//! All models are driven by shifted exponential innovations
//! `ε = ξ - c`, `ξ ~ Exp(theta)`:
//!
//! | kind              | recursion                                   |
//! |-------------------|---------------------------------------------|
//! | `Iid`             | `X_n = ε_n`                                 |
//! | `Ar1`             | `X_n = a X_{n-1} + ε_n`                     |
//! | `Ma1`             | `X_n = ε_n + a ε_{n-1}`                     |
//! | `NlAr1`           | `X_n = a X_{n-1}² + s ε_n` (`s` = shift scale, 0.7 by default) |
//! | `BernoulliShift`  | `X_n = H(ε_n, ε_{n-1}, …, ε_{n-W+1})`       |
//!
//! Retained innovations `ε_1, ε_2, …` always come from the main stream of
//! the seed, and warm-up innovations from a separate stream (see
//! [`crate::rng`]). With `a = 0` the AR(1), MA(1) and (shift scale 1)
//! nonlinear models therefore reproduce the iid sample exactly.

use alloc::{string::String, sync::Arc, vec, vec::Vec};
use core::fmt;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::rootfind::{solve_positive_root_with, RootResult, SolverOptions};

/// Shifted exponential innovation `ε = ξ - c` with `ξ ~ Exp(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationSpec {
    pub theta: f64,
    pub c: f64,
}

impl InnovationSpec {
    pub fn new(theta: f64, c: f64) -> Result<Self> {
        let spec = InnovationSpec { theta, c };
        spec.validate()?;
        Ok(spec)
    }

    /// `theta > 0` and the net-profit condition `c * theta > 1`.
    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "theta must be positive and finite, got {}",
                self.theta
            )));
        }
        if !(self.c.is_finite() && self.c * self.theta > 1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "need c * theta > 1 for a negative mean, got c = {}, theta = {}",
                self.c,
                self.theta
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        1.0 / self.theta - self.c
    }

    pub fn variance(&self) -> f64 {
        1.0 / (self.theta * self.theta)
    }

    /// `E|ξ - c|`.
    pub fn mean_abs(&self) -> f64 {
        self.c - 1.0 / self.theta + 2.0 * libm::exp(-self.theta * self.c) / self.theta
    }

    /// `log E exp(s ε) = -s c + ln theta - ln(theta - s)`; `+inf` for `s >= theta`.
    pub fn log_mgf(&self, s: f64) -> f64 {
        if s >= self.theta {
            return f64::INFINITY;
        }
        if s > 0.5 * self.theta {
            // theta - s is exact here, which keeps precision near the abscissa.
            -s * self.c + libm::log(self.theta) - libm::log(self.theta - s)
        } else {
            -s * self.c - libm::log1p(-s / self.theta)
        }
    }

    /// Abscissa of convergence of the innovation MGF.
    pub fn abscissa(&self) -> f64 {
        self.theta
    }
}

/// Nonlinear kernel body, called with the window most recent first.
pub type KernelFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Map from a window of innovations (most recent first) to an observation.
#[derive(Clone)]
pub enum KernelMap {
    /// `Σ_j w_j ε_{n-j}`.
    Linear(Vec<f64>),
    Custom(Arc<KernelFn>),
}

impl fmt::Debug for KernelMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelMap::Linear(w) => f.debug_tuple("Linear").field(w).finish(),
            KernelMap::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PartialEq for KernelMap {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (KernelMap::Linear(a), KernelMap::Linear(b)) => a == b,
            (KernelMap::Custom(a), KernelMap::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// Finite-window causal Bernoulli shift kernel.
///
/// `continuity_coeffs` carries declared bounds `d_n` on how much the output
/// can move when innovations older than `n` steps change. They are metadata
/// for diagnostics and are never enforced against the map.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftKernel {
    window: usize,
    map: KernelMap,
    continuity_coeffs: Vec<f64>,
}

impl ShiftKernel {
    pub fn linear(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "linear kernel needs at least one finite weight".into(),
            ));
        }
        Ok(ShiftKernel {
            window: weights.len(),
            map: KernelMap::Linear(weights),
            continuity_coeffs: Vec::new(),
        })
    }

    /// AR(1) moving-average representation cut at `window` terms.
    pub fn truncated_ar1(a: f64, window: usize) -> Result<Self> {
        if !(a.abs() < 1.0) {
            return Err(Error::InvalidParameter(
                "truncated AR(1) kernel needs |a| < 1".into(),
            ));
        }
        let mut w = Vec::with_capacity(window);
        let mut p = 1.0;
        for _ in 0..window {
            w.push(p);
            p *= a;
        }
        Self::linear(w)
    }

    pub fn custom<F>(window: usize, map: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if window == 0 {
            return Err(Error::InvalidParameter("kernel window must be >= 1".into()));
        }
        Ok(ShiftKernel {
            window,
            map: KernelMap::Custom(Arc::new(map)),
            continuity_coeffs: Vec::new(),
        })
    }

    pub fn with_continuity_coeffs(mut self, d: Vec<f64>) -> Result<Self> {
        if d.windows(2).any(|w| w[1] > w[0]) || d.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidParameter(
                "continuity coefficients must be non-negative and non-increasing".into(),
            ));
        }
        self.continuity_coeffs = d;
        Ok(self)
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn map(&self) -> &KernelMap {
        &self.map
    }

    pub fn continuity_coeffs(&self) -> &[f64] {
        &self.continuity_coeffs
    }

    /// Sum of the declared continuity coefficients, if any were declared.
    pub fn declared_d(&self) -> Option<f64> {
        (!self.continuity_coeffs.is_empty()).then(|| self.continuity_coeffs.iter().sum())
    }

    #[inline]
    fn eval(&self, recent_first: &[f64]) -> f64 {
        match &self.map {
            KernelMap::Linear(w) => w.iter().zip(recent_first).map(|(a, b)| a * b).sum(),
            KernelMap::Custom(f) => f(recent_first),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Iid,
    Ar1,
    Ma1,
    NlAr1,
    BernoulliShift(ShiftKernel),
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Iid => "iid",
            ModelKind::Ar1 => "ar1",
            ModelKind::Ma1 => "ma1",
            ModelKind::NlAr1 => "nlar1",
            ModelKind::BernoulliShift(_) => "bshift",
        }
    }

    pub fn default_burn_in(&self) -> usize {
        match self {
            ModelKind::Iid => 0,
            ModelKind::Ma1 => 1,
            _ => 1000,
        }
    }
}

/// Parametric description of a generating process.
///
/// `a` is the recursion / moving-average coefficient (ignored by `Iid` and
/// `BernoulliShift`); `shift_scale` multiplies the innovation in `NlAr1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub a: f64,
    pub innovation: InnovationSpec,
    pub burn_in: usize,
    pub shift_scale: f64,
}

impl ModelSpec {
    fn with_kind(kind: ModelKind, a: f64, innovation: InnovationSpec) -> Self {
        let shift_scale = if kind == ModelKind::NlAr1 { 0.7 } else { 1.0 };
        ModelSpec {
            burn_in: kind.default_burn_in(),
            kind,
            a,
            innovation,
            shift_scale,
        }
    }

    pub fn iid(innovation: InnovationSpec) -> Self {
        Self::with_kind(ModelKind::Iid, 0.0, innovation)
    }

    pub fn ar1(a: f64, innovation: InnovationSpec) -> Self {
        Self::with_kind(ModelKind::Ar1, a, innovation)
    }

    pub fn ma1(a: f64, innovation: InnovationSpec) -> Self {
        Self::with_kind(ModelKind::Ma1, a, innovation)
    }

    pub fn nlar1(a: f64, innovation: InnovationSpec) -> Self {
        Self::with_kind(ModelKind::NlAr1, a, innovation)
    }

    pub fn bernoulli_shift(kernel: ShiftKernel, innovation: InnovationSpec) -> Self {
        Self::with_kind(ModelKind::BernoulliShift(kernel), 0.0, innovation)
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_shift_scale(mut self, s: f64) -> Self {
        self.shift_scale = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.innovation.validate()?;
        if !self.a.is_finite() {
            return Err(Error::InvalidParameter(
                "coefficient a must be finite".into(),
            ));
        }
        match &self.kind {
            ModelKind::Iid => {}
            ModelKind::Ar1 | ModelKind::NlAr1 => {
                if !(self.a.abs() < 1.0) {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "{} needs |a| < 1, got a = {}",
                        self.kind.name(),
                        self.a
                    )));
                }
            }
            ModelKind::Ma1 => {
                if !(self.a > -1.0) {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "ma1 needs a > -1, got a = {}",
                        self.a
                    )));
                }
            }
            ModelKind::BernoulliShift(k) => {
                if self.burn_in + 1 < k.window() {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "burn-in {} cannot fill a kernel window of {}",
                        self.burn_in,
                        k.window()
                    )));
                }
            }
        }
        if self.kind == ModelKind::NlAr1
            && !(self.shift_scale.is_finite() && self.shift_scale > 0.0)
        {
            return Err(Error::InvalidParameter(
                "shift scale must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum PathState {
    Iid,
    Ar1 { prev: f64 },
    Ma1 { prev_eps: f64 },
    NlAr1 { prev: f64 },
    Shift { recent: Vec<f64> },
}

/// Infinite stream of observations from the stationary regime of a model.
///
/// Construction performs the burn-in. The iterator never ends; take as many
/// values as needed.
#[derive(Debug, Clone)]
pub struct ModelPath<'a> {
    spec: &'a ModelSpec,
    rng: ChaCha8Rng,
    inv_theta: f64,
    state: PathState,
}

impl<'a> ModelPath<'a> {
    pub fn new(spec: &'a ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let state = match &spec.kind {
            ModelKind::Iid => PathState::Iid,
            ModelKind::Ar1 => PathState::Ar1 { prev: 0.0 },
            ModelKind::Ma1 => PathState::Ma1 { prev_eps: 0.0 },
            ModelKind::NlAr1 => PathState::NlAr1 { prev: 0.0 },
            ModelKind::BernoulliShift(k) => PathState::Shift {
                recent: vec![0.0; k.window()],
            },
        };
        let mut path = ModelPath {
            spec,
            rng: rng::stream(seed, rng::BURN_IN_STREAM),
            inv_theta: 1.0 / spec.innovation.theta,
            state,
        };
        if !matches!(path.state, PathState::Iid) {
            for _ in 0..spec.burn_in {
                path.step();
            }
        }
        path.rng = rng::stream(seed, rng::MAIN_STREAM);
        Ok(path)
    }

    #[inline]
    fn step(&mut self) -> f64 {
        let eps = rng::exponential(&mut self.rng, self.inv_theta) - self.spec.innovation.c;
        let a = self.spec.a;
        match &mut self.state {
            PathState::Iid => eps,
            PathState::Ar1 { prev } => {
                *prev = a * *prev + eps;
                *prev
            }
            PathState::Ma1 { prev_eps } => {
                let x = eps + a * *prev_eps;
                *prev_eps = eps;
                x
            }
            PathState::NlAr1 { prev } => {
                *prev = a * *prev * *prev + self.spec.shift_scale * eps;
                *prev
            }
            PathState::Shift { recent } => {
                let w = recent.len();
                recent.copy_within(..w - 1, 1);
                recent[0] = eps;
                match &self.spec.kind {
                    ModelKind::BernoulliShift(k) => k.eval(recent),
                    _ => unreachable!("shift state only built for shift kernels"),
                }
            }
        }
    }
}

impl Iterator for ModelPath<'_> {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        Some(self.step())
    }
}

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleOrigin {
    Simulated {
        spec: ModelSpec,
        seed: u64,
    },
    Ingested {
        source: String,
    },
    /// Transformed from another sample (scaling, permutation, tests).
    Derived {
        note: String,
    },
}

/// Ordered gains/losses `X_1..X_k`: at least two values, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    origin: SampleOrigin,
}

impl Sample {
    pub fn new(values: Vec<f64>, origin: SampleOrigin) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter(alloc::format!(
                "a sample needs at least 2 values, got {}",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Sample { values, origin })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> &SampleOrigin {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Sample> {
        Sample::new(
            self.values.iter().map(|x| x * factor).collect(),
            SampleOrigin::Derived {
                note: alloc::format!("scaled by {factor}"),
            },
        )
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl AsRef<[f64]> for Sample {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Draw `n` stationary observations. Bit-identical for identical inputs.
pub fn simulate(spec: &ModelSpec, n: usize, seed: u64) -> Result<Sample> {
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    let values: Vec<f64> = ModelPath::new(spec, seed)?.take(n).collect();
    Sample::new(
        values,
        SampleOrigin::Simulated {
            spec: spec.clone(),
            seed,
        },
    )
}

/// Closed-form objectives are cheap, so bisect down to adjacent floats;
/// near the abscissa the slope can be large enough that a `1e-9` bracket
/// leaves a visible residual.
fn solve_positive_root<F: Fn(f64) -> f64>(objective: F, hint: f64) -> Result<RootResult> {
    let opts = SolverOptions {
        abs_tol: 0.0,
        rel_tol: 0.0,
        ..SolverOptions::default()
    };
    solve_positive_root_with(objective, hint, &opts)
}

/// Positive root of `e^{-tc} theta / (theta - t) = 1`.
pub fn analytic_w_iid(inn: &InnovationSpec) -> Result<f64> {
    inn.validate()?;
    let res = solve_positive_root(|t| inn.log_mgf(t), 0.999 * inn.abscissa())?;
    Ok(res.root)
}

/// Gerber's AR(1) coefficient `(1 - a) w^i`.
pub fn analytic_w_ar1(inn: &InnovationSpec, a: f64) -> Result<f64> {
    if !(a.abs() < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "AR(1) needs |a| < 1, got {a}"
        )));
    }
    Ok((1.0 - a) * analytic_w_iid(inn)?)
}

/// Positive root of `-t c (1 + a) + ln theta - ln(theta - t (1 + a)) = 0`.
pub fn analytic_w_ma1(inn: &InnovationSpec, a: f64) -> Result<f64> {
    if !(a > -1.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "MA(1) needs a > -1, got {a}"
        )));
    }
    inn.validate()?;
    let s = 1.0 + a;
    let res = solve_positive_root(|t| inn.log_mgf(s * t), 0.999 * inn.abscissa() / s)?;
    Ok(res.root)
}

/// Abscissa of `t ↦ Σ_j λ(coef_j t)` for innovation coefficients `coefs`.
fn combined_abscissa(inn: &InnovationSpec, coefs: impl Iterator<Item = f64>) -> f64 {
    let max_pos = coefs.fold(0.0f64, f64::max);
    if max_pos > 0.0 {
        inn.abscissa() / max_pos
    } else {
        f64::INFINITY
    }
}

/// `(1/r) log E exp(t Y_r)` for the MA(1) model, where
/// `Y_r = a ε_0 + (1 + a) Σ_{j=1}^{r-1} ε_j + ε_r`.
pub fn ma1_block_cgf(inn: &InnovationSpec, a: f64, r: usize, t: f64) -> f64 {
    let middle = if r > 1 {
        (r - 1) as f64 * inn.log_mgf((1.0 + a) * t)
    } else {
        0.0
    };
    (inn.log_mgf(a * t) + middle + inn.log_mgf(t)) / r as f64
}

/// Adjustment coefficient `w_r` of the MA(1) block sum `Y_r`.
pub fn analytic_w_r_ma1(inn: &InnovationSpec, a: f64, r: usize) -> Result<f64> {
    if !(a > -1.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "MA(1) needs a > -1, got {a}"
        )));
    }
    if r == 0 {
        return Err(Error::InvalidParameter(
            "block length r must be >= 1".into(),
        ));
    }
    inn.validate()?;
    let middle = if r >= 2 { 1.0 + a } else { 0.0 };
    let abscissa = combined_abscissa(inn, [a, middle, 1.0].into_iter());
    let res = solve_positive_root(|t| ma1_block_cgf(inn, a, r, t), 0.999 * abscissa)?;
    Ok(res.root)
}

/// Innovation coefficients of the stationary AR(1) block sum
/// `Y_r = X_1 + … + X_r`: the `r` in-block terms followed by the past,
/// truncated once `|a|^k` drops below `1e-18`.
fn ar1_block_coefficients(a: f64, r: usize) -> Vec<f64> {
    let geo = |m: usize| (1.0 - libm::pow(a, m as f64)) / (1.0 - a);
    let mut coefs: Vec<f64> = (1..=r).map(geo).collect();
    let tail = geo(r);
    let mut p = a;
    while p.abs() > 1e-18 {
        coefs.push(p * tail);
        p *= a;
    }
    coefs
}

/// `(1/r) log E exp(t Y_r)` for the stationary AR(1) model.
pub fn ar1_block_cgf(inn: &InnovationSpec, a: f64, r: usize, t: f64) -> f64 {
    ar1_block_coefficients(a, r)
        .iter()
        .map(|&k| inn.log_mgf(k * t))
        .sum::<f64>()
        / r as f64
}

/// Adjustment coefficient `w_r` of the stationary AR(1) block sum; tends to
/// `(1 - a) w^i` as `r` grows.
pub fn analytic_w_r_ar1(inn: &InnovationSpec, a: f64, r: usize) -> Result<f64> {
    if !(a.abs() < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "AR(1) needs |a| < 1, got {a}"
        )));
    }
    if r == 0 {
        return Err(Error::InvalidParameter(
            "block length r must be >= 1".into(),
        ));
    }
    inn.validate()?;
    let coefs = ar1_block_coefficients(a, r);
    let abscissa = combined_abscissa(inn, coefs.iter().copied());
    let res = solve_positive_root(
        |t| coefs.iter().map(|&k| inn.log_mgf(k * t)).sum::<f64>() / r as f64,
        0.999 * abscissa,
    )?;
    Ok(res.root)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_inn() -> InnovationSpec {
        InnovationSpec::new(1.2, 1.0).unwrap()
    }

    // Plain bisection on the literal scalar equation, independent of the
    // crate solver.
    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn innovation_validation() {
        assert!(InnovationSpec::new(1.2, 1.0).is_ok());
        assert!(InnovationSpec::new(1.0, 1.0).is_err());
        assert!(InnovationSpec::new(-1.0, -2.0).is_err());
        assert!(InnovationSpec::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn spec_validation() {
        let inn = paper_inn();
        assert!(ModelSpec::ar1(1.5, inn).validate().is_err());
        assert!(ModelSpec::nlar1(-1.0, inn).validate().is_err());
        assert!(ModelSpec::ma1(-1.0, inn).validate().is_err());
        assert!(ModelSpec::ma1(2.0, inn).validate().is_ok());
        let k = ShiftKernel::linear(vec![1.0; 5]).unwrap();
        assert!(ModelSpec::bernoulli_shift(k.clone(), inn)
            .with_burn_in(2)
            .validate()
            .is_err());
        assert!(ModelSpec::bernoulli_shift(k, inn)
            .with_burn_in(4)
            .validate()
            .is_ok());
        assert!(simulate(&ModelSpec::ar1(1.5, inn), 10, 1).is_err());
        assert!(simulate(&ModelSpec::iid(inn), 1, 1).is_err());
    }

    #[test]
    fn defaults() {
        let inn = paper_inn();
        assert_eq!(ModelSpec::iid(inn).burn_in, 0);
        assert_eq!(ModelSpec::ma1(0.2, inn).burn_in, 1);
        assert_eq!(ModelSpec::ar1(0.2, inn).burn_in, 1000);
        assert_eq!(ModelSpec::nlar1(-0.2, inn).shift_scale, 0.7);
        assert_eq!(ModelSpec::ar1(0.2, inn).shift_scale, 1.0);
    }

    #[test]
    fn iid_mean_within_three_standard_errors() {
        let s = simulate(&ModelSpec::iid(paper_inn()), 10_000, 11).unwrap();
        let target = -(1.0 - 1.0 / 1.2);
        let se = (1.0 / 1.2) / 100.0;
        assert!((s.mean() - target).abs() < 3.0 * se, "{}", s.mean());
    }

    #[test]
    fn ma1_variance_within_three_standard_errors() {
        let a: f64 = 0.2;
        let s = simulate(&ModelSpec::ma1(a, paper_inn()), 10_000, 5).unwrap();
        let n = s.len() as f64;
        let m = s.mean();
        let var = s.values().iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        let target = (1.0 + a * a) / 1.44;
        // Var of the sample variance for exponential innovations (kurtosis 9)
        // is about (9 - 1) sigma^4 / n plus MA(1) correlation corrections; use
        // sqrt(12 / n) * sigma^2 as a generous standard error.
        let se = (12.0 / n).sqrt() * target;
        assert!((var - target).abs() < 3.0 * se, "{var} vs {target}");
    }

    #[test]
    fn zero_coefficient_collapses_to_iid() {
        let inn = paper_inn();
        let iid = simulate(&ModelSpec::iid(inn), 500, 9).unwrap();
        for spec in [
            ModelSpec::ar1(0.0, inn),
            ModelSpec::ma1(0.0, inn),
            ModelSpec::nlar1(0.0, inn).with_shift_scale(1.0),
            ModelSpec::bernoulli_shift(ShiftKernel::linear(vec![1.0]).unwrap(), inn),
        ] {
            let s = simulate(&spec, 500, 9).unwrap();
            assert_eq!(s.values(), iid.values(), "{:?}", spec.kind);
        }
    }

    #[test]
    fn determinism() {
        let spec = ModelSpec::ar1(0.3, paper_inn());
        assert_eq!(
            simulate(&spec, 100, 3).unwrap(),
            simulate(&spec, 100, 3).unwrap()
        );
        assert_ne!(
            simulate(&spec, 100, 3).unwrap(),
            simulate(&spec, 100, 4).unwrap()
        );
    }

    #[test]
    fn ar1_recursion_holds() {
        let inn = paper_inn();
        let iid = simulate(&ModelSpec::iid(inn), 200, 21).unwrap();
        let ar = simulate(&ModelSpec::ar1(0.3, inn), 200, 21).unwrap();
        // Same retained innovations: X_n - a X_{n-1} = ε_n for n >= 2.
        for n in 1..200 {
            let eps = ar.values()[n] - 0.3 * ar.values()[n - 1];
            assert!((eps - iid.values()[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn bernoulli_shift_matches_truncated_ar1_recursion() {
        let inn = paper_inn();
        let kernel = ShiftKernel::linear(vec![1.0, 0.5, 0.25]).unwrap();
        let s = simulate(&ModelSpec::bernoulli_shift(kernel, inn), 50, 2).unwrap();
        let e = simulate(&ModelSpec::iid(inn), 50, 2).unwrap();
        for n in 2..50 {
            let expect = e.values()[n] + 0.5 * e.values()[n - 1] + 0.25 * e.values()[n - 2];
            assert!((s.values()[n] - expect).abs() < 1e-12);
        }
        let custom = ShiftKernel::custom(2, |w| w[0] + w[1].abs())
            .unwrap()
            .with_continuity_coeffs(vec![1.0, 0.5])
            .unwrap();
        assert_eq!(custom.declared_d(), Some(1.5));
        let s = simulate(&ModelSpec::bernoulli_shift(custom, inn), 50, 2).unwrap();
        assert!((s.values()[3] - (e.values()[3] + e.values()[2].abs())).abs() < 1e-12);
        assert!(ShiftKernel::linear(vec![1.0])
            .unwrap()
            .with_continuity_coeffs(vec![0.1, 0.5])
            .is_err());
    }

    #[test]
    fn nlar1_blowup_is_an_error_not_a_sample() {
        let inn = paper_inn();
        let spec = ModelSpec::nlar1(-0.9, inn).with_shift_scale(5.0);
        assert!(matches!(
            simulate(&spec, 10_000, 1),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn w_iid_examples() {
        let w = analytic_w_iid(&paper_inn()).unwrap();
        assert_eq!((w * 100.0).round() / 100.0, 0.38);
        let oracle = bisect(|t| -t + 1.2f64.ln() - (1.2 - t).ln(), 1e-6, 1.1999);
        assert!((w - oracle).abs() < 1e-10);

        let inn2 = InnovationSpec::new(2.0, 1.0).unwrap();
        let oracle = bisect(|t| -t + 2f64.ln() - (2.0 - t).ln(), 1e-6, 1.9999);
        let w2 = analytic_w_iid(&inn2).unwrap();
        assert!((w2 - oracle).abs() < 1e-10);
        assert!((w2 - 1.593_624_260_040_04).abs() < 1e-10);
    }

    #[test]
    fn w_iid_vanishes_at_net_profit_boundary() {
        let mut prev = f64::INFINITY;
        for c in [1.5, 1.1, 1.01, 1.001] {
            let w = analytic_w_iid(&InnovationSpec::new(1.0, c).unwrap()).unwrap();
            assert!(w < prev && w > 0.0);
            prev = w;
        }
        assert!(prev < 0.01);
    }

    #[test]
    fn w_ar1_examples() {
        let inn = paper_inn();
        let iid = analytic_w_iid(&inn).unwrap();
        assert_eq!(
            (analytic_w_ar1(&inn, 0.3).unwrap() * 100.0).round() / 100.0,
            0.26
        );
        assert_eq!(analytic_w_ar1(&inn, 0.0).unwrap(), iid);
        assert!((analytic_w_ar1(&inn, 0.4).unwrap() - 0.6 * iid).abs() < 1e-10);
        assert!(analytic_w_ar1(&inn, 1.0).is_err());
    }

    #[test]
    fn w_ma1_examples() {
        let inn = paper_inn();
        let w = analytic_w_ma1(&inn, 0.2).unwrap();
        assert_eq!((w * 100.0).round() / 100.0, 0.31);
        assert_eq!((w * 1000.0).round() / 1000.0, 0.314);
        assert!((analytic_w_ma1(&inn, 0.0).unwrap() - analytic_w_iid(&inn).unwrap()).abs() < 1e-10);
        // Substitution s = (1 + a) t turns the equation into the iid one.
        assert!((w - analytic_w_iid(&inn).unwrap() / 1.2).abs() < 1e-9);
        assert!(analytic_w_ma1(&inn, -1.0).is_err());
    }

    #[test]
    fn w_r_ma1_examples() {
        let inn = paper_inn();
        let iid = analytic_w_iid(&inn).unwrap();
        assert!((analytic_w_r_ma1(&inn, 0.0, 1).unwrap() - iid).abs() < 1e-10);
        for r in [2, 7, 30] {
            assert!((analytic_w_r_ma1(&inn, 0.0, r).unwrap() - iid).abs() < 1e-9);
        }
        let limit = analytic_w_ma1(&inn, 0.2).unwrap();
        let e8 = (analytic_w_r_ma1(&inn, 0.2, 8).unwrap() - limit).abs();
        let e64 = (analytic_w_r_ma1(&inn, 0.2, 64).unwrap() - limit).abs();
        assert!(e64 < e8);
        // Direct bisection on the product MGF at r = 6.
        let oracle = bisect(|t| ma1_block_cgf(&inn, 0.2, 6, t), 1e-6, 0.999);
        assert!((analytic_w_r_ma1(&inn, 0.2, 6).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn w_r_ar1_tends_to_gerber_value() {
        let inn = paper_inn();
        let gerber = analytic_w_ar1(&inn, 0.3).unwrap();
        let mut prev_err = f64::INFINITY;
        for r in [1, 4, 16, 64, 256] {
            let err = (analytic_w_r_ar1(&inn, 0.3, r).unwrap() - gerber).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 2e-3);
        assert!(
            (analytic_w_r_ar1(&inn, 0.0, 5).unwrap() - analytic_w_iid(&inn).unwrap()).abs() < 1e-9
        );
    }

    #[test]
    fn residuals_are_tiny() {
        let inn = paper_inn();
        let w = analytic_w_iid(&inn).unwrap();
        assert!(inn.log_mgf(w).abs() <= 1e-8);
        let w = analytic_w_ma1(&inn, 0.2).unwrap();
        assert!(inn.log_mgf(1.2 * w).abs() <= 1e-8);
        let w = analytic_w_r_ma1(&inn, 0.2, 5).unwrap();
        assert!(ma1_block_cgf(&inn, 0.2, 5, w).abs() <= 1e-8);
    }

    #[test]
    fn mean_abs_matches_quadrature() {
        let inn = paper_inn();
        // Midpoint rule on the exponential density.
        let h = 1e-4;
        let q: f64 = (0..400_000)
            .map(|i| {
                let x = (i as f64 + 0.5) * h;
                (x - 1.0).abs() * 1.2 * (-1.2 * x).exp() * h
            })
            .sum();
        assert!((inn.mean_abs() - q).abs() < 1e-6);
    }
}
