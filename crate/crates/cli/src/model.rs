//! Model flags shared by the simulating commands.

use clap::{Args, ValueEnum};
use ruin_adjust_core::{InnovationSpec, ModelKind, ModelSpec, ShiftKernel};
use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Iid,
    Ar1,
    Ma1,
    Nlar1,
    /// Finite-window Bernoulli shift with linear weights (`--kernel-weights`).
    Bshift,
}

#[derive(Clone, Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelName::Iid)]
    pub model: ModelName,
    /// Dependence parameter (AR/MA/NLAR coefficient).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    /// Rate of the exponential claim.
    #[arg(long, default_value_t = 1.2)]
    pub theta: f64,
    /// Premium per period.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Discarded warm-up steps; defaults depend on the model.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Innovation scale for the nonlinear AR(1) model.
    #[arg(long)]
    pub shift_scale: Option<f64>,
    /// Comma-separated weights, most recent innovation first.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub kernel_weights: Option<Vec<f64>>,
    /// Comma-separated continuity coefficients of the shift kernel.
    #[arg(long, value_delimiter = ',')]
    pub continuity_coeffs: Option<Vec<f64>>,
}

impl ModelArgs {
    pub fn to_spec(&self) -> Result<ModelSpec, CliError> {
        let inn = InnovationSpec::new(self.theta, self.c)?;
        let mut spec = match self.model {
            ModelName::Iid => ModelSpec::iid(inn),
            ModelName::Ar1 => ModelSpec::ar1(self.a, inn),
            ModelName::Ma1 => ModelSpec::ma1(self.a, inn),
            ModelName::Nlar1 => ModelSpec::nlar1(self.a, inn),
            ModelName::Bshift => {
                let w = self.kernel_weights.clone().ok_or_else(|| {
                    CliError::Usage("--model bshift requires --kernel-weights".into())
                })?;
                let mut k = ShiftKernel::linear(w)?;
                if let Some(d) = &self.continuity_coeffs {
                    k = k.with_continuity_coeffs(d.clone())?;
                }
                ModelSpec::bernoulli_shift(k, inn)
            }
        };
        if self.model != ModelName::Bshift
            && (self.kernel_weights.is_some() || self.continuity_coeffs.is_some())
        {
            return Err(CliError::Usage(
                "kernel flags apply only to --model bshift".into(),
            ));
        }
        if let Some(b) = self.burn_in {
            spec = spec.with_burn_in(b);
        }
        if let Some(s) = self.shift_scale {
            if self.model != ModelName::Nlar1 {
                return Err(CliError::Usage(
                    "--shift-scale applies only to --model nlar1".into(),
                ));
            }
            spec = spec.with_shift_scale(s);
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Serializable description of a model, written into reports and sidecars.
#[derive(Clone, Debug, Serialize)]
pub struct ModelJson {
    pub kind: &'static str,
    pub a: f64,
    pub theta: f64,
    pub c: f64,
    pub burn_in: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuity_coeffs: Option<Vec<f64>>,
}

impl From<&ModelSpec> for ModelJson {
    fn from(spec: &ModelSpec) -> Self {
        let (weights, coeffs) = match &spec.kind {
            ModelKind::BernoulliShift(k) => {
                let w = match k.map() {
                    ruin_adjust_core::processes::KernelMap::Linear(w) => Some(w.clone()),
                    _ => None,
                };
                let d = k.continuity_coeffs();
                (w, (!d.is_empty()).then(|| d.to_vec()))
            }
            _ => (None, None),
        };
        ModelJson {
            kind: spec.kind.name(),
            a: spec.a,
            theta: spec.innovation.theta,
            c: spec.innovation.c,
            burn_in: spec.burn_in,
            shift_scale: matches!(spec.kind, ModelKind::NlAr1).then_some(spec.shift_scale),
            kernel_weights: weights,
            continuity_coeffs: coeffs,
        }
    }
}
