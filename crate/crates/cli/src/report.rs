//! JSON report types. Field names are part of the output contract and are
//! mirrored by the schema files under `schema/`.

use ruin_adjust_core::adjust::{MonotoneRun, RSelection};
use ruin_adjust_core::limits::{CgfSubadditivity, PairMargin};
use ruin_adjust_core::ruin::{
    DeFinettiPoint, GerberDiagnostic, LundbergCheck, RuinStudy, SlopeFit,
};
use ruin_adjust_core::{AdjustmentEstimate, Error as CoreError, ExistenceReport};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::error_kind;
use crate::model::ModelJson;
use crate::study::McStudySummary;

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Clone, Debug, Serialize)]
pub struct ExistenceJson {
    pub mean_negative: bool,
    pub has_positive: bool,
    pub abscissa_note: &'static str,
    pub verdict: bool,
}

impl From<&ExistenceReport> for ExistenceJson {
    fn from(e: &ExistenceReport) -> Self {
        ExistenceJson {
            mean_negative: e.mean_negative,
            has_positive: e.has_positive,
            abscissa_note: e.abscissa_note.as_str(),
            verdict: e.verdict,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateJson {
    pub w_hat: f64,
    pub r: usize,
    pub k_effective: usize,
    pub k_blocks: usize,
    pub gamma2: f64,
    pub denom: f64,
    pub ci95: [f64; 2],
    pub existence: ExistenceJson,
    pub residual: f64,
    pub solver_iterations: usize,
    pub heuristic_ci: bool,
}

impl From<&AdjustmentEstimate> for EstimateJson {
    fn from(e: &AdjustmentEstimate) -> Self {
        EstimateJson {
            w_hat: e.w_hat,
            r: e.r,
            k_effective: e.k_effective,
            k_blocks: e.k_blocks,
            gamma2: e.gamma2,
            denom: e.denom,
            ci95: [e.ci95.0, e.ci95.1],
            existence: (&e.existence).into(),
            residual: e.residual,
            solver_iterations: e.solver_iterations,
            heuristic_ci: e.heuristic_ci,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FailureJson {
    pub r: usize,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub existence: Option<ExistenceJson>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EstimateResult {
    Ok(EstimateJson),
    Error(FailureJson),
}

impl EstimateResult {
    pub fn from_result(r: usize, res: &Result<AdjustmentEstimate, CoreError>) -> Self {
        match res {
            Ok(e) => EstimateResult::Ok(e.into()),
            Err(e) => EstimateResult::Error(FailureJson {
                r,
                kind: error_kind(e),
                message: e.to_string(),
                existence: match e {
                    CoreError::Existence(rep) => Some(rep.into()),
                    _ => None,
                },
            }),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, EstimateResult::Ok(_))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveMeta {
    pub path: String,
    pub r: usize,
    pub t_max: f64,
    pub points: usize,
    pub crossing: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub input: String,
    pub n: usize,
    pub r: usize,
    pub r_defaulted: bool,
    pub existence: ExistenceJson,
    pub w_i: EstimateResult,
    pub w_d: EstimateResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveMeta>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunJson {
    pub start_r: usize,
    pub end_r: usize,
    pub direction: i8,
}

impl From<&MonotoneRun> for RunJson {
    fn from(m: &MonotoneRun) -> Self {
        RunJson {
            start_r: m.start_r,
            end_r: m.end_r,
            direction: m.direction,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectRReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub input: String,
    pub n: usize,
    pub r_max: usize,
    pub chosen_r: usize,
    pub slack: f64,
    pub warning: bool,
    pub chosen: EstimateJson,
    pub rule_trace: Vec<RunJson>,
    pub w_by_r: Vec<EstimateResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_csv: Option<String>,
}

impl SelectRReport {
    pub fn new(
        input: String,
        n: usize,
        r_max: usize,
        sel: &RSelection,
        trace_csv: Option<String>,
    ) -> Self {
        SelectRReport {
            schema_version: SCHEMA_VERSION,
            command: "select-r",
            input,
            n,
            r_max,
            chosen_r: sel.chosen_r,
            slack: sel.slack,
            warning: sel.warning,
            chosen: sel.chosen().into(),
            rule_trace: sel.rule_trace.iter().map(Into::into).collect(),
            w_by_r: sel
                .w_by_r
                .iter()
                .map(|e| EstimateResult::from_result(e.r, &e.estimate))
                .collect(),
            trace_csv,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct McStudyReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub model: ModelJson,
    pub n: usize,
    pub reps_requested: usize,
    pub failed: usize,
    pub failure_kinds: BTreeMap<String, usize>,
    pub r_mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<usize>,
    pub master_seed: u64,
    pub summary: Option<McStudySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates_csv: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeJson {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points_used: usize,
}

impl From<&SlopeFit> for SlopeJson {
    fn from(s: &SlopeFit) -> Self {
        SlopeJson {
            slope: s.slope,
            intercept: s.intercept,
            stderr: s.stderr,
            points_used: s.points_used,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LundbergJson {
    pub slope: f64,
    pub w_ref: f64,
    pub abs_error: f64,
    pub tol: f64,
    pub pass: bool,
}

impl From<&LundbergCheck> for LundbergJson {
    fn from(l: &LundbergCheck) -> Self {
        LundbergJson {
            slope: l.slope,
            w_ref: l.w_ref,
            abs_error: l.abs_error,
            tol: l.tol,
            pass: l.pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeFinettiJson {
    pub u: f64,
    pub ruin_freq: f64,
    pub bound: f64,
    pub pass: bool,
}

impl From<&DeFinettiPoint> for DeFinettiJson {
    fn from(p: &DeFinettiPoint) -> Self {
        DeFinettiJson {
            u: p.u,
            ruin_freq: p.ruin_freq,
            bound: p.bound,
            pass: p.pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GerberJson {
    pub w: f64,
    pub denominator: Vec<Option<f64>>,
    pub psi: Vec<Option<f64>>,
}

impl From<&GerberDiagnostic> for GerberJson {
    fn from(g: &GerberDiagnostic) -> Self {
        GerberJson {
            w: g.w,
            denominator: g.denominator.clone(),
            psi: g.psi.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RuinReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub model: ModelJson,
    pub seed: u64,
    pub horizon: usize,
    pub paths: usize,
    pub u_grid: Vec<f64>,
    pub ruin_freq: Vec<f64>,
    pub stderr: Vec<f64>,
    pub ruin_time_mean: Vec<Option<f64>>,
    pub solvent_fraction: Vec<f64>,
    pub slope_fit: Option<SlopeJson>,
    pub terminal_mean: Option<f64>,
    pub drifting_down_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lundberg: Option<LundbergJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub de_finetti: Option<Vec<DeFinettiJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gerber: Option<GerberJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

impl RuinReport {
    pub fn new(model: ModelJson, seed: u64, s: &RuinStudy) -> Self {
        RuinReport {
            schema_version: SCHEMA_VERSION,
            command: "ruin",
            model,
            seed,
            horizon: s.horizon,
            paths: s.paths,
            u_grid: s.u_grid.clone(),
            ruin_freq: s.ruin_freq.clone(),
            stderr: s.stderr.clone(),
            ruin_time_mean: s.ruin_time_mean.clone(),
            solvent_fraction: s.solvent_fraction.clone(),
            slope_fit: s.slope_fit.as_ref().map(Into::into),
            terminal_mean: s.terminal_mean,
            drifting_down_fraction: s.drifting_down_fraction,
            lundberg: None,
            de_finetti: None,
            gerber: s.gerber.as_ref().map(Into::into),
            csv: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub input: String,
    pub r: usize,
    pub k_effective: usize,
    pub t_grid: Vec<f64>,
    /// `null` where the empirical MGF overflowed.
    pub values: Vec<Option<f64>>,
    pub bounded: Vec<bool>,
    pub crossing: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairJson {
    pub n: usize,
    pub m: usize,
    pub margin: f64,
    pub z: f64,
}

impl From<&PairMargin> for PairJson {
    fn from(p: &PairMargin) -> Self {
        PairJson {
            n: p.n,
            m: p.m,
            margin: p.margin,
            z: p.z,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubaddReport {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub model: ModelJson,
    pub t: f64,
    pub n_max: usize,
    pub reps: usize,
    pub d_const: f64,
    pub d_source: &'static str,
    pub seed: u64,
    pub log_mgf: Vec<f64>,
    pub pairs_checked: usize,
    pub worst: Option<PairJson>,
    pub violations: usize,
    pub pass: bool,
}

impl SubaddReport {
    pub fn new(model: ModelJson, d_source: &'static str, c: &CgfSubadditivity) -> Self {
        SubaddReport {
            schema_version: SCHEMA_VERSION,
            command: "subadd-check",
            model,
            t: c.config.t,
            n_max: c.config.n_max,
            reps: c.config.reps,
            d_const: c.config.d_const,
            d_source,
            seed: c.config.seed,
            log_mgf: c.log_mgf.clone(),
            pairs_checked: c.pairs_checked,
            worst: c.worst.as_ref().map(Into::into),
            violations: c.violations,
            pass: c.pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateMeta {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub model: ModelJson,
    pub n: usize,
    pub seed: u64,
    pub output: String,
    pub generator: &'static str,
}
