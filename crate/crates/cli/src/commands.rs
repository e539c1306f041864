//! Command definitions and handlers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use ruin_adjust_core::empirical::uniform_grid;
use ruin_adjust_core::limits::{check_cgf_subadditivity, CgfCheckConfig};
use ruin_adjust_core::ruin::{de_finetti_check, DEFAULT_HORIZON};
use ruin_adjust_core::{
    cgf_curve, check_existence, default_block_length, estimate_w_d, estimate_w_i, lundberg_check,
    select_r, simulate, ModelKind, RuinConfig, Sample,
};

use crate::error::{core_exit_code, error_kind, CliError, EXIT_ESTIMATION, EXIT_OK};
use crate::io;
use crate::model::{ModelArgs, ModelJson};
use crate::report::*;
use crate::study::{
    default_target, population_w_r, run_mc_study, simulate_ruin_parallel, summarize, RMode,
    DEFAULT_R_MAX,
};

/// Master seed used when neither `--seed` nor `RUIN_ADJUST_SEED` is set.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "ruin-adjust",
    version,
    about = "Estimate and validate adjustment coefficients of claim-surplus processes",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed.
    #[arg(long, global = true, env = "RUIN_ADJUST_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output path (`-` for stdout). Required by `simulate`.
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format on the main output.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// More progress output on stderr; repeatable.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    /// Suppress warnings.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    /// JSON file mirroring the flag namespace (expanded before parsing).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a sample and write it as single-column CSV.
    Simulate(SimulateArgs),
    /// Estimate the iid and block adjustment coefficients of a sample.
    Estimate(EstimateArgs),
    /// Block estimates over r = 1..r_max and the monotone-run choice of r.
    SelectR(SelectRArgs),
    /// Replicated simulate-and-estimate study.
    McStudy(McStudyArgs),
    /// Monte Carlo ruin frequencies and Lundberg slope.
    Ruin(RuinArgs),
    /// Export the empirical block CGF curve.
    Curve(CurveArgs),
    /// Monte Carlo check of approximate CGF subadditivity.
    SubaddCheck(SubaddArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Single-column CSV with header `x`.
    #[arg(long)]
    pub input: PathBuf,
    /// Block length; defaults to clamp(floor(0.75 ln n), 1, 6).
    #[arg(long)]
    pub r: Option<usize>,
    /// Also write the block CGF curve to this CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Curve range; defaults to 1.5 times the estimate.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct SelectRArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_R_MAX)]
    pub r_max: usize,
    /// Write the `r,w_hat,ci_lo,ci_hi` trace to this CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McStudyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Block length, or `auto` to run the selection rule per replicate.
    #[arg(long, default_value = "6")]
    pub r: String,
    /// Upper end of the grid for `--r auto`.
    #[arg(long, default_value_t = DEFAULT_R_MAX)]
    pub r_max: usize,
    /// Reference value; defaults to the closed-form coefficient.
    #[arg(long)]
    pub target: Option<f64>,
    /// Write the replicate list to this CSV.
    #[arg(long)]
    pub replicates: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RuinArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "5,7.5,10,12.5,15,17.5,20"
    )]
    pub u_grid: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: usize,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// Compare the fitted slope with `-w_ref`.
    #[arg(long)]
    pub w_ref: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    /// Coefficient for the overshoot-corrected ruin formula.
    #[arg(long)]
    pub gerber_w: Option<f64>,
    /// Also write the `u,ruin_freq,stderr,mean_ruin_time` table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct SubaddArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.2)]
    pub t: f64,
    #[arg(long, default_value_t = 32)]
    pub n_max: usize,
    #[arg(long, default_value_t = 4000)]
    pub reps: usize,
    /// Constant D; defaults to the kernel's declared coefficients, else 0.
    #[arg(long)]
    pub d: Option<f64>,
}

struct Ctx<'a> {
    g: &'a GlobalArgs,
}

impl Ctx<'_> {
    fn out(&self) -> Option<&Path> {
        self.g.out.as_deref()
    }

    fn format(&self, default: Format) -> Format {
        self.g.format.unwrap_or(default)
    }

    fn warn(&self, msg: &str) {
        if !self.g.quiet {
            eprintln!("warning: {msg}");
        }
    }

    fn info(&self, msg: &str) {
        if self.g.verbose > 0 {
            eprintln!("{msg}");
        }
    }
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

/// Run a parsed command. `Ok` carries the exit status for runs that still
/// produced their report.
pub fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let ctx = Ctx { g: &cli.global };
    let start = Instant::now();
    let code = match &cli.command {
        Command::Simulate(a) => cmd_simulate(&ctx, a),
        Command::Estimate(a) => cmd_estimate(&ctx, a),
        Command::SelectR(a) => cmd_select_r(&ctx, a),
        Command::McStudy(a) => cmd_mc_study(&ctx, a),
        Command::Ruin(a) => cmd_ruin(&ctx, a),
        Command::Curve(a) => cmd_curve(&ctx, a),
        Command::SubaddCheck(a) => cmd_subadd(&ctx, a),
    }?;
    ctx.info(&format!("done in {:.2?}", start.elapsed()));
    Ok(code)
}

fn cmd_simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<i32, CliError> {
    let spec = a.model.to_spec()?;
    let out = ctx
        .out()
        .ok_or_else(|| CliError::Usage("simulate requires --out".into()))?;
    if ctx.g.format == Some(Format::Json) {
        return Err(CliError::Usage("simulate writes CSV only".into()));
    }
    let sample = simulate(&spec, a.n, ctx.g.seed)?;
    io::write_sample(Some(out), &sample)?;
    if out.as_os_str() != "-" {
        let mut meta_path = out.as_os_str().to_owned();
        meta_path.push(".meta.json");
        let meta = SimulateMeta {
            schema_version: SCHEMA_VERSION,
            command: "simulate",
            model: ModelJson::from(&spec),
            n: a.n,
            seed: ctx.g.seed,
            output: path_string(out),
            generator: "chacha8",
        };
        io::write_json(Some(Path::new(&meta_path)), &meta)?;
    }
    Ok(EXIT_OK)
}

fn first_failure_code(results: &[&EstimateOutcome]) -> i32 {
    results
        .iter()
        .find_map(|r| r.as_ref().err().map(core_exit_code))
        .unwrap_or(EXIT_OK)
}

type EstimateOutcome = Result<ruin_adjust_core::AdjustmentEstimate, ruin_adjust_core::Error>;

fn default_t_max(est: &EstimateOutcome, ctx: &Ctx) -> f64 {
    match est {
        Ok(e) if e.w_hat.is_finite() && e.w_hat > 0.0 => 1.5 * e.w_hat,
        _ => {
            ctx.warn("no estimate available to scale the curve; using t_max = 1");
            1.0
        }
    }
}

fn cmd_estimate(ctx: &Ctx, a: &EstimateArgs) -> Result<i32, CliError> {
    let sample = io::read_sample(&a.input)?;
    let (r, r_defaulted) = match a.r {
        Some(0) => return Err(CliError::Usage("--r must be >= 1".into())),
        Some(r) => (r, false),
        None => (default_block_length(sample.len()), true),
    };
    let w_i = estimate_w_i(&sample);
    let w_d = estimate_w_d(&sample, r);
    let curve = match &a.curve {
        Some(path) => {
            let t_max = a.t_max.unwrap_or_else(|| default_t_max(&w_d, ctx));
            let grid = uniform_grid(t_max, a.points)?;
            let c = cgf_curve(sample.values(), r, &grid)?;
            io::write_curve(Some(path), &c)?;
            Some(CurveMeta {
                path: path_string(path),
                r,
                t_max,
                points: a.points,
                crossing: c.crossing(),
            })
        }
        None => None,
    };
    for (name, res) in [("w_i", &w_i), ("w_d", &w_d)] {
        if let Err(e) = res {
            ctx.warn(&format!("{name}: {e}"));
        }
    }
    let code = first_failure_code(&[&w_i, &w_d]);
    let report = EstimateReport {
        schema_version: SCHEMA_VERSION,
        command: "estimate",
        input: path_string(&a.input),
        n: sample.len(),
        r,
        r_defaulted,
        existence: (&check_existence(sample.values())).into(),
        w_i: EstimateResult::from_result(1, &w_i),
        w_d: EstimateResult::from_result(r, &w_d),
        curve,
    };
    match ctx.format(Format::Json) {
        Format::Json => io::write_json(ctx.out(), &report)?,
        Format::Csv => write_estimate_csv(ctx.out(), &[("w_i", 1, &w_i), ("w_d", r, &w_d)])?,
    }
    Ok(code)
}

fn write_estimate_csv(
    out: Option<&Path>,
    rows: &[(&str, usize, &EstimateOutcome)],
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(io::open_output(out)?);
    let err = |e: csv::Error| CliError::io("writing CSV", e);
    w.write_record(["estimator", "status", "r", "w_hat", "ci_lo", "ci_hi"])
        .map_err(err)?;
    for (name, r, res) in rows {
        let rec = match res {
            Ok(e) => [
                name.to_string(),
                "ok".into(),
                r.to_string(),
                io::fmt_f64(e.w_hat),
                io::fmt_f64(e.ci95.0),
                io::fmt_f64(e.ci95.1),
            ],
            Err(e) => [
                name.to_string(),
                error_kind(e).into(),
                r.to_string(),
                String::new(),
                String::new(),
                String::new(),
            ],
        };
        w.write_record(rec).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io("writing CSV", e))
}

fn cmd_select_r(ctx: &Ctx, a: &SelectRArgs) -> Result<i32, CliError> {
    if a.r_max < 2 {
        return Err(CliError::Usage(format!(
            "--r-max must be >= 2, got {}",
            a.r_max
        )));
    }
    let sample = io::read_sample(&a.input)?;
    let sel = select_r(&sample, a.r_max)?;
    if sel.warning {
        ctx.warn("selection rule stopped at r = 1; the trace is not monotone at the start");
    }
    if let Some(p) = &a.trace {
        io::write_trace(Some(p), &sel)?;
    }
    match ctx.format(Format::Json) {
        Format::Json => {
            let report = SelectRReport::new(
                path_string(&a.input),
                sample.len(),
                a.r_max,
                &sel,
                a.trace.as_deref().map(path_string),
            );
            io::write_json(ctx.out(), &report)?
        }
        Format::Csv => io::write_trace(ctx.out(), &sel)?,
    }
    Ok(EXIT_OK)
}

fn parse_r_mode(r: &str, r_max: usize) -> Result<RMode, CliError> {
    if r.eq_ignore_ascii_case("auto") {
        if r_max < 2 {
            return Err(CliError::Usage(format!(
                "--r-max must be >= 2, got {r_max}"
            )));
        }
        return Ok(RMode::Auto { r_max });
    }
    match r.parse::<usize>() {
        Ok(r) if r >= 1 => Ok(RMode::Fixed(r)),
        _ => Err(CliError::Usage(format!(
            "--r must be a positive integer or `auto`, got `{r}`"
        ))),
    }
}

fn cmd_mc_study(ctx: &Ctx, a: &McStudyArgs) -> Result<i32, CliError> {
    let spec = a.model.to_spec()?;
    if a.reps < 2 {
        return Err(CliError::Usage(format!(
            "--reps must be >= 2, got {}",
            a.reps
        )));
    }
    let mode = parse_r_mode(&a.r, a.r_max)?;
    let outcomes = run_mc_study(&spec, a.n, a.reps, mode, ctx.g.seed);
    let mut failure_kinds = BTreeMap::new();
    for o in &outcomes {
        if let Err(e) = &o.result {
            *failure_kinds.entry(error_kind(e).to_string()).or_insert(0) += 1;
        }
    }
    let failed: usize = failure_kinds.values().sum();
    let mut warnings = Vec::new();
    if failed > 0 {
        warnings.push(format!(
            "{failed} of {} replicates failed and were excluded",
            a.reps
        ));
    }
    let target = match a.target {
        Some(t) => Some((t, "user")),
        None => default_target(&spec).map(|t| (t, "closed_form")),
    };
    let summary = summarize(&outcomes, target, population_w_r(&spec, mode));
    match &summary {
        None => warnings.push("fewer than two replicates succeeded; no summary".into()),
        Some(s) if s.wide_ci => warnings.push(format!(
            "only {} replicates; the interval for the mean is wide",
            s.reps
        )),
        _ => {}
    }
    for w in &warnings {
        ctx.warn(w);
    }
    if let Some(p) = &a.replicates {
        io::write_replicates(Some(p), &outcomes)?;
    }
    let (r_mode, r, r_max) = match mode {
        RMode::Fixed(r) => ("fixed", Some(r), None),
        RMode::Auto { r_max } => ("auto", None, Some(r_max)),
    };
    let ok = summary.is_some();
    let report = McStudyReport {
        schema_version: SCHEMA_VERSION,
        command: "mc-study",
        model: ModelJson::from(&spec),
        n: a.n,
        reps_requested: a.reps,
        failed,
        failure_kinds,
        r_mode,
        r,
        r_max,
        master_seed: ctx.g.seed,
        summary,
        replicates_csv: a.replicates.as_deref().map(path_string),
        warnings,
    };
    match ctx.format(Format::Json) {
        Format::Json => io::write_json(ctx.out(), &report)?,
        Format::Csv => io::write_replicates(ctx.out(), &outcomes)?,
    }
    Ok(if ok { EXIT_OK } else { EXIT_ESTIMATION })
}

fn cmd_ruin(ctx: &Ctx, a: &RuinArgs) -> Result<i32, CliError> {
    let spec = a.model.to_spec()?;
    let mut cfg = RuinConfig::new(a.u_grid.clone(), a.horizon, a.paths, ctx.g.seed)?;
    if let Some(w) = a.gerber_w {
        cfg = cfg.with_gerber_w(w);
        cfg.validate()?;
    }
    if let Some(w) = a.w_ref {
        if !(w.is_finite() && w > 0.0) {
            return Err(CliError::Usage("--w-ref must be positive".into()));
        }
    }
    ctx.info(&format!(
        "simulating {} paths of length {}",
        cfg.paths, cfg.horizon
    ));
    let study = simulate_ruin_parallel(&spec, &cfg)?;
    let mut report = RuinReport::new(ModelJson::from(&spec), ctx.g.seed, &study);
    let mut code = EXIT_OK;
    if let Some(w) = a.w_ref {
        match lundberg_check(&study, w, a.tol) {
            Ok(l) => report.lundberg = Some((&l).into()),
            Err(e) => {
                ctx.warn(&format!("Lundberg check: {e}"));
                code = EXIT_ESTIMATION;
            }
        }
        report.de_finetti = Some(de_finetti_check(&study, w).iter().map(Into::into).collect());
    }
    if let Some(p) = &a.csv {
        io::write_ruin(Some(p), &study)?;
        report.csv = Some(path_string(p));
    }
    match ctx.format(Format::Json) {
        Format::Json => io::write_json(ctx.out(), &report)?,
        Format::Csv => io::write_ruin(ctx.out(), &study)?,
    }
    Ok(code)
}

fn cmd_curve(ctx: &Ctx, a: &CurveArgs) -> Result<i32, CliError> {
    if a.r == 0 {
        return Err(CliError::Usage("--r must be >= 1".into()));
    }
    let sample: Sample = io::read_sample(&a.input)?;
    let t_max = match a.t_max {
        Some(t) => t,
        None => default_t_max(&estimate_w_d(&sample, a.r), ctx),
    };
    let grid = uniform_grid(t_max, a.points)?;
    let c = cgf_curve(sample.values(), a.r, &grid)?;
    match ctx.format(Format::Csv) {
        Format::Csv => io::write_curve(ctx.out(), &c)?,
        Format::Json => {
            let report = CurveReport {
                schema_version: SCHEMA_VERSION,
                command: "curve",
                input: path_string(&a.input),
                r: c.r,
                k_effective: c.k_effective,
                t_grid: c.t_grid.clone(),
                values: c
                    .values
                    .iter()
                    .zip(&c.bounded)
                    .map(|(v, b)| b.then_some(*v))
                    .collect(),
                bounded: c.bounded.clone(),
                crossing: c.crossing(),
            };
            io::write_json(ctx.out(), &report)?
        }
    }
    Ok(EXIT_OK)
}

fn cmd_subadd(ctx: &Ctx, a: &SubaddArgs) -> Result<i32, CliError> {
    let spec = a.model.to_spec()?;
    let declared = match &spec.kind {
        ModelKind::BernoulliShift(k) => k.declared_d(),
        _ => None,
    };
    let (d_const, d_source) = match (a.d, declared) {
        (Some(d), _) => (d, "user"),
        (None, Some(d)) => (d, "declared"),
        (None, None) => (0.0, "zero"),
    };
    let cfg = CgfCheckConfig {
        t: a.t,
        n_max: a.n_max,
        reps: a.reps,
        d_const,
        seed: ctx.g.seed,
    };
    let res = check_cgf_subadditivity(&spec, &cfg)?;
    if !res.pass {
        ctx.warn(&format!(
            "{} pairs violate the bound beyond 3 standard errors",
            res.violations
        ));
    }
    let report = SubaddReport::new(ModelJson::from(&spec), d_source, &res);
    match ctx.format(Format::Json) {
        Format::Json => io::write_json(ctx.out(), &report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::open_output(ctx.out())?);
            let err = |e: csv::Error| CliError::io("writing CSV", e);
            w.write_record(["n", "log_mgf"]).map_err(err)?;
            for (i, v) in res.log_mgf.iter().enumerate() {
                w.write_record([(i + 1).to_string(), io::fmt_f64(*v)])
                    .map_err(err)?;
            }
            w.flush().map_err(|e| CliError::io("writing CSV", e))?;
        }
    }
    Ok(EXIT_OK)
}
