//! CSV and JSON file formats.
//!
//! Samples are a single column with header `x`, one value per row, written in
//! the shortest decimal form that parses back to the same `f64`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ruin_adjust_core::adjust::RSelection;
use ruin_adjust_core::empirical::CgfCurve;
use ruin_adjust_core::ruin::RuinStudy;
use ruin_adjust_core::{Error as CoreError, Sample, SampleOrigin};
use serde::Serialize;

use crate::error::CliError;
use crate::study::ReplicateOutcome;

/// `-` selects standard output.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) if p.as_os_str() == "-" => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let f = File::create(p)
                .map_err(|e| CliError::io(format!("cannot create {}", p.display()), e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = open_output(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io("writing JSON", e))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io("writing JSON", e))
}

fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    Ok(csv::Writer::from_writer(open_output(path)?))
}

fn csv_err(e: impl std::fmt::Display) -> CliError {
    CliError::io("writing CSV", e)
}

/// Shortest round-trip representation; `inf`/`-inf`/`NaN` for non-finite values.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn read_sample(path: &Path) -> Result<Sample, CliError> {
    let ctx = || format!("reading {}", path.display());
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::io(ctx(), e))?;
    let headers = rdr.headers().map_err(|e| CliError::io(ctx(), e))?.clone();
    if headers.len() != 1 || &headers[0] != "x" {
        return Err(CliError::io(
            ctx(),
            format!(
                "expected a single column with header `x`, found [{}]; timestamps and \
                 multivariate inputs are not supported, export the per-period gains/losses \
                 as one column named x",
                headers.iter().collect::<Vec<_>>().join(", ")
            ),
        ));
    }
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::io(ctx(), e))?;
        let field = rec.get(0).unwrap_or("");
        let v: f64 = field.parse().map_err(|_| {
            CliError::io(ctx(), format!("row {}: `{field}` is not a number", i + 2))
        })?;
        values.push(v);
    }
    Sample::new(
        values,
        SampleOrigin::Ingested {
            source: path.display().to_string(),
        },
    )
    .map_err(|e| match e {
        CoreError::NonFinite { index } => {
            CliError::io(ctx(), format!("row {}: value is not finite", index + 2))
        }
        other => CliError::io(ctx(), other),
    })
}

pub fn write_sample(path: Option<&Path>, sample: &Sample) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["x"]).map_err(csv_err)?;
    for &v in sample.values() {
        w.write_record([fmt_f64(v)]).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_curve(path: Option<&Path>, curve: &CgfCurve) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "value", "bounded"]).map_err(csv_err)?;
    for i in 0..curve.t_grid.len() {
        w.write_record([
            fmt_f64(curve.t_grid[i]),
            fmt_f64(curve.values[i]),
            curve.bounded[i].to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_ruin(path: Option<&Path>, study: &RuinStudy) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["u", "ruin_freq", "stderr", "mean_ruin_time"])
        .map_err(csv_err)?;
    for i in 0..study.u_grid.len() {
        w.write_record([
            fmt_f64(study.u_grid[i]),
            fmt_f64(study.ruin_freq[i]),
            fmt_f64(study.stderr[i]),
            fmt_opt(study.ruin_time_mean[i]),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_trace(path: Option<&Path>, sel: &RSelection) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["r", "w_hat", "ci_lo", "ci_hi"])
        .map_err(csv_err)?;
    for e in &sel.w_by_r {
        let est = e.estimate.as_ref().ok();
        w.write_record([
            e.r.to_string(),
            fmt_opt(est.map(|x| x.w_hat)),
            fmt_opt(est.map(|x| x.ci95.0)),
            fmt_opt(est.map(|x| x.ci95.1)),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_replicates(path: Option<&Path>, reps: &[ReplicateOutcome]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "replicate",
        "seed",
        "status",
        "r",
        "w_hat",
        "ci_lo",
        "ci_hi",
    ])
    .map_err(csv_err)?;
    for rep in reps {
        let row = match &rep.result {
            Ok(ok) => [
                rep.index.to_string(),
                rep.seed.to_string(),
                "ok".to_string(),
                ok.r.to_string(),
                fmt_f64(ok.w_hat),
                fmt_f64(ok.ci95.0),
                fmt_f64(ok.ci95.1),
            ],
            Err(e) => [
                rep.index.to_string(),
                rep.seed.to_string(),
                crate::error::error_kind(e).to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
        };
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_repr_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 12345.678, f64::MIN_POSITIVE, -0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }
}
