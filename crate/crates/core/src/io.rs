//! CSV and JSON emission, with readers for everything written.
//!
//! Metadata rides in leading `#` comment lines; the CSV body has one header
//! row.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::coverage::{CoverageCurve, Method};
use crate::dist::{Family, FittedDist};
use crate::error::{Error, Result};
use crate::gains::{GainKind, GainSampleSet};
use crate::params::SystemParams;

fn read_text<R: Read>(mut r: R) -> Result<String> {
    let mut s = String::new();
    r.read_to_string(&mut s)?;
    Ok(s)
}

fn comment_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map_while(|l| l.strip_prefix('#'))
        .map(str::trim)
}

fn body_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn meta_error(message: impl Into<String>) -> Error {
    Error::Parse {
        line: 1,
        column: 0,
        message: message.into(),
    }
}

pub fn write_gain_csv<W: Write>(mut w: W, set: &GainSampleSet) -> Result<()> {
    writeln!(
        w,
        "# kind={},n_tx={},n_rx={},seed={}",
        set.kind.as_str(),
        set.n_tx,
        set.n_rx,
        set.seed
    )?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["gain"])?;
    for g in &set.samples {
        csv.serialize(g)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_gain_csv<R: Read>(r: R) -> Result<GainSampleSet> {
    let text = read_text(r)?;
    let meta = comment_lines(&text)
        .next()
        .ok_or_else(|| meta_error("missing `# kind=...` line"))?;
    let (mut kind, mut n_tx, mut n_rx, mut seed) = (None, None, None, None);
    for pair in meta.split(',') {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| meta_error(format!("bad metadata `{pair}`")))?;
        let bad = |_| meta_error(format!("bad value for `{k}`: `{v}`"));
        match k.trim() {
            "kind" => {
                kind = Some(
                    v.parse::<GainKind>()
                        .map_err(|_| meta_error(format!("bad kind `{v}`")))?,
                )
            }
            "n_tx" => n_tx = Some(v.parse::<usize>().map_err(bad)?),
            "n_rx" => n_rx = Some(v.parse::<usize>().map_err(bad)?),
            "seed" => seed = Some(v.parse::<u64>().map_err(bad)?),
            other => return Err(meta_error(format!("unknown metadata key `{other}`"))),
        }
    }
    let samples = body_reader(&text)
        .deserialize::<f64>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    match (kind, n_tx, n_rx, seed) {
        (Some(kind), Some(n_tx), Some(n_rx), Some(seed)) => Ok(GainSampleSet {
            kind,
            n_tx,
            n_rx,
            seed,
            samples,
        }),
        _ => Err(meta_error("metadata needs kind, n_tx, n_rx and seed")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CurveRecord {
    #[serde(rename = "T_dB")]
    t_db: f64,
    coverage: f64,
    method: Method,
    gx_family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stderr: Option<f64>,
}

fn curve_records(curve: &CoverageCurve) -> impl Iterator<Item = CurveRecord> + '_ {
    (0..curve.len()).map(|k| CurveRecord {
        t_db: curve.thresholds_db[k],
        coverage: curve.coverages[k],
        method: curve.method,
        gx_family: curve.gx_family,
        stderr: curve.stderr.as_ref().map(|s| s[k]),
    })
}

/// Columns `T_dB,coverage,method,gx_family`, plus `stderr` for Monte Carlo
/// curves; the parameter snapshot is stored as a JSON comment.
pub fn write_coverage_csv<W: Write>(mut w: W, curve: &CoverageCurve) -> Result<()> {
    writeln!(
        w,
        "# params={}",
        serde_json::to_string(&curve.params_snapshot).map_err(|e| Error::invalid(e.to_string()))?
    )?;
    let mut csv = csv::Writer::from_writer(w);
    for rec in curve_records(curve) {
        csv.serialize(rec)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_coverage_csv<R: Read>(r: R) -> Result<CoverageCurve> {
    let text = read_text(r)?;
    let params: SystemParams = comment_lines(&text)
        .find_map(|l| l.strip_prefix("params="))
        .map(|json| serde_json::from_str(json).map_err(|e| meta_error(e.to_string())))
        .transpose()?
        .unwrap_or_default();
    let records = body_reader(&text)
        .deserialize::<CurveRecord>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let first = records
        .first()
        .ok_or_else(|| meta_error("coverage file has no rows"))?;
    let (method, family) = (first.method, first.gx_family);
    if records
        .iter()
        .any(|r| r.method != method || r.gx_family != family)
    {
        return Err(meta_error("rows mix methods or families"));
    }
    let stderr = if records.iter().all(|r| r.stderr.is_some()) {
        Some(records.iter().filter_map(|r| r.stderr).collect())
    } else {
        None
    };
    CoverageCurve::new(
        records.iter().map(|r| r.t_db).collect(),
        records.iter().map(|r| r.coverage).collect(),
        method,
        family,
        params,
        stderr,
    )
}

/// One row of a multi-curve file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelledPoint {
    pub label: String,
    #[serde(rename = "T_dB")]
    pub t_db: f64,
    pub coverage: f64,
    pub method: Method,
    pub gx_family: Family,
    pub stderr: Option<f64>,
}

/// Several curves in one file, distinguished by a leading `label` column.
pub fn write_curve_set_csv<W: Write>(w: W, curves: &[(String, CoverageCurve)]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for (label, curve) in curves {
        for rec in curve_records(curve) {
            csv.serialize(LabelledPoint {
                label: label.clone(),
                t_db: rec.t_db,
                coverage: rec.coverage,
                method: rec.method,
                gx_family: rec.gx_family,
                stderr: rec.stderr,
            })?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn read_curve_set_csv<R: Read>(r: R) -> Result<Vec<LabelledPoint>> {
    read_records(r)
}

/// Analytic against Monte Carlo at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    #[serde(rename = "T_dB")]
    pub t_db: f64,
    pub analytic: f64,
    pub monte_carlo: f64,
    pub stderr: f64,
    /// `monte_carlo - analytic`.
    pub delta: f64,
}

/// Joins an analytic and a Monte Carlo curve on the same grid.
pub fn compare_curves(
    label: &str,
    analytic: &CoverageCurve,
    mc: &CoverageCurve,
) -> Result<Vec<ComparisonRow>> {
    if analytic.thresholds_db != mc.thresholds_db {
        return Err(Error::invalid("curves are on different threshold grids"));
    }
    let stderr = mc.stderr.clone().unwrap_or_else(|| vec![0.0; mc.len()]);
    Ok((0..analytic.len())
        .map(|k| ComparisonRow {
            label: label.to_string(),
            t_db: analytic.thresholds_db[k],
            analytic: analytic.coverages[k],
            monte_carlo: mc.coverages[k],
            stderr: stderr[k],
            delta: mc.coverages[k] - analytic.coverages[k],
        })
        .collect())
}

pub fn write_comparison_csv<W: Write>(w: W, rows: &[ComparisonRow]) -> Result<()> {
    write_records(w, rows)
}

pub fn read_comparison_csv<R: Read>(r: R) -> Result<Vec<ComparisonRow>> {
    read_records(r)
}

/// Any serializable rows as CSV with a header.
pub fn write_records<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_records<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<Vec<T>> {
    let text = read_text(r)?;
    Ok(body_reader(&text)
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

/// One fitted family with its goodness of fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub dist: FittedDist,
    pub ks: f64,
    pub mean_log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kind: GainKind,
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_samples: usize,
    pub fits: Vec<FitEntry>,
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| match e.io_error_kind() {
        Some(kind) => Error::Io(kind.into()),
        None => Error::invalid(e.to_string()),
    })?;
    writeln!(w)?;
    Ok(())
}

pub fn read_json<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<T> {
    serde_json::from_reader(r).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}
