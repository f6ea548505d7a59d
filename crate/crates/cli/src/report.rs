//! Per-query report rows, their CSV and JSON-lines encodings, and
//! aggregation across runs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA: &str = "dyncluster-report/1";
pub const COLUMNS: [&str; 8] = ["t", "branch", "ell", "ari", "max_phi", "wall_ms", "gap_full", "gap_contracted"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: header {got:?} does not match schema {SCHEMA}")]
    SchemaMismatch { path: String, got: Vec<String> },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One row per query record. Optional fields are empty in CSV and `null`
/// in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub t: usize,
    pub branch: String,
    pub ell: usize,
    pub ari: Option<f64>,
    pub max_phi: f64,
    pub wall_ms: f64,
    pub gap_full: Option<f64>,
    pub gap_contracted: Option<f64>,
}

/// Run parameters written next to a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub schema: String,
    pub mode: String,
    pub tau: f64,
    pub gamma: f64,
    pub seed: u64,
    pub k_max: usize,
    pub tol: f64,
    pub stream: String,
}

/// Streams rows to `<base>.csv` and `<base>.jsonl` as they are produced, so
/// that a failed run leaves a valid partial report.
pub struct ReportWriter {
    csv: csv::Writer<std::fs::File>,
    jsonl: std::io::BufWriter<std::fs::File>,
}

impl ReportWriter {
    pub fn create(base: &Path, meta: &ReportMeta) -> Result<Self, ReportError> {
        let mut csv = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(base.with_extension("csv"))?;
        csv.write_record(COLUMNS)?;
        csv.flush()?;
        let jsonl = std::io::BufWriter::new(std::fs::File::create(base.with_extension("jsonl"))?);
        std::fs::write(base.with_extension("meta.json"), serde_json::to_string_pretty(meta)? + "\n")?;
        Ok(ReportWriter { csv, jsonl })
    }

    pub fn push(&mut self, row: &ReportRow) -> Result<(), ReportError> {
        self.csv.serialize(row)?;
        self.csv.flush()?;
        serde_json::to_writer(&mut self.jsonl, row)?;
        self.jsonl.write_all(b"\n")?;
        self.jsonl.flush()?;
        Ok(())
    }
}

pub fn read_csv(path: &Path) -> Result<Vec<ReportRow>, ReportError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(ReportError::SchemaMismatch {
            path: path.display().to_string(),
            got: header,
        });
    }
    rdr.deserialize().map(|r| r.map_err(ReportError::from)).collect()
}

#[derive(Default)]
struct Acc {
    values: Vec<f64>,
}

impl Acc {
    fn push(&mut self, x: Option<f64>) {
        if let Some(x) = x.filter(|x| x.is_finite()) {
            self.values.push(x);
        }
    }

    /// Mean and sample standard deviation; a single value has deviation 0.
    fn stats(&self) -> (Option<f64>, Option<f64>) {
        let n = self.values.len();
        if n == 0 {
            return (None, None);
        }
        let mean = self.values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return (Some(mean), Some(0.0));
        }
        let var = self.values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (Some(mean), Some(var.sqrt()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub query: usize,
    pub runs: usize,
    pub t_mean: Option<f64>,
    pub ell_mean: Option<f64>,
    pub ari_mean: Option<f64>,
    pub ari_std: Option<f64>,
    pub wall_ms_mean: Option<f64>,
    pub wall_ms_std: Option<f64>,
    pub gap_full_mean: Option<f64>,
    pub gap_full_std: Option<f64>,
    pub gap_contracted_mean: Option<f64>,
    pub gap_contracted_std: Option<f64>,
}

/// Aggregates reports by query position: the i-th query of every run forms
/// one group.
pub fn summarize(reports: &[Vec<ReportRow>]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<usize, [Acc; 6]> = BTreeMap::new();
    let mut runs: BTreeMap<usize, usize> = BTreeMap::new();
    for rows in reports {
        for (i, r) in rows.iter().enumerate() {
            let g = groups.entry(i).or_default();
            g[0].push(Some(r.t as f64));
            g[1].push(Some(r.ell as f64));
            g[2].push(r.ari);
            g[3].push(Some(r.wall_ms));
            g[4].push(r.gap_full);
            g[5].push(r.gap_contracted);
            *runs.entry(i).or_default() += 1;
        }
    }
    groups
        .into_iter()
        .map(|(i, g)| {
            let (ari_mean, ari_std) = g[2].stats();
            let (wall_ms_mean, wall_ms_std) = g[3].stats();
            let (gap_full_mean, gap_full_std) = g[4].stats();
            let (gap_contracted_mean, gap_contracted_std) = g[5].stats();
            SummaryRow {
                query: i,
                runs: runs[&i],
                t_mean: g[0].stats().0,
                ell_mean: g[1].stats().0,
                ari_mean,
                ari_std,
                wall_ms_mean,
                wall_ms_std,
                gap_full_mean,
                gap_full_std,
                gap_contracted_mean,
                gap_contracted_std,
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: usize, ari: f64, ms: f64) -> ReportRow {
        ReportRow {
            t,
            branch: "slow".into(),
            ell: 3,
            ari: Some(ari),
            max_phi: 0.1,
            wall_ms: ms,
            gap_full: None,
            gap_contracted: Some(4.0),
        }
    }

    fn meta() -> ReportMeta {
        ReportMeta {
            schema: SCHEMA.into(),
            mode: "dynamic".into(),
            tau: 3.0,
            gamma: 1.5,
            seed: 0,
            k_max: 64,
            tol: 1e-8,
            stream: "s.txt".into(),
        }
    }

    #[test]
    fn csv_and_jsonl_agree() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("run");
        let rows = vec![row(1, 1.0, 2.5), row(40, 0.9, 3.0)];
        let mut w = ReportWriter::create(&base, &meta()).unwrap();
        for r in &rows {
            w.push(r).unwrap();
        }
        drop(w);
        assert_eq!(read_csv(&base.with_extension("csv")).unwrap(), rows);
        let text = std::fs::read_to_string(base.with_extension("jsonl")).unwrap();
        let back: Vec<ReportRow> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(back, rows);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        let keys: Vec<&str> = first.as_object().unwrap().keys().map(String::as_str).collect();
        let mut want = COLUMNS.to_vec();
        want.sort();
        let mut got = keys.clone();
        got.sort();
        assert_eq!(got, want);
        let header = std::fs::read_to_string(base.with_extension("csv")).unwrap();
        assert!(header.starts_with("t,branch,ell,ari,max_phi,wall_ms,gap_full,gap_contracted\n"));
    }

    #[test]
    fn single_report_summary_is_itself() {
        let rows = vec![row(1, 0.8, 2.0), row(5, 0.6, 4.0)];
        let s = summarize(std::slice::from_ref(&rows));
        assert_eq!(s.len(), 2);
        for (r, x) in rows.iter().zip(&s) {
            assert_eq!(x.ari_mean, r.ari);
            assert_eq!(x.ari_std, Some(0.0));
            assert_eq!(x.wall_ms_mean, Some(r.wall_ms));
            assert_eq!(x.gap_full_mean, None);
            assert_eq!(x.gap_contracted_std, Some(0.0));
        }
    }

    #[test]
    fn identical_reports_have_zero_spread() {
        let rows = vec![row(1, 0.7, 2.0)];
        let s = summarize(&[rows.clone(), rows]);
        assert_eq!(s[0].runs, 2);
        assert_eq!(s[0].ari_std, Some(0.0));
        assert_eq!(s[0].wall_ms_std, Some(0.0));
    }

    #[test]
    fn mean_and_sample_deviation() {
        let s = summarize(&[vec![row(1, 0.5, 1.0)], vec![row(1, 1.0, 3.0)]]);
        assert_eq!(s[0].ari_mean, Some(0.75));
        assert!((s[0].wall_ms_std.unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "t,branch\n1,slow\n").unwrap();
        assert!(matches!(read_csv(&p), Err(ReportError::SchemaMismatch { .. })));
    }
}
