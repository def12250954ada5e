//! Rendering of data files. Every file starts with the tool version and the
//! resolved configuration; nothing time-dependent goes into them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{LabError, Result};
use crate::experiment::{CardinalityRow, ConvergenceRow, ExperimentConfig, TrialOutcome, W2Row};
use crate::moments::MomentReport;
use crate::spectra::EsdSummary;
use crate::trace_validate::ValidationReport;
use crate::VERSION;

/// A named output file and its contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

impl OutputFile {
    fn new(name: &str, contents: String) -> Self {
        OutputFile {
            name: name.to_string(),
            contents,
        }
    }
}

/// 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_header(cfg: &ExperimentConfig, columns: &str) -> String {
    format!(
        "# lsdlab {VERSION}\n# config {}\n{columns}\n",
        serde_json::to_string(&cfg.provenance()).expect("config serializes")
    )
}

fn json_document(cfg: &ExperimentConfig, body: Value) -> String {
    let mut doc = json!({ "version": VERSION, "config": cfg.provenance() });
    if let (Some(doc), Value::Object(body)) = (doc.as_object_mut(), body) {
        doc.extend(body);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

pub fn eigenvalues_csv(cfg: &ExperimentConfig, trials: &[TrialOutcome]) -> String {
    let mut out = csv_header(cfg, "trial,index,eigenvalue");
    for (t, trial) in trials.iter().enumerate() {
        for (k, v) in trial.eigenvalues.iter().flatten().enumerate() {
            let _ = writeln!(out, "{t},{k},{}", real(*v));
        }
    }
    out
}

pub fn histogram_json(cfg: &ExperimentConfig, pooled: &EsdSummary) -> String {
    json_document(
        cfg,
        json!({
            "eigenvalue_count": pooled.n,
            "edges": pooled.histogram.edges,
            "counts": pooled.histogram.counts,
            "moments": pooled.empirical_moments,
        }),
    )
}

pub fn convergence_csv(cfg: &ExperimentConfig, rows: &[ConvergenceRow], w2: &[Option<W2Row>]) -> String {
    let mut out = csv_header(
        cfg,
        "n,h,trials,mean,std,variance,beta,beta_se,z,w2_sq_mean,w2_bound_mean,w2_max_excess,w2_bound_holds",
    );
    for r in rows {
        let w = w2.iter().flatten().find(|w| w.n == r.n);
        let (wm, bm, ex, holds) = match w {
            Some(w) => (real(w.w2_sq_mean), real(w.bound_mean), real(w.max_excess), w.holds.to_string()),
            None => ("NaN".into(), "NaN".into(), "NaN".into(), "NA".into()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{wm},{bm},{ex},{holds}",
            r.n,
            r.h,
            r.trials,
            real(r.mean),
            real(r.std),
            real(r.variance()),
            real(r.beta),
            real(r.beta_se),
            real(r.z),
        );
    }
    out
}

pub fn moment_rows(report: &MomentReport) -> Value {
    let rows: Vec<Value> = report
        .moments
        .iter()
        .map(|r| match &r.gamma {
            Some(g) => json!({
                "h": r.h,
                "beta": r.beta,
                "se": r.std_error,
                "cardinality": r.cardinality.as_ref().map(|c| c.to_string()),
                "method": g.method.name(),
                "gamma": g.value,
                "gamma_se": g.std_error,
                "bias_bound": r.bias_bound(),
                "samples_or_gridsize": g.samples_or_gridsize,
                "partitions": g.partitions,
            }),
            None => json!({
                "h": r.h,
                "beta": r.beta,
                "se": r.std_error,
                "cardinality": Value::Null,
                "method": "exact",
            }),
        })
        .collect();
    json!({ "kind": report.kind, "m": report.m, "rows": rows })
}

pub fn moments_json(cfg: &ExperimentConfig, report: &MomentReport) -> String {
    json_document(cfg, moment_rows(report))
}

pub fn cardinality_csv(cfg: &ExperimentConfig, rows: &[CardinalityRow]) -> String {
    let brute = rows.iter().any(|r| r.brute_toeplitz.is_some());
    let columns = if brute {
        "p,m,card_toeplitz,card_hankel,brute_toeplitz,brute_hankel,match"
    } else {
        "p,m,card_toeplitz,card_hankel,match"
    };
    let mut out = csv_header(cfg, columns);
    for r in rows {
        let _ = write!(out, "{},{},{},{}", r.p, r.m, r.toeplitz, r.hankel);
        if brute {
            let show = |b: &Option<num_bigint::BigUint>| b.as_ref().map_or("NA".to_string(), |v| v.to_string());
            let _ = write!(out, ",{},{}", show(&r.brute_toeplitz), show(&r.brute_hankel));
        }
        let _ = writeln!(out, ",{}", r.matches());
    }
    out
}

pub fn validate_json(cfg: &ExperimentConfig, report: &ValidationReport) -> String {
    json_document(cfg, serde_json::to_value(report).expect("report serializes"))
}

/// Writes `files` into `dir` plus a `manifest.json` carrying the only timestamp.
pub fn write_outputs(dir: &Path, command: &str, files: &[OutputFile]) -> Result<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| LabError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    for f in files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.contents).map_err(io(&path))?;
        written.push(path);
    }
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let manifest = json!({
        "version": VERSION,
        "command": command,
        "files": files.iter().map(|f| f.name.as_str()).collect::<Vec<_>>(),
        "timestamp_unix": stamp,
    });
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(io(&path))?;
    written.push(path);
    Ok(written)
}

pub fn simulate_files(cfg: &ExperimentConfig, out: &crate::experiment::SimulationOutput) -> Vec<OutputFile> {
    let mut files = Vec::new();
    if let Some(pooled) = &out.pooled {
        files.push(OutputFile::new("eigenvalues.csv", eigenvalues_csv(cfg, &out.trials)));
        files.push(OutputFile::new("histogram.json", histogram_json(cfg, pooled)));
    }
    files.push(OutputFile::new(
        "convergence.csv",
        convergence_csv(cfg, &out.rows, std::slice::from_ref(&out.w2)),
    ));
    files
}

pub fn convergence_files(cfg: &ExperimentConfig, out: &crate::experiment::ConvergenceOutput) -> Vec<OutputFile> {
    vec![OutputFile::new("convergence.csv", convergence_csv(cfg, &out.rows, &out.w2))]
}

pub fn moments_files(cfg: &ExperimentConfig, report: &MomentReport) -> Vec<OutputFile> {
    vec![OutputFile::new("moments.json", moments_json(cfg, report))]
}

pub fn cardinality_files(cfg: &ExperimentConfig, rows: &[CardinalityRow]) -> Vec<OutputFile> {
    vec![OutputFile::new("cardinality.csv", cardinality_csv(cfg, rows))]
}

pub fn validate_files(cfg: &ExperimentConfig, report: &ValidationReport) -> Vec<OutputFile> {
    vec![OutputFile::new("validate.json", validate_json(cfg, report))]
}
