//! Many configurations with bounded parallelism, then one aggregate report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::io::{Artifacts, SCHEMA_VERSION};
use crate::run::{run_path, RunReport};

/// Smallest observed order a refinement ladder must reach.
pub const MIN_ORDER: f64 = 1.9;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("bad pattern `{pattern}`: {message}")]
    Pattern { pattern: String, message: String },
    #[error("no configuration matches `{0}`")]
    Empty(String),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Serialize)]
pub struct ChildResult {
    pub config: PathBuf,
    pub output: PathBuf,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RunReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Ladder {
    pub oracle: String,
    pub spacings: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log spacing`.
    pub order: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub pattern: String,
    pub runs: Vec<ChildResult>,
    pub ladders: Vec<Ladder>,
    pub matched: usize,
    pub total: usize,
    pub all_matched: bool,
}

pub fn expand(pattern: &str) -> Result<Vec<PathBuf>, SweepError> {
    let paths = glob::glob(pattern).map_err(|e| SweepError::Pattern { pattern: pattern.into(), message: e.to_string() })?;
    let mut out: Vec<PathBuf> = paths.filter_map(Result::ok).filter(|p| p.is_file()).collect();
    out.sort();
    if out.is_empty() {
        return Err(SweepError::Empty(pattern.into()));
    }
    Ok(out)
}

/// Slope of the least-squares line through `(log h, log e)`.
pub fn observed_order(spacings: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Group reports that carry the same oracle and fit an order when at least
/// three distinct spacings are present.
pub fn ladders(reports: &[&RunReport]) -> Vec<Ladder> {
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in reports {
        if let Some(o) = &r.oracle {
            if o.error > 0.0 && o.error.is_finite() {
                groups.entry(o.name.clone()).or_default().push((o.spacing, o.error));
            }
        }
    }
    groups
        .into_iter()
        .filter_map(|(oracle, mut pts)| {
            pts.sort_by(|a, b| b.0.total_cmp(&a.0));
            pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-12 * b.0);
            if pts.len() < 3 {
                return None;
            }
            let spacings: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let errors: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let order = observed_order(&spacings, &errors);
            Some(Ladder { oracle, spacings, errors, order, ok: order >= MIN_ORDER })
        })
        .collect()
}

/// Run every configuration matching `pattern` with at most `jobs` workers.
/// Each run writes into `out/<config stem>`.
pub fn sweep(pattern: &str, out: &Path, jobs: usize) -> Result<SweepReport, SweepError> {
    let configs = expand(pattern)?;
    let jobs = jobs.max(1).min(configs.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<ChildResult>>> = Mutex::new(vec![None; configs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(config) = configs.get(i) else { break };
                let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| format!("run{i}"));
                let output = out.join(stem);
                let child = match run_path(config, &output, &[]) {
                    Ok(report) => ChildResult { config: config.clone(), output, ok: report.all_matched, error: None, report: Some(report) },
                    Err(e) => ChildResult { config: config.clone(), output, ok: false, error: Some(e.to_string()), report: None },
                };
                results.lock().unwrap_or_else(|p| p.into_inner())[i] = Some(child);
            });
        }
    });
    let runs: Vec<ChildResult> = results.into_inner().unwrap_or_else(|p| p.into_inner()).into_iter().flatten().collect();
    let reports: Vec<&RunReport> = runs.iter().filter_map(|r| r.report.as_ref()).collect();
    let ladders = ladders(&reports);
    let matched = runs.iter().filter(|r| r.ok).count();
    let all_matched = matched == runs.len() && ladders.iter().all(|l| l.ok);
    let report = SweepReport {
        schema_version: SCHEMA_VERSION,
        pattern: pattern.into(),
        total: runs.len(),
        runs,
        ladders,
        matched,
        all_matched,
    };
    let mut art = Artifacts::new(out)?;
    art.write_json("aggregate.json", &report)?;
    art.finalize()?;
    Ok(report)
}

pub fn sweep_table(report: &SweepReport) -> String {
    let mut s = format!("{:<32} {:<18} {:<8} {}\n", "config", "scenario", "result", "monitors");
    for r in &report.runs {
        let name = r.config.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        match (&r.report, &r.error) {
            (Some(rep), _) => {
                let monitors: Vec<String> = rep.verdicts.iter().map(|v| format!("{}={}", v.monitor, v.verdict)).collect();
                let result = if r.ok { "ok" } else { "MISMATCH" };
                s.push_str(&format!("{name:<32} {:<18} {result:<8} {}\n", rep.scenario.name, monitors.join(" ")));
            }
            (None, Some(e)) => s.push_str(&format!("{name:<32} {:<18} {:<8} {e}\n", "-", "ERROR")),
            (None, None) => {}
        }
    }
    for l in &report.ladders {
        s.push_str(&format!(
            "ladder {}: spacings {:?} errors {:?} observed order {:.3} ({})\n",
            l.oracle,
            l.spacings,
            l.errors,
            l.order,
            if l.ok { "ok" } else { "below 1.9" }
        ));
    }
    s.push_str(&format!("{}/{} runs matched their expected verdicts\n", report.matched, report.total));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_exact_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((observed_order(&h, &e) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_glob_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let pattern = format!("{}/*.cfg", dir.path().display());
        assert!(matches!(expand(&pattern), Err(SweepError::Empty(_))));
    }
}
