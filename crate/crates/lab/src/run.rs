//! One configured run: evolve, judge, and write every artifact.

use std::collections::BTreeMap;
use std::io::{self, BufWriter, Write};
use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mcflow_core::driver::{evaluate, run_scenario, MonitorOutcome, Observer, RunRecord, SampleRecord};
use mcflow_core::flow::FlowState;
use mcflow_core::functionals::{pointwise_density_rate, FunctionalSeries, Sample};
use mcflow_core::geometry::Snapshot;
use mcflow_core::scenarios::{shrinking_circle_log_rate, Expected, ScenarioKind};
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, RunConfig};
use crate::io::{snapshot_sidecar, write_series, write_snapshot, Artifacts, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("output: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Core(#[from] mcflow_core::Error),
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioEcho {
    pub name: String,
    pub construction: String,
    pub expected: String,
    pub mu: f64,
    pub nodes: usize,
    pub spacing: f64,
    pub variant: String,
    pub gauge: String,
    pub boundary: String,
    pub horizon: f64,
    pub cfl: f64,
    /// The configuration after overrides, as `section.key → value`.
    pub config: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Truncation {
    /// Largest `|x|` of the initial grid.
    pub radius: f64,
    /// Whether the run approximates a noncompact surface on a truncated domain.
    pub truncated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictRow {
    pub monitor: String,
    pub verdict: String,
    pub expected: String,
    pub matched: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl From<&MonitorOutcome> for VerdictRow {
    fn from(o: &MonitorOutcome) -> Self {
        VerdictRow {
            monitor: o.monitor.name().into(),
            verdict: o.verdict.as_str().into(),
            expected: o.expected.as_str().into(),
            matched: o.matched(),
            value: o.value,
            threshold: o.threshold,
            detail: o.detail.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TerminationRow {
    pub signal: String,
    pub clock: f64,
    pub message: String,
    pub expected: bool,
}

/// Error of the run against a closed form, used for refinement ladders.
#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub name: String,
    pub spacing: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub scenario: ScenarioEcho,
    pub truncation: Truncation,
    pub verdicts: Vec<VerdictRow>,
    pub termination: Option<TerminationRow>,
    pub steps: u64,
    pub rejected_steps: u64,
    pub samples: usize,
    pub oracle: Option<OracleRow>,
    pub artifacts: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
    pub all_matched: bool,
}

struct Recorder {
    art: Artifacts,
    steps: BufWriter<File>,
    snapshot_interval: f64,
    next_dump: f64,
    dumps: usize,
    keep: bool,
    kept: Vec<Snapshot>,
    error: Option<io::Error>,
}

impl Recorder {
    fn record(&mut self, result: io::Result<()>) {
        if let (Err(e), None) = (result, &self.error) {
            self.error = Some(e);
        }
    }
}

fn finite(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

impl Observer for Recorder {
    fn on_step(&mut self, s: &FlowState) {
        let line = json!({
            "kind": "step",
            "step": s.steps,
            "clock": s.clock,
            "dt": s.diagnostics.last_step,
            "max_second_ff_sq": s.diagnostics.max_second_ff_sq,
            "min_edge": s.diagnostics.min_edge,
        });
        let r = writeln!(self.steps, "{line}");
        self.record(r);
    }

    fn on_sample(&mut self, r: &SampleRecord, snap: &Snapshot) {
        let line = json!({
            "kind": "sample",
            "clock": r.clock,
            "weighted_mass": finite(r.weighted_mass),
            "weighted_deficit": finite(r.weighted_deficit),
            "excluded_fraction": r.excluded_fraction,
            "deficit_ball": r.deficit_ball,
            "annulus_residual": r.annulus_residual,
            "gaussian_mass": finite(r.gaussian_mass),
            "entropy": r.entropy,
            "min_residual": r.signs.min_residual,
            "max_normal_part": r.signs.max_normal_part,
            "min_mean_curvature": r.signs.min_mean_curvature,
            "max_tilt": finite(r.signs.max_tilt),
            "type_iii": r.signs.type_iii,
            "rate_mismatch": r.rate_mismatch,
            "factorization_mismatch": r.factorization_mismatch,
        });
        let w = writeln!(self.steps, "{line}");
        self.record(w);
        if r.clock >= self.next_dump - 1e-12 {
            let stem = format!("snapshots/snap_{:04}", self.dumps);
            let w = write_snapshot(&mut self.art, &stem, snap, &snapshot_sidecar(snap));
            self.record(w);
            self.dumps += 1;
            self.next_dump += self.snapshot_interval;
        }
        if self.keep {
            self.kept.push(snap.clone());
        }
    }
}

/// Series name, truncation radius and the field it reads.
type SeriesSpec = (&'static str, f64, fn(&SampleRecord) -> Option<f64>);

fn series_from<F: Fn(&SampleRecord) -> Option<f64>>(rec: &RunRecord, name: &str, truncation: f64, f: F) -> FunctionalSeries {
    let mut s = FunctionalSeries::new(name, name);
    for r in &rec.samples {
        if let Some(v) = f(r).filter(|v| v.is_finite()) {
            let _ = s.push(Sample { clock: r.clock, value: v, truncation, excluded_fraction: r.excluded_fraction });
        }
    }
    s
}

fn circle_oracle(cfg: &RunConfig, kept: &[Snapshot]) -> Option<OracleRow> {
    let sc = &cfg.scenario;
    if sc.kind != ScenarioKind::Circle || cfg.params.center != [0.0, 0.0] || kept.len() < 3 {
        return None;
    }
    let until = cfg.expectations.rate_until;
    let rates = pointwise_density_rate(kept, 0).ok()?;
    let error = rates
        .iter()
        .filter(|r| r.clock <= until)
        .map(|r| {
            let exact = shrinking_circle_log_rate(cfg.params.radius, r.clock);
            ((r.measured - exact) / exact).abs()
        })
        .fold(0.0, f64::max);
    Some(OracleRow { name: "circle_density_rate".into(), spacing: sc.snapshot.mean_edge(), error })
}

/// Run `cfg` and write its outputs under `out`.
pub fn run_config(cfg: &RunConfig, out: &Path) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let sc = &cfg.scenario;
    let mut art = Artifacts::new(out)?;
    write_snapshot(&mut art, "snapshots/initial", &sc.snapshot, &snapshot_sidecar(&sc.snapshot))?;
    let steps = art.create("steps.jsonl")?;
    let mut rec = Recorder {
        art,
        steps,
        snapshot_interval: cfg.snapshot_interval,
        next_dump: 0.0,
        dumps: 0,
        keep: sc.kind == ScenarioKind::Circle,
        kept: Vec::new(),
        error: None,
    };
    let record = run_scenario(sc, &cfg.plan, &cfg.expectations, &mut rec)?;
    if let Some(e) = rec.error.take() {
        return Err(e.into());
    }
    rec.steps.flush()?;
    let mut art = rec.art;
    write_snapshot(&mut art, "snapshots/final", &record.final_snapshot, &snapshot_sidecar(&record.final_snapshot))?;

    let e = &cfg.expectations;
    let series: [SeriesSpec; 11] = [
        ("weighted_mass", e.integration_radius, |r| Some(r.weighted_mass)),
        ("weighted_deficit", e.integration_radius, |r| Some(r.weighted_deficit)),
        ("deficit_ball", e.deficit_radius, |r| r.deficit_ball),
        ("annulus_residual", e.annulus[1], |r| r.annulus_residual),
        ("gaussian_mass", e.integration_radius, |r| Some(r.gaussian_mass)),
        ("entropy", f64::INFINITY, |r| r.entropy),
        ("min_residual", f64::INFINITY, |r| Some(r.signs.min_residual)),
        ("max_normal_part", f64::INFINITY, |r| Some(r.signs.max_normal_part)),
        ("type_iii", f64::INFINITY, |r| Some(r.signs.type_iii)),
        ("rate_mismatch", e.rate_radius, |r| r.rate_mismatch),
        ("factorization_mismatch", e.rate_radius, |r| r.factorization_mismatch),
    ];
    for (name, trunc, f) in series {
        let s = series_from(&record, name, trunc, f);
        if !s.is_empty() {
            write_series(&mut art, &format!("series/{name}.csv"), &s)?;
        }
    }

    let outcomes = evaluate(sc, &record, e);
    let termination = record.termination.map(|t| TerminationRow {
        signal: t.name().into(),
        clock: t.clock(),
        message: t.to_string(),
        expected: sc.expected == Expected::Singular,
    });
    let termination_ok = termination.as_ref().is_none_or(|t| t.expected);
    let all_matched = termination_ok && outcomes.iter().all(MonitorOutcome::matched);
    let truncation = Truncation {
        radius: record.r_max,
        truncated: !sc.snapshot.rep.is_closed() && sc.kind != ScenarioKind::Sphere,
    };
    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        scenario: ScenarioEcho {
            name: sc.kind.name().into(),
            construction: sc.construction.into(),
            expected: sc.expected.name().into(),
            mu: sc.mu,
            nodes: sc.snapshot.len(),
            spacing: record.spacing,
            variant: format!("{:?}", sc.spec.variant),
            gauge: format!("{:?}", sc.spec.gauge),
            boundary: format!("{:?}", sc.spec.boundary),
            horizon: sc.spec.control.horizon,
            cfl: sc.spec.control.cfl,
            config: cfg.normalized.clone(),
        },
        truncation,
        verdicts: outcomes.iter().map(VerdictRow::from).collect(),
        termination,
        steps: record.steps,
        rejected_steps: record.rejected_steps,
        samples: record.samples.len(),
        oracle: circle_oracle(cfg, &rec.kept),
        artifacts: Vec::new(),
        wall_clock_seconds: 0.0,
        all_matched,
    };
    let mut paths = art.pending().to_vec();
    paths.push(out.join("summary.json"));
    report.artifacts = paths;
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    art.write_json("summary.json", &report)?;
    art.finalize()?;
    Ok(report)
}

/// Load `config` with `overrides` and run it into `out`.
pub fn run_path(config: &Path, out: &Path, overrides: &[String]) -> Result<RunReport, RunError> {
    let cfg = RunConfig::load(config, overrides)?;
    run_config(&cfg, out)
}

/// Plain-text verdict table.
pub fn verdict_table(report: &RunReport) -> String {
    let mut s = format!("scenario {} ({})\n", report.scenario.name, report.scenario.expected);
    for v in &report.verdicts {
        s.push_str(&format!(
            "  {:<20} {:<12} expected {:<12} value {:<12.4e} threshold {:<10.3e} {}\n",
            v.monitor,
            v.verdict,
            v.expected,
            v.value,
            v.threshold,
            if v.matched { "ok" } else { "UNEXPECTED" }
        ));
    }
    if let Some(t) = &report.termination {
        s.push_str(&format!("  terminated: {}\n", t.message));
    }
    if let Some(o) = &report.oracle {
        s.push_str(&format!("  oracle {}: error {:.4e} at spacing {:.4e}\n", o.name, o.error, o.spacing));
    }
    s
}
