//! Flat `[section]` / `key = value` configuration files.
//!
//! ```text
//! # comment
//! [scenario]
//! name = hyperboloid
//! spacing = 0.05
//!
//! [expect]
//! first_window = 0, 1
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mcflow_core::driver::{Expectations, SamplePlan};
use mcflow_core::flow::{Gauge, Variant};
use mcflow_core::scenarios::{build, Expected, Monitor, Scenario, ScenarioKind, ScenarioParams};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{location}field `{field}`: {message}")]
    Field { location: Location, field: String, message: String },
    #[error("override `{0}` is not of the form section.key=value")]
    Override(String),
    #[error("scenario: {0}")]
    Scenario(#[from] mcflow_core::Error),
}

/// Where a value came from, for error messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    Override,
    Missing,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}: "),
            Location::Override => write!(f, "override: "),
            Location::Missing => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    value: String,
    location: Location,
}

/// Parsed but untyped configuration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

const KNOWN: &[(&str, &[&str])] = &[
    (
        "scenario",
        &[
            "name", "dim", "radius", "center", "angle", "a", "c", "u0", "nodes", "spacing", "r_max", "expander_tol",
            "gauge", "variant", "mu", "q0",
        ],
    ),
    ("flow", &["horizon", "cfl", "max_step", "curvature_cap", "edge_floor", "gradient_bound"]),
    ("sampling", &["interval", "rate_delta", "snapshot_interval"]),
    ("monitors", &["list"]),
    (
        "expect",
        &[
            "outcome", "tol_mono", "tol_rate", "rate_until", "rate_radius", "integration_radius", "deficit_radius", "deficit_tolerance",
            "first_window", "last_window", "annulus", "annulus_search", "floor", "type_iii_bound", "type_i_bound",
            "singular_time", "entropy_drift", "expander_window", "expander_tol", "expander_solver_tol", "sign_factor",
            "equivalence_horizon", "equivalence_factor",
        ],
    ),
];

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RawConfig::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line, message: "unterminated section header".into() })?
                    .trim();
                if !KNOWN.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::Syntax { line, message: format!("unknown section [{name}]") });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, message: format!("expected key = value, found `{body}`") })?;
            let sec = section
                .clone()
                .ok_or_else(|| ConfigError::Syntax { line, message: "key outside of any section".into() })?;
            cfg.insert(&sec, key.trim(), value.trim(), Location::Line(line))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    fn insert(&mut self, section: &str, key: &str, value: &str, location: Location) -> Result<(), ConfigError> {
        let known = KNOWN.iter().find(|(s, _)| *s == section).map(|(_, keys)| *keys).unwrap_or(&[]);
        if !known.contains(&key) {
            return Err(ConfigError::Field {
                location,
                field: format!("{section}.{key}"),
                message: "unknown key".into(),
            });
        }
        let map = self.sections.entry(section.to_string()).or_default();
        if let (Some(old), Location::Line(_)) = (map.get(key), location) {
            return Err(ConfigError::Field {
                location,
                field: format!("{section}.{key}"),
                message: format!("duplicate key (first set at {})", old.location),
            });
        }
        map.insert(key.to_string(), Entry { value: value.to_string(), location });
        Ok(())
    }

    /// Apply a `section.key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (path, value) = assignment.split_once('=').ok_or_else(|| ConfigError::Override(assignment.into()))?;
        let (section, key) = path.trim().split_once('.').ok_or_else(|| ConfigError::Override(assignment.into()))?;
        if !KNOWN.iter().any(|(s, _)| *s == section) {
            return Err(ConfigError::Override(assignment.into()));
        }
        self.insert(section, key, value.trim(), Location::Override)
    }

    /// Every value as `section.key → value`, sorted.
    pub fn normalized(&self) -> BTreeMap<String, String> {
        self.sections
            .iter()
            .flat_map(|(s, keys)| keys.iter().map(move |(k, e)| (format!("{s}.{k}"), e.value.clone())))
            .collect()
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|m| m.get(key))
    }

    fn typed<T>(
        &self,
        section: &str,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => parse(&e.value).map(Some).map_err(|message| ConfigError::Field {
                location: e.location,
                field: format!("{section}.{key}"),
                message,
            }),
        }
    }

    fn f64(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        self.typed(section, key, parse_f64)
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    match s {
        "inf" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|_| format!("expected a number, found `{s}`")),
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.parse::<usize>().map_err(|_| format!("expected a non-negative integer, found `{s}`"))
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma separated numbers, found `{s}`"));
    }
    Ok([parse_f64(parts[0])?, parse_f64(parts[1])?])
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, found `{s}`")),
    }
}

fn parse_gauge(s: &str) -> Result<Gauge, String> {
    match s {
        "parametric" => Ok(Gauge::Parametric),
        "graphical" => Ok(Gauge::Graphical),
        _ => Err(format!("expected parametric or graphical, found `{s}`")),
    }
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    match s {
        "mcf" => Ok(Variant::Mcf),
        "drifting_mcf" => Ok(Variant::DriftingMcf),
        "normalized_mcf" => Ok(Variant::NormalizedMcf),
        "normalized_drifting_mcf" => Ok(Variant::NormalizedDriftingMcf),
        _ => Err(format!("unknown flow variant `{s}`")),
    }
}

fn parse_monitors(s: &str) -> Result<Vec<Monitor>, String> {
    let mut out = Vec::new();
    for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        let m = Monitor::parse(name).ok_or_else(|| format!("unknown monitor `{name}`"))?;
        if out.contains(&m) {
            return Err(format!("monitor `{name}` listed twice"));
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err("monitor list is empty".into());
    }
    Ok(out)
}

/// A fully typed run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub params: ScenarioParams,
    pub plan: SamplePlan,
    /// Clock interval between snapshot dumps.
    pub snapshot_interval: f64,
    pub expectations: Expectations,
    pub normalized: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let name = raw.typed("scenario", "name", |s| ScenarioKind::parse(s).map_err(|e| e.to_string()))?.ok_or(
            ConfigError::Field { location: Location::Missing, field: "scenario.name".into(), message: "is required".into() },
        )?;
        let mut p = ScenarioParams::default();
        macro_rules! set {
            ($field:ident, $section:literal, $key:literal, $parse:expr) => {
                if let Some(v) = raw.typed($section, $key, $parse)? {
                    p.$field = v;
                }
            };
        }
        set!(dim, "scenario", "dim", parse_usize);
        set!(radius, "scenario", "radius", parse_f64);
        set!(center, "scenario", "center", parse_pair);
        set!(angle, "scenario", "angle", parse_f64);
        set!(a, "scenario", "a", parse_f64);
        set!(c, "scenario", "c", parse_f64);
        set!(u0, "scenario", "u0", parse_f64);
        set!(nodes, "scenario", "nodes", parse_usize);
        set!(spacing, "scenario", "spacing", parse_f64);
        set!(r_max, "scenario", "r_max", parse_f64);
        set!(expander_tol, "scenario", "expander_tol", parse_f64);
        set!(q0, "scenario", "q0", parse_pair);
        p.gauge = raw.typed("scenario", "gauge", parse_gauge)?;
        p.variant = raw.typed("scenario", "variant", parse_variant)?;
        p.mu = raw.f64("scenario", "mu")?;

        let mut sc = build(name, &p)?;
        let ctl = &mut sc.spec.control;
        if let Some(v) = raw.f64("flow", "horizon")? {
            ctl.horizon = v;
        }
        if let Some(v) = raw.f64("flow", "cfl")? {
            ctl.cfl = v;
        }
        if let Some(v) = raw.f64("flow", "max_step")? {
            ctl.max_step = v;
        }
        let lim = &mut sc.spec.limits;
        if let Some(v) = raw.f64("flow", "curvature_cap")? {
            lim.curvature_cap = v;
        }
        if let Some(v) = raw.f64("flow", "edge_floor")? {
            lim.edge_floor = v;
        }
        if let Some(v) = raw.f64("flow", "gradient_bound")? {
            lim.gradient_bound = v;
        }
        sc.spec.validate(&sc.snapshot.rep)?;
        if let Some(list) = raw.typed("monitors", "list", parse_monitors)? {
            sc.monitors = list;
        }
        if let Some(o) = raw.typed("expect", "outcome", |s| Expected::parse(s).ok_or(format!("unknown outcome `{s}`")))? {
            sc.expected = o;
        }

        let mut plan = SamplePlan::default();
        if let Some(v) = raw.f64("sampling", "interval")? {
            plan.interval = v;
        }
        if let Some(v) = raw.f64("sampling", "rate_delta")? {
            plan.rate_delta = v;
        }
        let positive = |key: &str, v: f64| -> Result<(), ConfigError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                let location = raw.get("sampling", key).map(|e| e.location).unwrap_or(Location::Missing);
                Err(ConfigError::Field { location, field: format!("sampling.{key}"), message: "must be positive".into() })
            }
        };
        positive("interval", plan.interval)?;
        positive("rate_delta", plan.rate_delta)?;
        let snapshot_interval = raw.f64("sampling", "snapshot_interval")?.unwrap_or(1.0);
        positive("snapshot_interval", snapshot_interval)?;

        let mut e = Expectations::default();
        macro_rules! expect {
            ($($field:ident : $parse:expr),* $(,)?) => {
                $(if let Some(v) = raw.typed("expect", stringify!($field), $parse)? {
                    e.$field = v;
                })*
            };
        }
        expect!(
            tol_mono: parse_f64,
            tol_rate: parse_f64,
            rate_until: parse_f64,
            rate_radius: parse_f64,
            integration_radius: parse_f64,
            deficit_radius: parse_f64,
            deficit_tolerance: parse_f64,
            first_window: parse_pair,
            last_window: parse_pair,
            annulus: parse_pair,
            annulus_search: parse_bool,
            floor: parse_f64,
            type_iii_bound: parse_f64,
            type_i_bound: parse_f64,
            entropy_drift: parse_f64,
            expander_window: parse_f64,
            expander_tol: parse_f64,
            expander_solver_tol: parse_f64,
            sign_factor: parse_f64,
            equivalence_horizon: parse_f64,
            equivalence_factor: parse_f64,
        );
        e.singular_time = raw.f64("expect", "singular_time")?;

        Ok(RunConfig { scenario: sc, params: p, plan, snapshot_interval, expectations: e, normalized: raw.normalized() })
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::load(path)?;
        for o in overrides {
            raw.set(o)?;
        }
        Self::from_raw(&raw)
    }
}
