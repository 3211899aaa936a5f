//! Runs a scenario to its horizon, samples every requested monitor and turns
//! the series into verdicts.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Result;
use crate::expander::{compare_to_expander, solve_graph_expander};
use crate::flow::{reparametrization_equivalence_check, FlowState, Gauge, Termination};
use crate::functionals::{
    annulus_residual, deficit_vanishing_check, derivative_identity_mismatch, expander_deficit, huisken_entropy,
    monotonicity_verdict, rate_field, sign_monitors, sup_relative_mismatch, weighted_mass, DensityKind, Direction,
    FunctionalSeries, SignRecord, Verdict, Weight, WeightChoice,
};
use crate::geometry::{Clock, Snapshot};
use crate::scenarios::{Expected, Monitor, Scenario};

/// Thresholds the verdicts are judged against.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectations {
    pub tol_mono: f64,
    pub tol_rate: f64,
    /// Only rate samples at clocks up to this value are judged.
    pub rate_until: f64,
    pub rate_radius: f64,
    pub integration_radius: f64,
    pub deficit_radius: f64,
    /// Last-window deficit means at or below this count as vanished outright.
    pub deficit_tolerance: f64,
    pub first_window: [f64; 2],
    pub last_window: [f64; 2],
    pub annulus: [f64; 2],
    /// Also try the annuli `[c, c·ratio]` for `c` in [`ANNULUS_LADDER`] and judge
    /// the smallest one that is never empty.
    pub annulus_search: bool,
    pub floor: f64,
    pub type_iii_bound: f64,
    pub type_i_bound: f64,
    /// Singular time for entropy and Type I checks (the horizon if unset).
    pub singular_time: Option<f64>,
    pub entropy_drift: f64,
    pub expander_window: f64,
    pub expander_tol: f64,
    pub expander_solver_tol: f64,
    /// Sign tolerances are this factor times the squared initial mean edge.
    pub sign_factor: f64,
    pub equivalence_horizon: f64,
    /// Image distances are judged against this factor times the mean edge.
    pub equivalence_factor: f64,
}

impl Default for Expectations {
    fn default() -> Self {
        Self {
            tol_mono: crate::functionals::TOL_MONO,
            tol_rate: crate::functionals::TOL_MONOTONE,
            rate_until: f64::INFINITY,
            rate_radius: 5.0,
            integration_radius: f64::INFINITY,
            deficit_radius: 5.0,
            deficit_tolerance: 0.0,
            first_window: [0.0, 1.0],
            last_window: [2.0, 3.0],
            annulus: [1.0, 5.0],
            annulus_search: false,
            floor: 0.05,
            type_iii_bound: 1.0,
            type_i_bound: 1.0,
            singular_time: None,
            entropy_drift: 1e-3,
            expander_window: 5.0,
            expander_tol: 1e-2,
            expander_solver_tol: 1e-6,
            sign_factor: 10.0,
            equivalence_horizon: 0.1,
            equivalence_factor: 5.0,
        }
    }
}

/// Inner radii tried by the annulus search.
pub const ANNULUS_LADDER: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePlan {
    pub interval: f64,
    /// Half-width of the three-point stencil used for pointwise rates.
    pub rate_delta: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self { interval: 0.05, rate_delta: 0.01 }
    }
}

/// Scalars recorded at one sample clock.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRecord {
    pub clock: f64,
    pub weighted_mass: f64,
    pub weighted_deficit: f64,
    pub excluded_fraction: f64,
    /// Unweighted deficit on the deficit ball, absent when the ball is empty.
    pub deficit_ball: Option<f64>,
    /// `sup |H + ⟨x,ν⟩|` on the annulus, absent when the annulus is empty.
    pub annulus_residual: Option<f64>,
    /// The same on each searched annulus, when the search is enabled.
    pub annulus_ladder: [Option<f64>; ANNULUS_LADDER.len()],
    pub gaussian_mass: f64,
    pub entropy: Option<f64>,
    pub signs: SignRecord,
    pub max_slope: f64,
    /// Sup-relative mismatch of the density rate field.
    pub rate_mismatch: Option<f64>,
    pub factorization_mismatch: Option<f64>,
    /// Smallest measured rate of `e^{-½|x̃|²} dμ̃` over the rate window.
    pub factorization_min: Option<f64>,
}

pub trait Observer {
    fn on_step(&mut self, _state: &FlowState) {}
    fn on_sample(&mut self, _record: &SampleRecord, _snapshot: &Snapshot) {}
}

/// Observer that ignores everything.
pub struct Silent;

impl Observer for Silent {}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub initial: Snapshot,
    pub final_snapshot: Snapshot,
    pub samples: Vec<SampleRecord>,
    pub termination: Option<Termination>,
    pub steps: u64,
    pub rejected_steps: u64,
    /// Mean edge length of the initial snapshot.
    pub spacing: f64,
    pub r_max: f64,
}

fn needs(sc: &Scenario, m: Monitor) -> bool {
    sc.monitors.contains(&m)
}

fn sample(
    sc: &Scenario,
    exp: &Expectations,
    state: &FlowState,
    triple: Option<[Snapshot; 3]>,
    x0: &[[f64; 2]],
) -> Result<SampleRecord> {
    let snap = &state.snapshot;
    let w = Weight::expander_relative();
    let r_int = exp.integration_radius;
    let mass = weighted_mass(snap, &w, Some(x0), r_int)?;
    let deficit = expander_deficit(snap, &w, Some(x0), r_int)?;
    let gauss = weighted_mass(snap, &Weight::single(WeightChoice::NormalizedGaussian), None, r_int)?;
    let deficit_ball = expander_deficit(snap, &Weight::unit(), None, exp.deficit_radius).ok().map(|i| i.value);
    let annulus = annulus_residual(snap, exp.annulus[0], exp.annulus[1]).ok();
    let mut annulus_ladder = [None; ANNULUS_LADDER.len()];
    if exp.annulus_search {
        let ratio = exp.annulus[1] / exp.annulus[0];
        for (slot, c) in annulus_ladder.iter_mut().zip(ANNULUS_LADDER) {
            *slot = annulus_residual(snap, c, c * ratio).ok();
        }
    }
    let entropy = if needs(sc, Monitor::Entropy) && snap.clock == Clock::Time {
        huisken_entropy(snap, exp.singular_time.unwrap_or(sc.spec.control.horizon)).ok()
    } else {
        None
    };
    let (mut rate_mismatch, mut factorization_mismatch, mut factorization_min) = (None, None, None);
    if let Some(tr) = triple {
        if needs(sc, Monitor::DensityRate) {
            let kind = if snap.clock == Clock::Time { DensityKind::Expander } else { DensityKind::NormalizedExpander };
            rate_mismatch = Some(sup_relative_mismatch(&rate_field(&tr, kind, exp.rate_radius)?));
        }
        if needs(sc, Monitor::Factorization) && snap.clock == Clock::Rescaled {
            let f = rate_field(&tr, DensityKind::NormalizedGaussian, exp.rate_radius)?;
            factorization_mismatch = Some(sup_relative_mismatch(&f));
            factorization_min = Some(f.iter().map(|(_, r)| r.measured).fold(f64::INFINITY, f64::min));
        }
    }
    Ok(SampleRecord {
        clock: state.clock,
        weighted_mass: mass.value,
        weighted_deficit: deficit.value,
        excluded_fraction: mass.excluded_fraction.max(deficit.excluded_fraction),
        deficit_ball,
        annulus_residual: annulus,
        annulus_ladder,
        gaussian_mass: gauss.value,
        entropy,
        signs: sign_monitors(snap),
        max_slope: state.diagnostics.max_slope,
        rate_mismatch,
        factorization_mismatch,
        factorization_min,
    })
}

/// Evolve a scenario to its horizon (or a typed termination), sampling on `plan`.
pub fn run_scenario(sc: &Scenario, plan: &SamplePlan, exp: &Expectations, observer: &mut dyn Observer) -> Result<RunRecord> {
    let mut state = FlowState::new(sc.snapshot.clone(), sc.spec)?;
    let x0 = state.initial_points.clone();
    let initial = state.snapshot.clone();
    let horizon = sc.spec.control.horizon;
    let wants_rates = sc.spec.gauge == Gauge::Parametric
        && (needs(sc, Monitor::DensityRate) || needs(sc, Monitor::Factorization));
    let mut samples = Vec::new();
    let mut termination = None;
    let n = libm::ceil(horizon / plan.interval - 1e-9) as usize;
    let mut last_clock = f64::NEG_INFINITY;
    'outer: for k in 0..=n {
        let target = (k as f64 * plan.interval).min(horizon);
        if target <= last_clock {
            continue;
        }
        let d = plan.rate_delta;
        let mut triple = None;
        if wants_rates && target - d > last_clock.max(0.0) && target - d > state.clock && target + d <= horizon {
            let mut shots = Vec::with_capacity(3);
            for t in [target - d, target, target + d] {
                if let Err(e) = state.advance_to_with(t, |s| observer.on_step(s)) {
                    termination = Some(e);
                    break 'outer;
                }
                shots.push(state.snapshot.clone());
            }
            let third = shots.pop();
            let second = shots.pop();
            let first = shots.pop();
            if let (Some(a), Some(b), Some(c)) = (first, second, third) {
                triple = Some([a, b.clone(), c]);
                // sample the middle of the stencil
                let mut mid = state.clone();
                mid.snapshot = b;
                mid.clock = target;
                let rec = sample(sc, exp, &mid, triple, &x0)?;
                observer.on_sample(&rec, &mid.snapshot);
                samples.push(rec);
                last_clock = state.clock;
                continue;
            }
        }
        if target > state.clock {
            if let Err(e) = state.advance_to_with(target, |s| observer.on_step(s)) {
                termination = Some(e);
                break;
            }
        }
        let rec = sample(sc, exp, &state, triple, &x0)?;
        observer.on_sample(&rec, &state.snapshot);
        samples.push(rec);
        last_clock = state.clock;
    }
    let r_max = initial.points().iter().map(|p| crate::math::hypot(p[0], p[1])).fold(0.0, f64::max);
    Ok(RunRecord {
        spacing: initial.mean_edge(),
        initial,
        final_snapshot: state.snapshot.clone(),
        samples,
        termination,
        steps: state.steps,
        rejected_steps: state.diagnostics.rejected_steps,
        r_max,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonitorOutcome {
    pub monitor: Monitor,
    pub verdict: Verdict,
    pub expected: Verdict,
    /// The number the verdict was decided on.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl MonitorOutcome {
    pub fn matched(&self) -> bool {
        self.verdict == self.expected
    }
}

fn series_of<F: Fn(&SampleRecord) -> Option<f64>>(rec: &RunRecord, name: &str, f: F) -> FunctionalSeries {
    let mut s = FunctionalSeries::new(name, "");
    for r in &rec.samples {
        if let Some(v) = f(r) {
            let _ = s.push(crate::functionals::Sample {
                clock: r.clock,
                value: v,
                truncation: f64::INFINITY,
                excluded_fraction: r.excluded_fraction,
            });
        }
    }
    s
}

fn outcome(monitor: Monitor, verdict: Verdict, value: f64, threshold: f64, detail: String) -> MonitorOutcome {
    MonitorOutcome { monitor, verdict, expected: Verdict::Pass, value, threshold, detail }
}

fn worst_within<F: Fn(&SampleRecord) -> Option<f64>>(rec: &RunRecord, until: f64, f: F) -> Option<f64> {
    rec.samples.iter().filter(|r| r.clock <= until).filter_map(f).reduce(f64::max)
}

struct FloorCheck {
    verdict: Verdict,
    floor: f64,
    detail: String,
}

// a detection in every unit clock window stands in for a sequence s_k → ∞
fn floor_check<F: Fn(&SampleRecord) -> Option<f64>>(sc: &Scenario, rec: &RunRecord, exp: &Expectations, f: F) -> FloorCheck {
    let horizon = sc.spec.control.horizon;
    let windows = libm::ceil(horizon - 1e-9).max(1.0) as usize;
    let (mut below, mut empty) = (Vec::new(), Vec::new());
    let mut floor = f64::INFINITY;
    for k in 0..windows {
        let (a, b) = (k as f64, (k + 1) as f64);
        let in_window: Vec<&SampleRecord> = rec
            .samples
            .iter()
            .filter(|r| r.clock >= a && (r.clock < b || (k + 1 == windows && r.clock <= b)))
            .collect();
        let best = in_window.iter().filter_map(|r| f(r)).reduce(f64::max);
        match best {
            None => empty.push(k),
            Some(v) => {
                floor = floor.min(v);
                if v < exp.floor {
                    below.push(k);
                }
            }
        }
    }
    let verdict = if !below.is_empty() {
        Verdict::Fail
    } else if !empty.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    let detail = match verdict {
        Verdict::Pass => format!("detections above the floor in all {windows} unit windows"),
        Verdict::Fail => format!("no sample above the floor in windows {below:?}"),
        Verdict::Inconclusive => format!("annulus empty throughout windows {empty:?}"),
    };
    FloorCheck { verdict, floor: if floor.is_finite() { floor } else { f64::NAN }, detail }
}

/// Judge every monitor the scenario requests.
pub fn evaluate(sc: &Scenario, rec: &RunRecord, exp: &Expectations) -> Vec<MonitorOutcome> {
    sc.monitors.iter().map(|&m| evaluate_one(sc, rec, exp, m)).collect()
}

fn evaluate_one(sc: &Scenario, rec: &RunRecord, exp: &Expectations, m: Monitor) -> MonitorOutcome {
    let inconclusive = |why: &str| outcome(m, Verdict::Inconclusive, f64::NAN, f64::NAN, String::from(why));
    let mut out = match m {
        Monitor::DensityRate => match worst_within(rec, exp.rate_until, |r| r.rate_mismatch) {
            Some(v) => outcome(m, Verdict::from_bool(v <= exp.tol_rate), v, exp.tol_rate, format!("worst sup-relative rate mismatch up to clock {}", exp.rate_until)),
            None => inconclusive("no rate samples"),
        },
        Monitor::Factorization => {
            let worst = worst_within(rec, exp.rate_until, |r| r.factorization_mismatch);
            match worst {
                Some(v) => {
                    let min_rate = rec.samples.iter().filter_map(|r| r.factorization_min).fold(f64::INFINITY, f64::min);
                    outcome(m, Verdict::from_bool(v <= exp.tol_rate), v, exp.tol_rate, format!("smallest measured rate {min_rate:e}"))
                }
                None => inconclusive("no rate samples"),
            }
        }
        Monitor::WeightedMass | Monitor::GaussianMass => {
            let (series, dir) = if m == Monitor::WeightedMass {
                (series_of(rec, "weighted_mass", |r| Some(r.weighted_mass)), Direction::NonIncreasing)
            } else {
                (series_of(rec, "gaussian_mass", |r| Some(r.gaussian_mass)), Direction::NonDecreasing)
            };
            match monotonicity_verdict(&series, dir, exp.tol_mono) {
                Ok(r) => outcome(m, r.verdict, r.worst_violation, exp.tol_mono, format!("worst step at clock {}", r.worst_clock)),
                Err(e) => inconclusive(&format!("{e}")),
            }
        }
        Monitor::DerivativeIdentity => {
            let mass = series_of(rec, "weighted_mass", |r| Some(r.weighted_mass));
            let def = series_of(rec, "weighted_deficit", |r| Some(r.weighted_deficit));
            match derivative_identity_mismatch(&mass, &def) {
                Ok(v) => outcome(m, Verdict::from_bool(v <= exp.tol_rate), v, exp.tol_rate, String::from("sup |slope + deficit| / sup deficit")),
                Err(e) => inconclusive(&format!("{e}")),
            }
        }
        Monitor::DeficitVanishing => {
            let s = series_of(rec, "deficit_ball", |r| r.deficit_ball);
            match deficit_vanishing_check(&s, exp.first_window, exp.last_window) {
                Ok(r) if r.verdict == Verdict::Fail && r.last_mean <= exp.deficit_tolerance => outcome(
                    m,
                    Verdict::Pass,
                    r.last_mean,
                    exp.deficit_tolerance,
                    format!("last window mean {:e} within the absolute tolerance", r.last_mean),
                ),
                Ok(r) => outcome(m, r.verdict, r.ratio, 0.1, format!("window means {:e} -> {:e}", r.first_mean, r.last_mean)),
                Err(e) => inconclusive(&format!("{e}")),
            }
        }
        Monitor::ResidualFloor => {
            let fixed = floor_check(sc, rec, exp, |r| r.annulus_residual);
            if !exp.annulus_search || fixed.verdict == Verdict::Pass {
                let mut o = outcome(m, fixed.verdict, fixed.floor, exp.floor, fixed.detail);
                o.detail = format!("annulus [{}, {}]: {}", exp.annulus[0], exp.annulus[1], o.detail);
                o
            } else {
                let ratio = exp.annulus[1] / exp.annulus[0];
                let found = (0..ANNULUS_LADDER.len())
                    .find(|&k| rec.samples.iter().all(|r| r.annulus_ladder[k].is_some()))
                    .map(|k| (k, floor_check(sc, rec, exp, |r| r.annulus_ladder[k])));
                match found {
                    Some((k, f)) => {
                        let c = ANNULUS_LADDER[k];
                        let detail = format!(
                            "fixed annulus [{}, {}]: {}; searched annulus [{c}, {}]: {}",
                            exp.annulus[0], exp.annulus[1], fixed.detail, c * ratio, f.detail
                        );
                        outcome(m, f.verdict, f.floor, exp.floor, detail)
                    }
                    None => outcome(m, fixed.verdict, fixed.floor, exp.floor, format!("{}; no searched annulus is populated throughout", fixed.detail)),
                }
            }
        }
        Monitor::SignPreservation => {
            let tol = exp.sign_factor * rec.spacing * rec.spacing;
            let min_res = rec.samples.iter().map(|r| r.signs.min_residual).fold(f64::INFINITY, f64::min);
            let max_xn = rec.samples.iter().map(|r| r.signs.max_normal_part).fold(f64::NEG_INFINITY, f64::max);
            let ok = min_res >= -tol && max_xn <= tol;
            outcome(m, Verdict::from_bool(ok), min_res.min(-max_xn), -tol, format!("min(H+<x,nu>) = {min_res:e}, max <x,nu> = {max_xn:e}"))
        }
        Monitor::TypeIii => {
            let v = rec.samples.iter().map(|r| r.signs.type_iii).fold(0.0, f64::max);
            let v = if rec.termination.is_some() { f64::INFINITY } else { v };
            outcome(m, Verdict::from_bool(v <= exp.type_iii_bound), v, exp.type_iii_bound, String::from("max physical t |A|^2"))
        }
        Monitor::TypeI => {
            let t_sing = exp.singular_time.unwrap_or(sc.spec.control.horizon);
            match rec.termination {
                Some(Termination::FiniteTimeSingularity { clock, max_second_ff_sq }) => {
                    let v = (t_sing - clock) * max_second_ff_sq;
                    let ok = clock < t_sing && v <= exp.type_i_bound;
                    outcome(m, Verdict::from_bool(ok), v, exp.type_i_bound, format!("FiniteTimeSingularity at clock {clock}"))
                }
                Some(other) => outcome(m, Verdict::Fail, f64::NAN, exp.type_i_bound, format!("{other}")),
                None => outcome(m, Verdict::Fail, f64::NAN, exp.type_i_bound, String::from("no singularity signaled")),
            }
        }
        Monitor::Entropy => {
            let vals: Vec<f64> = rec.samples.iter().filter_map(|r| r.entropy).collect();
            if vals.len() < 2 {
                inconclusive("fewer than two entropy samples")
            } else {
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let drift = (hi - lo) / vals[0];
                outcome(m, Verdict::from_bool(drift <= exp.entropy_drift), drift, exp.entropy_drift, String::from("relative entropy drift"))
            }
        }
        Monitor::ExpanderMatch => {
            let fin = &rec.final_snapshot;
            let u0 = fin.points()[0][1];
            let r_max = fin.points().iter().map(|p| p[0]).fold(0.0, f64::max).max(5.0);
            match solve_graph_expander(fin.dim(), u0, r_max, exp.expander_solver_tol)
                .and_then(|p| compare_to_expander(fin, &p, exp.expander_window).map(|d| (d, p.slope)))
            {
                Ok((d, slope)) => outcome(m, Verdict::from_bool(d <= exp.expander_tol), d, exp.expander_tol, format!("profile u(0) = {u0}, slope {slope}")),
                Err(e) => outcome(m, Verdict::Fail, f64::NAN, exp.expander_tol, format!("{e}")),
            }
        }
        Monitor::Equivalence => {
            if sc.spec.gauge != Gauge::Parametric {
                inconclusive("needs the parametric gauge")
            } else {
                let start = rec.initial.clone().with_time(0.0, Clock::Time);
                match reparametrization_equivalence_check(&start, sc.spec.boundary, sc.spec.control, sc.spec.limits, exp.equivalence_horizon) {
                    Ok(d) => {
                        let tol = exp.equivalence_factor * rec.spacing;
                        outcome(m, Verdict::from_bool(d <= tol), d, tol, format!("image distance at t = {}", exp.equivalence_horizon))
                    }
                    Err(e) => outcome(m, Verdict::Fail, f64::NAN, f64::NAN, format!("{e}")),
                }
            }
        }
    };
    out.expected = expected_verdict(sc.expected, m);
    out
}

/// Counterexample scenarios are expected to fail the vanishing check.
pub fn expected_verdict(expected: Expected, m: Monitor) -> Verdict {
    match (expected, m) {
        (Expected::NonConvergent, Monitor::DeficitVanishing) => Verdict::Fail,
        _ => Verdict::Pass,
    }
}
