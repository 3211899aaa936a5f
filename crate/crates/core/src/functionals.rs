//! Monitored scalars: weighted masses, expander deficits, entropies, pointwise
//! density rates and the verdicts run against them.
//!
//! Weights are products of factors and are evaluated in log space, so that
//! `e^{½|x̃|²}` and `e^{-|x₀|²}` never overflow separately. A node whose total
//! exponent exceeds [`OVERFLOW_EXPONENT`] is dropped and counted.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{dot, three_point, Clock, Kind, Point, Snapshot};
use crate::math::{abs, exp, ln, powf, sqrt, PI};

pub const OVERFLOW_EXPONENT: f64 = 700.0;
/// Excluded share of the total mass above which a verdict is inconclusive.
pub const EXCLUDED_FRACTION_LIMIT: f64 = 1e-12;
/// Default per-pair relative tolerance for integral monotonicity.
pub const TOL_MONO: f64 = 1e-6;
/// Default relative tolerance for pointwise rate identities.
pub const TOL_MONOTONE: f64 = 5e-2;

#[derive(Clone, Debug, PartialEq)]
pub enum WeightChoice {
    Unit,
    /// `(t+½)^{-n/2} e^{|x|²/(4(t+½))}` at physical time `t`.
    ExpanderDensity,
    /// `e^{½|x̃|²}`.
    NormalizedExpanderDensity,
    /// `e^{-½|x̃|²}`.
    NormalizedGaussian,
    /// `e^{-|x₀|²}`.
    InitialGaussian,
    /// `e^{-½|x₀|²}`.
    HalfInitialGaussian,
    /// Tabulated `f₀ > 0` per material point.
    Custom(Vec<f64>),
}

impl WeightChoice {
    pub fn name(&self) -> &'static str {
        match self {
            WeightChoice::Unit => "1",
            WeightChoice::ExpanderDensity => "rho",
            WeightChoice::NormalizedExpanderDensity => "exp(|x|^2/2)",
            WeightChoice::NormalizedGaussian => "exp(-|x|^2/2)",
            WeightChoice::InitialGaussian => "exp(-|x0|^2)",
            WeightChoice::HalfInitialGaussian => "exp(-|x0|^2/2)",
            WeightChoice::Custom(_) => "f0",
        }
    }

    fn needs_initial(&self) -> bool {
        matches!(self, WeightChoice::InitialGaussian | WeightChoice::HalfInitialGaussian)
    }
}

/// Product of weight factors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Weight {
    pub factors: Vec<WeightChoice>,
}

impl Weight {
    pub fn unit() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn single(choice: WeightChoice) -> Self {
        Self { factors: alloc::vec![choice] }
    }

    pub fn product(a: WeightChoice, b: WeightChoice) -> Self {
        Self { factors: alloc::vec![a, b] }
    }

    /// The combined weight `e^{½|x̃|² - |x₀|²}`.
    pub fn expander_relative() -> Self {
        Self::product(WeightChoice::NormalizedExpanderDensity, WeightChoice::InitialGaussian)
    }

    pub fn name(&self) -> String {
        if self.factors.is_empty() {
            return String::from("1");
        }
        let mut s = String::new();
        for (k, f) in self.factors.iter().enumerate() {
            if k > 0 {
                s.push('*');
            }
            s.push_str(f.name());
        }
        s
    }

    fn check(&self, snapshot: &Snapshot, initial: Option<&[Point]>) -> Result<()> {
        for f in &self.factors {
            if f.needs_initial() {
                match initial {
                    Some(x0) if x0.len() == snapshot.len() => {}
                    _ => return Err(Error::InvalidParameter { name: "initial", reason: "initial positions required per node" }),
                }
            }
            if let WeightChoice::Custom(v) = f {
                if v.len() != snapshot.len() {
                    return Err(Error::InvalidParameter { name: "f0", reason: "one value per node required" });
                }
                if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                    return Err(Error::InvalidParameter { name: "f0", reason: "must be positive and finite" });
                }
            }
        }
        Ok(())
    }

    fn log_at(&self, snapshot: &Snapshot, i: usize, initial: Option<&[Point]>) -> f64 {
        let x2 = snapshot.position_sq(i);
        let n = snapshot.dim() as f64;
        let x0sq = || initial.map(|x0| dot(x0[i], x0[i])).unwrap_or(0.0);
        self.factors
            .iter()
            .map(|f| match f {
                WeightChoice::Unit => 0.0,
                WeightChoice::ExpanderDensity => {
                    let tau = snapshot.physical_time() + 0.5;
                    -0.5 * n * ln(tau) + x2 / (4.0 * tau)
                }
                WeightChoice::NormalizedExpanderDensity => 0.5 * x2,
                WeightChoice::NormalizedGaussian => -0.5 * x2,
                WeightChoice::InitialGaussian => -x0sq(),
                WeightChoice::HalfInitialGaussian => -0.5 * x0sq(),
                WeightChoice::Custom(v) => ln(v[i]),
            })
            .sum()
    }
}

/// Result of a truncated quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub truncation: f64,
    pub nodes_used: usize,
    pub excluded_nodes: usize,
    /// Share of the (log-space) total mass carried by excluded nodes.
    pub excluded_fraction: f64,
}

impl Integral {
    pub fn is_conclusive(&self) -> bool {
        self.excluded_fraction <= EXCLUDED_FRACTION_LIMIT
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + ln(terms.iter().map(|t| exp(t - m)).sum::<f64>())
}

/// `∫ integrand · weight dμ` over nodes with `|x| ≤ r_int`.
fn integrate<F: Fn(usize) -> f64>(
    snapshot: &Snapshot,
    weight: &Weight,
    initial: Option<&[Point]>,
    r_int: f64,
    integrand: F,
) -> Result<Integral> {
    weight.check(snapshot, initial)?;
    let r2 = r_int * r_int;
    let factor = snapshot.rep.rotational_factor();
    let mut value = 0.0;
    let mut used = 0;
    let mut kept_logs = Vec::new();
    let mut dropped_logs = Vec::new();
    for (i, g) in snapshot.geometry().iter().enumerate() {
        if snapshot.position_sq(i) > r2 || g.dmu <= 0.0 {
            continue;
        }
        used += 1;
        let lw = weight.log_at(snapshot, i, initial);
        let f = integrand(i);
        let log_mass = lw + ln(g.dmu);
        if lw > OVERFLOW_EXPONENT {
            dropped_logs.push(log_mass);
            continue;
        }
        kept_logs.push(log_mass);
        value += f * exp(lw) * g.dmu;
    }
    if used == 0 {
        return Err(Error::EmptyWindow(r_int));
    }
    let excluded_fraction = if dropped_logs.is_empty() {
        0.0
    } else {
        let all: Vec<f64> = kept_logs.iter().chain(&dropped_logs).copied().collect();
        exp(log_sum_exp(&dropped_logs) - log_sum_exp(&all))
    };
    Ok(Integral {
        value: value * factor,
        truncation: r_int,
        nodes_used: used,
        excluded_nodes: dropped_logs.len(),
        excluded_fraction,
    })
}

/// Trapezoid quadrature of `weight · dμ` on `|x| ≤ r_int`. `initial` carries
/// `x₀` per node: material positions in parametric gauge, the initial height
/// at the same radius in graphical gauge.
pub fn weighted_mass(snapshot: &Snapshot, weight: &Weight, initial: Option<&[Point]>, r_int: f64) -> Result<Integral> {
    integrate(snapshot, weight, initial, r_int, |_| 1.0)
}

/// `∫ (H + ⟨x,ν⟩)² · weight dμ` on `|x| ≤ r_int`.
pub fn expander_deficit(snapshot: &Snapshot, weight: &Weight, initial: Option<&[Point]>, r_int: f64) -> Result<Integral> {
    let g = snapshot.geometry();
    integrate(snapshot, weight, initial, r_int, |i| {
        let f = g[i].mean_curvature + g[i].normal_part;
        f * f
    })
}

/// `∫ e^{½|x₀|²} f₀ dμ₀` on the initial snapshot.
pub fn admissibility_integral(initial: &Snapshot, f0: &[f64], r_int: f64) -> Result<Integral> {
    let w = Weight::product(WeightChoice::NormalizedExpanderDensity, WeightChoice::Custom(f0.to_vec()));
    weighted_mass(initial, &w, None, r_int)
}

/// Gaussian entropy `∫ (4π(T-t))^{-n/2} e^{-|x|²/(4(T-t))} dμ` at physical time `t`.
pub fn huisken_entropy(snapshot: &Snapshot, reference_time: f64) -> Result<f64> {
    let t = snapshot.physical_time();
    if !(t < reference_time) {
        return Err(Error::TimeNotBeforeReference);
    }
    let tau = reference_time - t;
    let n = snapshot.dim() as f64;
    let norm = powf(4.0 * PI * tau, -0.5 * n);
    let s: f64 = snapshot
        .geometry()
        .iter()
        .enumerate()
        .map(|(i, g)| exp(-snapshot.position_sq(i) / (4.0 * tau)) * g.dmu)
        .sum();
    Ok(norm * s * snapshot.rep.rotational_factor())
}

/// Node-wise sign and scale monitors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignRecord {
    pub min_residual: f64,
    pub max_residual: f64,
    pub min_mean_curvature: f64,
    pub max_normal_part: f64,
    pub max_tilt: f64,
    /// Physical `t · max|A|²`.
    pub type_iii: f64,
}

pub fn sign_monitors(snapshot: &Snapshot) -> SignRecord {
    sign_monitors_within(snapshot, f64::INFINITY)
}

/// [`sign_monitors`] restricted to nodes with `|x| ≤ radius`.
pub fn sign_monitors_within(snapshot: &Snapshot, radius: f64) -> SignRecord {
    let mut rec = SignRecord {
        min_residual: f64::INFINITY,
        max_residual: f64::NEG_INFINITY,
        min_mean_curvature: f64::INFINITY,
        max_normal_part: f64::NEG_INFINITY,
        max_tilt: 0.0,
        type_iii: 0.0,
    };
    let mut a2: f64 = 0.0;
    for (i, g) in snapshot.geometry().iter().enumerate() {
        if snapshot.position_sq(i) > radius * radius {
            continue;
        }
        let f = g.mean_curvature + g.normal_part;
        rec.min_residual = rec.min_residual.min(f);
        rec.max_residual = rec.max_residual.max(f);
        rec.min_mean_curvature = rec.min_mean_curvature.min(g.mean_curvature);
        rec.max_normal_part = rec.max_normal_part.max(g.normal_part);
        rec.max_tilt = rec.max_tilt.max(g.tilt);
        a2 = a2.max(g.second_ff_sq);
    }
    let t = snapshot.physical_time();
    // |A|² scales by 1/(2t+1) from rescaled to physical variables
    rec.type_iii = match snapshot.clock {
        Clock::Time => t * a2,
        Clock::Rescaled => t / (2.0 * t + 1.0) * a2,
    };
    rec
}

/// Per-node coefficient `(⟨x,ν⟩ - H)(⟨x,ν⟩ + H)` of the rate of `e^{-½|x̃|²} dμ̃`.
pub fn factorization_coefficients(snapshot: &Snapshot) -> Vec<f64> {
    snapshot
        .geometry()
        .iter()
        .map(|g| (g.normal_part - g.mean_curvature) * (g.normal_part + g.mean_curvature))
        .collect()
}

/// `sup |H + ⟨x,ν⟩|` over the annulus `r1 ≤ |x| ≤ r2`.
pub fn annulus_residual(snapshot: &Snapshot, r1: f64, r2: f64) -> Result<f64> {
    let mut sup = f64::NEG_INFINITY;
    for (i, g) in snapshot.geometry().iter().enumerate() {
        let r = sqrt(snapshot.position_sq(i));
        if r >= r1 && r <= r2 {
            sup = sup.max(abs(g.mean_curvature + g.normal_part));
        }
    }
    if sup == f64::NEG_INFINITY {
        return Err(Error::EmptyWindow(r2));
    }
    Ok(sup)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub clock: f64,
    pub value: f64,
    pub truncation: f64,
    pub excluded_fraction: f64,
}

/// Time-stamped samples of one scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalSeries {
    pub name: String,
    pub weight: String,
    pub samples: Vec<Sample>,
}

impl FunctionalSeries {
    pub fn new(name: &str, weight: &str) -> Self {
        Self { name: String::from(name), weight: String::from(weight), samples: Vec::new() }
    }

    /// Append a sample; clocks must increase strictly and values be finite.
    pub fn push(&mut self, sample: Sample) -> Result<()> {
        if !sample.value.is_finite() {
            return Err(Error::InvalidParameter { name: "value", reason: "series values must be finite" });
        }
        if let Some(last) = self.samples.last() {
            if !(sample.clock > last.clock) {
                return Err(Error::InvalidParameter { name: "clock", reason: "series clocks must increase" });
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn push_integral(&mut self, clock: f64, integral: &Integral) -> Result<()> {
        self.push(Sample {
            clock,
            value: integral.value,
            truncation: integral.truncation,
            excluded_fraction: integral.excluded_fraction,
        })
    }

    pub fn push_value(&mut self, clock: f64, value: f64) -> Result<()> {
        self.push(Sample { clock, value, truncation: f64::INFINITY, excluded_fraction: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn clocks(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.clock).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    pub fn max_excluded_fraction(&self) -> f64 {
        self.samples.iter().map(|s| s.excluded_fraction).fold(0.0, f64::max)
    }

    /// Three-point derivative at interior samples, as `(clock, slope)`.
    pub fn derivative(&self) -> Vec<(f64, f64)> {
        self.samples
            .windows(3)
            .map(|w| {
                let (d1, _) = three_point(w[0].clock, w[1].clock, w[2].clock);
                (w[1].clock, d1[0] * w[0].value + d1[1] * w[1].value + d1[2] * w[2].value)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    NonIncreasing,
    NonDecreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotonicityReport {
    pub verdict: Verdict,
    /// Largest step against the direction, relative to `|value| + 1`.
    pub worst_violation: f64,
    pub worst_clock: f64,
}

pub fn monotonicity_verdict(series: &FunctionalSeries, direction: Direction, tol: f64) -> Result<MonotonicityReport> {
    if series.len() < 5 {
        return Err(Error::TooFewSamples { need: 5, have: series.len() });
    }
    let sign = match direction {
        Direction::NonIncreasing => 1.0,
        Direction::NonDecreasing => -1.0,
    };
    let mut worst = f64::NEG_INFINITY;
    let mut worst_clock = series.samples[0].clock;
    for w in series.samples.windows(2) {
        let v = sign * (w[1].value - w[0].value) / (abs(w[0].value) + 1.0);
        if v > worst {
            worst = v;
            worst_clock = w[1].clock;
        }
    }
    let verdict = if series.max_excluded_fraction() > EXCLUDED_FRACTION_LIMIT {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(worst <= tol)
    };
    Ok(MonotonicityReport { verdict, worst_violation: worst, worst_clock })
}

/// Compare the finite-difference slope of a weighted mass with minus the
/// matching weighted deficit, sampled at the same clocks. Returns
/// `sup |slope + deficit| / sup |deficit|` over interior samples.
pub fn derivative_identity_mismatch(mass: &FunctionalSeries, deficit: &FunctionalSeries) -> Result<f64> {
    if mass.len() != deficit.len() || mass.clocks() != deficit.clocks() {
        return Err(Error::InvalidParameter { name: "series", reason: "clocks differ" });
    }
    if mass.len() < 3 {
        return Err(Error::TooFewSamples { need: 3, have: mass.len() });
    }
    let slope = mass.derivative();
    let d = &deficit.samples[1..deficit.len() - 1];
    let scale = d.iter().map(|s| abs(s.value)).fold(0.0, f64::max);
    let err = slope.iter().zip(d).map(|((_, m), s)| abs(m + s.value)).fold(0.0, f64::max);
    Ok(if scale > 0.0 { err / scale } else { err })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeficitReport {
    pub verdict: Verdict,
    pub first_window: [f64; 2],
    pub last_window: [f64; 2],
    /// Clock-averaged deficit over each window.
    pub first_mean: f64,
    pub last_mean: f64,
    /// `last_mean / first_mean`.
    pub ratio: f64,
    /// `(s, ∫_s^end deficit)` at every sample.
    pub tail_integral: Vec<(f64, f64)>,
    /// `(threshold, first clock below it)` for thresholds `first_mean·10^{-k}`.
    pub crossings: Vec<(f64, f64)>,
}

fn window_mean(series: &FunctionalSeries, w: [f64; 2]) -> Result<f64> {
    let pts: Vec<&Sample> = series.samples.iter().filter(|s| s.clock >= w[0] && s.clock <= w[1]).collect();
    match pts.len() {
        0 => Err(Error::EmptyWindow(w[0])),
        1 => Ok(pts[0].value),
        _ => {
            let mut acc = 0.0;
            for p in pts.windows(2) {
                acc += 0.5 * (p[0].value + p[1].value) * (p[1].clock - p[0].clock);
            }
            Ok(acc / (pts[pts.len() - 1].clock - pts[0].clock))
        }
    }
}

/// Whether a deficit series dies out: PASS iff its mean over `last` is at most
/// a tenth of its mean over `first`.
pub fn deficit_vanishing_check(series: &FunctionalSeries, first: [f64; 2], last: [f64; 2]) -> Result<DeficitReport> {
    if series.len() < 5 {
        return Err(Error::TooFewSamples { need: 5, have: series.len() });
    }
    let end = series.samples[series.len() - 1].clock;
    if end < last[1] - 1e-12 {
        return Err(Error::EmptyWindow(last[1]));
    }
    let first_mean = window_mean(series, first)?;
    let last_mean = window_mean(series, last)?;
    let ratio = if first_mean > 0.0 { last_mean / first_mean } else if last_mean > 0.0 { f64::INFINITY } else { 0.0 };
    let mut tail_integral = Vec::with_capacity(series.len());
    let mut acc = 0.0;
    tail_integral.push((end, 0.0));
    for w in series.samples.windows(2).rev() {
        acc += 0.5 * (w[0].value + w[1].value) * (w[1].clock - w[0].clock);
        tail_integral.push((w[0].clock, acc));
    }
    tail_integral.reverse();
    let mut crossings = Vec::new();
    let mut threshold = 0.1 * first_mean;
    while threshold > 0.0 && crossings.len() < 16 {
        match series.samples.iter().find(|s| s.value < threshold) {
            Some(s) => crossings.push((threshold, s.clock)),
            None => break,
        }
        threshold *= 0.1;
    }
    let verdict = if series.max_excluded_fraction() > EXCLUDED_FRACTION_LIMIT {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(last_mean <= 0.1 * first_mean)
    };
    Ok(DeficitReport { verdict, first_window: first, last_window: last, first_mean, last_mean, ratio, tail_integral, crossings })
}

/// Which pointwise density identity to measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityKind {
    /// `ρ dμ` under drifting MCF; rate `-(H + ⟨x,ν⟩/(2t+1))²`.
    Expander,
    /// `e^{½|x̃|²} dμ̃` under the normalized drifting flow; rate `-(H̃ + ⟨x̃,ν̃⟩)²`.
    NormalizedExpander,
    /// `e^{-½|x̃|²} dμ̃` under the normalized drifting flow; rate `⟨x̃,ν̃⟩² - H̃²`.
    NormalizedGaussian,
}

impl DensityKind {
    fn clock(self) -> Clock {
        match self {
            DensityKind::Expander => Clock::Time,
            _ => Clock::Rescaled,
        }
    }

    fn log_density(self, s: &Snapshot, i: usize) -> f64 {
        let x2 = s.position_sq(i);
        let lw = match self {
            DensityKind::Expander => {
                let tau = s.time + 0.5;
                -0.5 * s.dim() as f64 * ln(tau) + x2 / (4.0 * tau)
            }
            DensityKind::NormalizedExpander => 0.5 * x2,
            DensityKind::NormalizedGaussian => -0.5 * x2,
        };
        lw + ln(s.geometry()[i].dmu)
    }

    /// Predicted `d/dclock log(density · dμ)` at node `i`.
    fn log_rate(self, s: &Snapshot, i: usize) -> f64 {
        let g = s.geometry()[i];
        match self {
            DensityKind::Expander => {
                let f = g.mean_curvature + g.normal_part / (2.0 * s.time + 1.0);
                -f * f
            }
            DensityKind::NormalizedExpander => {
                let f = g.mean_curvature + g.normal_part;
                -f * f
            }
            DensityKind::NormalizedGaussian => {
                (g.normal_part - g.mean_curvature) * (g.normal_part + g.mean_curvature)
            }
        }
    }
}

/// Measured and predicted logarithmic rate of a density at one material point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateSample {
    pub clock: f64,
    pub measured: f64,
    pub predicted: f64,
}

impl RateSample {
    pub fn relative_mismatch(&self) -> f64 {
        let d = abs(self.measured - self.predicted);
        if d == 0.0 {
            0.0
        } else {
            d / abs(self.predicted).max(1e-300)
        }
    }
}

fn check_run(snapshots: &[Snapshot], kind: DensityKind) -> Result<()> {
    if snapshots.len() < 3 {
        return Err(Error::TooFewSamples { need: 3, have: snapshots.len() });
    }
    let first = &snapshots[0];
    if first.kind() == Kind::RadialGraph {
        return Err(Error::SpecMismatch("material labels need the parametric gauge"));
    }
    for w in snapshots.windows(2) {
        if w[1].len() != first.len() || w[1].clock != kind.clock() || !(w[1].time > w[0].time) {
            return Err(Error::SpecMismatch("samples must share labels and a strictly increasing clock"));
        }
    }
    Ok(())
}

/// Rate of a density at material label `label`, measured with three-point
/// differences over consecutive samples and predicted from the geometry.
pub fn density_rate(snapshots: &[Snapshot], label: usize, kind: DensityKind) -> Result<Vec<RateSample>> {
    check_run(snapshots, kind)?;
    if label >= snapshots[0].len() {
        return Err(Error::LabelOutOfRange(label));
    }
    let logs: Vec<f64> = snapshots.iter().map(|s| kind.log_density(s, label)).collect();
    Ok(snapshots
        .windows(3)
        .zip(logs.windows(3))
        .map(|(s, l)| {
            let (d1, _) = three_point(s[0].time, s[1].time, s[2].time);
            RateSample {
                clock: s[1].time,
                measured: d1[0] * l[0] + d1[1] * l[1] + d1[2] * l[2],
                predicted: kind.log_rate(&s[1], label),
            }
        })
        .collect())
}

pub fn pointwise_density_rate(snapshots: &[Snapshot], label: usize) -> Result<Vec<RateSample>> {
    density_rate(snapshots, label, DensityKind::Expander)
}

pub fn normalized_density_rate(snapshots: &[Snapshot], label: usize) -> Result<Vec<RateSample>> {
    density_rate(snapshots, label, DensityKind::NormalizedExpander)
}

pub fn factorization_rate(snapshots: &[Snapshot], label: usize) -> Result<Vec<RateSample>> {
    density_rate(snapshots, label, DensityKind::NormalizedGaussian)
}

/// Rates of a density at every node with `|x| ≤ radius`, from three consecutive samples.
pub fn rate_field(window: &[Snapshot; 3], kind: DensityKind, radius: f64) -> Result<Vec<(usize, RateSample)>> {
    check_run(window, kind)?;
    let (d1, _) = three_point(window[0].time, window[1].time, window[2].time);
    let mid = &window[1];
    Ok((0..mid.len())
        .filter(|&i| mid.position_sq(i) <= radius * radius)
        .map(|i| {
            let m = d1[0] * kind.log_density(&window[0], i)
                + d1[1] * kind.log_density(mid, i)
                + d1[2] * kind.log_density(&window[2], i);
            (i, RateSample { clock: mid.time, measured: m, predicted: kind.log_rate(mid, i) })
        })
        .collect())
}

/// `sup |measured - predicted| / sup |predicted|` over a rate field.
pub fn sup_relative_mismatch(field: &[(usize, RateSample)]) -> f64 {
    let scale = field.iter().map(|(_, r)| abs(r.predicted)).fold(0.0, f64::max);
    let err = field.iter().map(|(_, r)| abs(r.measured - r.predicted)).fold(0.0, f64::max);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{from_analytic, trapezoid_cells, Jet, Representation};
    use crate::math::{cos, sin};

    fn analytic_circle(n: usize, r: f64) -> Snapshot {
        let params: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let pts = params.iter().map(|&t| [r * cos(t), r * sin(t)]).collect();
        let jets: Vec<Jet> = params
            .iter()
            .map(|&t| Jet { d1: [-r * sin(t), r * cos(t)], d2: [-r * cos(t), -r * sin(t)] })
            .collect();
        let cells = trapezoid_cells(&params, Some(2.0 * PI));
        from_analytic(Representation::planar_closed(pts).unwrap(), &jets, &cells, 0.0, Clock::Time).unwrap()
    }

    #[test]
    fn circle_gaussian_mass() {
        let c = analytic_circle(64, 1.0);
        let m = weighted_mass(&c, &Weight::single(WeightChoice::NormalizedGaussian), None, f64::INFINITY).unwrap();
        assert!((m.value - 2.0 * PI * exp(-0.5)).abs() <= 1e-8);
        assert_eq!(m.excluded_nodes, 0);
    }

    #[test]
    fn circle_unit_deficit() {
        let c = analytic_circle(64, 1.0);
        let d = expander_deficit(&c, &Weight::unit(), None, f64::INFINITY).unwrap();
        assert!((d.value - 8.0 * PI).abs() <= 1e-10);
    }

    #[test]
    fn initial_weights_coincide() {
        let c = analytic_circle(32, 1.5);
        let x0 = c.points().to_vec();
        let a = weighted_mass(&c, &Weight::expander_relative(), Some(&x0), f64::INFINITY).unwrap();
        let b = weighted_mass(&c, &Weight::single(WeightChoice::HalfInitialGaussian), Some(&x0), f64::INFINITY).unwrap();
        assert!((a.value - b.value).abs() <= 1e-12 * b.value);
    }

    #[test]
    fn missing_initial_positions() {
        let c = analytic_circle(16, 1.0);
        assert!(weighted_mass(&c, &Weight::expander_relative(), None, f64::INFINITY).is_err());
    }

    #[test]
    fn overflowing_nodes_are_excluded() {
        let c = analytic_circle(16, 40.0);
        let m = weighted_mass(&c, &Weight::single(WeightChoice::NormalizedExpanderDensity), None, f64::INFINITY).unwrap();
        assert_eq!(m.excluded_nodes, 16);
        assert!(!m.is_conclusive());
        assert!(matches!(weighted_mass(&c, &Weight::unit(), None, 1.0), Err(Error::EmptyWindow(_))));
    }

    #[test]
    fn circle_entropy() {
        let c = analytic_circle(64, 1.0);
        let e = huisken_entropy(&c, 0.5).unwrap();
        assert!((e - sqrt(2.0 * PI) * exp(-0.5)).abs() <= 1e-8);
        assert_eq!(huisken_entropy(&c, 0.0), Err(Error::TimeNotBeforeReference));
    }

    #[test]
    fn circle_sign_record() {
        let rec = sign_monitors(&analytic_circle(32, 1.0));
        assert!((rec.min_residual - 2.0).abs() < 1e-12);
        assert_eq!(rec.type_iii, 0.0);
    }

    fn series(values: &[f64]) -> FunctionalSeries {
        let mut s = FunctionalSeries::new("test", "1");
        for (k, v) in values.iter().enumerate() {
            s.push_value(k as f64, *v).unwrap();
        }
        s
    }

    #[test]
    fn constant_series_is_monotone_both_ways() {
        let s = series(&[1.0; 6]);
        for d in [Direction::NonIncreasing, Direction::NonDecreasing] {
            assert_eq!(monotonicity_verdict(&s, d, TOL_MONO).unwrap().verdict, Verdict::Pass);
        }
    }

    #[test]
    fn increasing_step_is_caught() {
        let s = series(&[5.0, 4.0, 3.0, 3.5, 2.0]);
        let r = monotonicity_verdict(&s, Direction::NonIncreasing, TOL_MONO).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.worst_clock, 3.0);
        assert!(monotonicity_verdict(&series(&[1.0, 2.0]), Direction::NonIncreasing, 0.0).is_err());
    }

    #[test]
    fn series_rejects_out_of_order() {
        let mut s = series(&[1.0, 2.0]);
        assert!(s.push_value(0.5, 1.0).is_err());
        assert!(s.push_value(3.0, f64::NAN).is_err());
    }

    #[test]
    fn exponential_decay_vanishes() {
        let mut s = FunctionalSeries::new("deficit", "1");
        for k in 0..=30 {
            let t = 0.1 * k as f64;
            s.push_value(t, exp(-3.0 * t)).unwrap();
        }
        let r = deficit_vanishing_check(&s, [0.0, 1.0], [2.0, 3.0]).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(!r.crossings.is_empty());
        assert!((r.tail_integral[0].1 - (1.0 - exp(-9.0)) / 3.0).abs() < 1e-2);
        let flat = series(&[1.0; 6]);
        assert_eq!(deficit_vanishing_check(&flat, [0.0, 1.0], [4.0, 5.0]).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn derivative_identity_on_exact_pair() {
        let mut m = FunctionalSeries::new("m", "w");
        let mut d = FunctionalSeries::new("d", "w");
        for k in 0..=40 {
            let s = 0.05 * k as f64;
            m.push_value(s, exp(-s)).unwrap();
            d.push_value(s, exp(-s)).unwrap();
        }
        assert!(derivative_identity_mismatch(&m, &d).unwrap() < 1e-3);
    }

    #[test]
    fn stationary_line_rates_vanish() {
        let pts: Vec<Point> = (0..21).map(|i| [-1.0 + 0.1 * i as f64, 0.0]).collect();
        let snaps: Vec<Snapshot> = (0..4)
            .map(|k| {
                crate::geometry::compute_geometry(
                    Representation::planar_open(pts.clone()).unwrap(),
                    0.1 * k as f64,
                    Clock::Rescaled,
                )
                .unwrap()
            })
            .collect();
        let r = normalized_density_rate(&snaps, 10).unwrap();
        assert!(r.iter().all(|s| s.measured.abs() < 1e-12 && s.predicted.abs() < 1e-12));
        assert!(matches!(pointwise_density_rate(&snaps, 3), Err(Error::SpecMismatch(_))));
        assert!(matches!(normalized_density_rate(&snaps, 99), Err(Error::LabelOutOfRange(99))));
    }
}
