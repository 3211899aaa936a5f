//! Initial-data catalog, closed-form oracles and hypothesis checks.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expander::solve_graph_expander;
use crate::flow::{Boundary, FlowSpec, Gauge, StepControl, Variant};
use crate::geometry::{
    compute_geometry, dot, from_analytic, sub, trapezoid_cells, Clock, End, Jet, Point, Representation,
    Snapshot, Topology,
};
use crate::math::{abs, cos, sin, sqrt, PI};
use crate::profiles::{RadialJet, RadialProfile};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScenarioKind {
    Circle,
    OffcenterCircle,
    Line,
    PlaneGraph,
    Hyperboloid,
    EhGraph,
    RevolutionSinlog,
    ExpanderProfile,
    Sphere,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 9] = [
        ScenarioKind::Circle,
        ScenarioKind::OffcenterCircle,
        ScenarioKind::Line,
        ScenarioKind::PlaneGraph,
        ScenarioKind::Hyperboloid,
        ScenarioKind::EhGraph,
        ScenarioKind::RevolutionSinlog,
        ScenarioKind::ExpanderProfile,
        ScenarioKind::Sphere,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Circle => "circle",
            ScenarioKind::OffcenterCircle => "offcenter_circle",
            ScenarioKind::Line => "line",
            ScenarioKind::PlaneGraph => "plane_graph",
            ScenarioKind::Hyperboloid => "hyperboloid",
            ScenarioKind::EhGraph => "eh_graph",
            ScenarioKind::RevolutionSinlog => "revolution_sinlog",
            ScenarioKind::ExpanderProfile => "expander_profile",
            ScenarioKind::Sphere => "sphere",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name).ok_or_else(|| Error::UnknownScenario(name.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    Convergent,
    NonConvergent,
    Singular,
}

impl Expected {
    pub fn name(self) -> &'static str {
        match self {
            Expected::Convergent => "convergent",
            Expected::NonConvergent => "non_convergent",
            Expected::Singular => "singular",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Expected::Convergent, Expected::NonConvergent, Expected::Singular].into_iter().find(|e| e.name() == s)
    }
}

/// Monitors a scenario may request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monitor {
    /// Pointwise rate of `ρ dμ` (drifting flow) or `e^{½|x̃|²} dμ̃` (normalized).
    DensityRate,
    /// `∫ e^{½|x̃|² - |x₀|²} dμ̃`, non-increasing.
    WeightedMass,
    /// Slope of the weighted mass against minus the weighted deficit.
    DerivativeIdentity,
    /// Unweighted deficit on a ball and its decay between windows.
    DeficitVanishing,
    /// `sup |H + ⟨x,ν⟩|` on an annulus staying above a floor.
    ResidualFloor,
    /// `min (H + ⟨x,ν⟩)` and `max ⟨x,ν⟩` against `10 h²`.
    SignPreservation,
    /// Physical `t · max|A|²` below a bound.
    TypeIii,
    /// Typed singular termination with `(T - t) max|A|²` bounded.
    TypeI,
    /// Rate of `e^{-½|x̃|²} dμ̃` against `⟨x̃,ν̃⟩² - H̃²`.
    Factorization,
    /// `∫ e^{-½|x̃|²} dμ̃` non-decreasing.
    GaussianMass,
    /// Gaussian entropy at the singular time.
    Entropy,
    /// Sup distance to the matching shooting profile.
    ExpanderMatch,
    /// Image distance between MCF and drifting MCF.
    Equivalence,
}

impl Monitor {
    pub const ALL: [Monitor; 13] = [
        Monitor::DensityRate,
        Monitor::WeightedMass,
        Monitor::DerivativeIdentity,
        Monitor::DeficitVanishing,
        Monitor::ResidualFloor,
        Monitor::SignPreservation,
        Monitor::TypeIii,
        Monitor::TypeI,
        Monitor::Factorization,
        Monitor::GaussianMass,
        Monitor::Entropy,
        Monitor::ExpanderMatch,
        Monitor::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Monitor::DensityRate => "density_rate",
            Monitor::WeightedMass => "weighted_mass",
            Monitor::DerivativeIdentity => "derivative_identity",
            Monitor::DeficitVanishing => "deficit_vanishing",
            Monitor::ResidualFloor => "residual_floor",
            Monitor::SignPreservation => "sign_preservation",
            Monitor::TypeIii => "type_iii",
            Monitor::TypeI => "type_i",
            Monitor::Factorization => "factorization",
            Monitor::GaussianMass => "gaussian_mass",
            Monitor::Entropy => "entropy",
            Monitor::ExpanderMatch => "expander_match",
            Monitor::Equivalence => "equivalence",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|m| m.name() == s)
    }
}

/// Parameters of a catalog entry; unused fields are ignored by a given kind.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioParams {
    pub dim: usize,
    pub radius: f64,
    pub center: Point,
    pub angle: f64,
    pub a: f64,
    pub c: f64,
    pub u0: f64,
    /// Node count for closed curves.
    pub nodes: usize,
    /// Target spacing for open curves and graphs.
    pub spacing: f64,
    pub r_max: f64,
    /// Tolerance for the expander profile used as initial data.
    pub expander_tol: f64,
    pub gauge: Option<Gauge>,
    pub variant: Option<Variant>,
    /// Overrides the power-of-two search for the hyperboloid.
    pub mu: Option<f64>,
    pub q0: Point,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            dim: 2,
            radius: 1.0,
            center: [0.0, 0.0],
            angle: 0.0,
            a: 1.0,
            c: 1.0,
            u0: 1.0,
            nodes: 256,
            spacing: 0.05,
            r_max: 20.0,
            expander_tol: 1e-6,
            gauge: None,
            variant: None,
            mu: None,
            q0: [0.0, 0.0],
        }
    }
}

/// Ready-to-run initial data.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub label: String,
    pub snapshot: Snapshot,
    pub spec: FlowSpec,
    pub monitors: Vec<Monitor>,
    pub expected: Expected,
    /// Rescaling applied to the raw initial data.
    pub mu: f64,
    /// Analytic radial profile, when the initial data has one.
    pub profile: Option<RadialProfile>,
    /// How the initial data was smoothed or truncated.
    pub construction: &'static str,
}

fn spec(variant: Variant, gauge: Gauge, boundary: Boundary, horizon: f64) -> FlowSpec {
    FlowSpec { control: StepControl { horizon, ..StepControl::default() }, ..FlowSpec::new(variant, gauge, boundary) }
}

fn circle_points(n: usize, center: Point, r: f64) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            [center[0] + r * cos(t), center[1] + r * sin(t)]
        })
        .collect()
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: "must be positive" })
    }
}

/// Parameter values giving approximately uniform arclength spacing `h` along
/// a parametrized curve with speed `speed(τ)` on `[t0, t1]`.
pub fn resample_arclength<F: Fn(f64) -> f64>(speed: F, t0: f64, t1: f64, h: f64) -> Vec<f64> {
    let fine = 4096usize.max(libm::ceil(64.0 * (t1 - t0) / h) as usize);
    let dt = (t1 - t0) / fine as f64;
    let mut table = Vec::with_capacity(fine + 1);
    let mut s = 0.0;
    table.push(0.0);
    for j in 0..fine {
        let a = t0 + j as f64 * dt;
        // Simpson on each table cell
        s += dt / 6.0 * (speed(a) + 4.0 * speed(a + 0.5 * dt) + speed(a + dt));
        table.push(s);
    }
    let length = s;
    let n = (libm::round(length / h) as usize).max(4);
    let step = length / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut j = 0;
    for k in 0..=n {
        let target = k as f64 * step;
        if k == n {
            out.push(t1);
            break;
        }
        while j + 1 < fine && table[j + 1] < target {
            j += 1;
        }
        let frac = if table[j + 1] > table[j] { (target - table[j]) / (table[j + 1] - table[j]) } else { 0.0 };
        out.push(t0 + (j as f64 + frac) * dt);
    }
    out
}

fn hyperboloid_point(a: f64, c: f64, tau: f64) -> Point {
    [a * libm::sinh(tau), c * libm::cosh(tau)]
}

/// Meridian parameters `τ` (with `u = cosh τ`) of the upper hyperboloid sheet
/// out to distance `r_max` from the axis.
pub fn hyperboloid_parameters(a: f64, c: f64, r_max: f64, spacing: f64) -> Vec<f64> {
    let t1 = libm::asinh(r_max / a);
    resample_arclength(|t| sqrt(a * a * libm::cosh(t) * libm::cosh(t) + c * c * libm::sinh(t) * libm::sinh(t)), 0.0, t1, spacing)
}

/// Snapshot of the hyperboloid meridian filled from exact derivatives.
pub fn hyperboloid_analytic(dim: usize, a: f64, c: f64, taus: &[f64]) -> Result<Snapshot> {
    let pts: Vec<Point> = taus.iter().map(|&t| hyperboloid_point(a, c, t)).collect();
    let jets: Vec<Jet> = taus
        .iter()
        .map(|&t| Jet {
            d1: [a * libm::cosh(t), c * libm::sinh(t)],
            d2: [a * libm::sinh(t), c * libm::cosh(t)],
        })
        .collect();
    let cells = trapezoid_cells(taus, None);
    let start = if taus[0] == 0.0 { End::Axis } else { End::Free };
    let rep = Representation::revolution(dim, pts, start, End::Free)?;
    from_analytic(rep, &jets, &cells, 0.0, Clock::Rescaled)
}

/// Mean curvature and `⟨x₀,ν⟩` of the hyperboloid surface in `R³` at `u = cosh τ`.
pub fn hyperboloid_closed_form(a: f64, c: f64, u: f64) -> (f64, f64) {
    let q = (a * a + c * c) * u * u - c * c;
    let h = c * (c * c * (u * u - 1.0) + a * a * (u * u + 1.0)) / (a * q * sqrt(q));
    (h, -a * c / sqrt(q))
}

/// Mean curvature and `⟨x₀,ν⟩` of the surface of revolution `z = f(r)` in `R³`.
pub fn revolution_closed_form(f: RadialJet, r: f64) -> (f64, f64) {
    let w2 = 1.0 + f.d1 * f.d1;
    let h = (f.d1 * w2 + r * f.d2) / (r * w2 * sqrt(w2));
    (h, (f.d1 * r - f.value) / sqrt(w2))
}

/// Snapshot of a radial graph filled from the exact jets of `profile`.
pub fn graph_analytic(dim: usize, profile: RadialProfile, r: &[f64]) -> Result<Snapshot> {
    let u: Vec<f64> = r.iter().map(|&x| profile.value(x)).collect();
    let jets: Vec<Jet> = r
        .iter()
        .map(|&x| {
            let j = profile.jet(x);
            Jet { d1: [1.0, j.d1], d2: [0.0, j.d2] }
        })
        .collect();
    let cells = trapezoid_cells(r, None);
    from_analytic(Representation::radial_graph(dim, r, &u)?, &jets, &cells, 0.0, Clock::Rescaled)
}

/// Analytic circle of radius `r` about `center`.
pub fn circle_analytic(n: usize, center: Point, r: f64) -> Result<Snapshot> {
    let params: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
    let pts = circle_points(n, center, r);
    let jets: Vec<Jet> = params
        .iter()
        .map(|&t| Jet { d1: [-r * sin(t), r * cos(t)], d2: [-r * cos(t), -r * sin(t)] })
        .collect();
    let cells = trapezoid_cells(&params, Some(2.0 * PI));
    from_analytic(Representation::planar_closed(pts)?, &jets, &cells, 0.0, Clock::Time)
}

/// `d/dt log(ρ dμ)` at any material point of the centered circle of initial
/// radius `r0` under (drifting) curve shortening, `R² = r0² - 2t`.
pub fn shrinking_circle_log_rate(r0: f64, t: f64) -> f64 {
    let r2 = r0 * r0 - 2.0 * t;
    let w = 2.0 * t + 1.0;
    -(1.0 / r2 + 2.0 / w + r2 / (w * w))
}

/// Uniform radial grid `[0, r_max]` with spacing close to `h`.
pub fn radial_grid(r_max: f64, h: f64) -> Vec<f64> {
    let n = (libm::round(r_max / h) as usize).max(4);
    (0..=n).map(|i| r_max * i as f64 / n as f64).collect()
}

/// Smallest power of two `μ` with `μ H ≥ -⟨x₀ - q₀, ν⟩` at every node, provided
/// `-⟨x₀ - q₀, ν⟩ ≥ 0` everywhere.
pub fn smallest_mu(snapshot: &Snapshot, q0: Point) -> Option<f64> {
    let mut need: f64 = 0.0;
    for (p, g) in snapshot.points().iter().zip(snapshot.geometry()) {
        let m = -dot(sub(*p, q0), g.normal);
        if m < 0.0 || g.mean_curvature < 0.0 {
            return None;
        }
        if m > 0.0 {
            if g.mean_curvature == 0.0 {
                return None;
            }
            need = need.max(m / g.mean_curvature);
        }
    }
    let mut mu = 1.0;
    for _ in 0..64 {
        if mu >= need {
            return Some(mu);
        }
        mu *= 2.0;
    }
    None
}

pub fn build_scenario(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    build(ScenarioKind::parse(name)?, params)
}

pub fn build(kind: ScenarioKind, p: &ScenarioParams) -> Result<Scenario> {
    check_positive("spacing", p.spacing)?;
    check_positive("r_max", p.r_max)?;
    let label = kind.name().to_string();
    let mut sc = match kind {
        ScenarioKind::Circle | ScenarioKind::OffcenterCircle => {
            check_positive("radius", p.radius)?;
            let center = if kind == ScenarioKind::OffcenterCircle && p.center == [0.0, 0.0] { [1.0, 0.0] } else { p.center };
            let rep = Representation::planar_closed(circle_points(p.nodes, center, p.radius))?;
            Scenario {
                kind,
                label,
                snapshot: compute_geometry(rep, 0.0, Clock::Time)?,
                spec: spec(Variant::DriftingMcf, Gauge::Parametric, Boundary::Periodic, 0.5 * p.radius * p.radius),
                monitors: alloc::vec![Monitor::DensityRate, Monitor::TypeI, Monitor::Entropy, Monitor::Equivalence],
                expected: Expected::Singular,
                mu: 1.0,
                profile: None,
                construction: "uniform nodes on a round circle",
            }
        }
        ScenarioKind::Sphere => {
            check_positive("radius", p.radius)?;
            if p.dim < 2 {
                return Err(Error::InvalidParameter { name: "dim", reason: "spheres of revolution need n >= 2" });
            }
            let n = p.nodes.max(5);
            let pts: Vec<Point> = (0..n)
                .map(|i| {
                    let phi = PI * i as f64 / (n - 1) as f64;
                    [if i == 0 || i == n - 1 { 0.0 } else { p.radius * sin(phi) }, -p.radius * cos(phi)]
                })
                .collect();
            let rep = Representation::revolution(p.dim, pts, End::Axis, End::Axis)?;
            let t_sing = p.radius * p.radius / (2.0 * p.dim as f64);
            Scenario {
                kind,
                label,
                snapshot: compute_geometry(rep, 0.0, Clock::Time)?,
                spec: spec(Variant::Mcf, Gauge::Parametric, Boundary::FixedDirichlet, t_sing),
                monitors: alloc::vec![Monitor::TypeI],
                expected: Expected::Singular,
                mu: 1.0,
                profile: None,
                construction: "meridian half circle, equal angles",
            }
        }
        ScenarioKind::Line => {
            let n = (libm::round(2.0 * p.r_max / p.spacing) as usize).max(8);
            let (ca, sa) = (cos(p.angle), sin(p.angle));
            let pts: Vec<Point> = (0..=n)
                .map(|i| {
                    let t = -p.r_max + 2.0 * p.r_max * i as f64 / n as f64;
                    [t * ca, t * sa]
                })
                .collect();
            let rep = Representation::planar_open(pts)?;
            Scenario {
                kind,
                label,
                snapshot: compute_geometry(rep, 0.0, Clock::Rescaled)?,
                spec: spec(Variant::NormalizedDriftingMcf, Gauge::Parametric, Boundary::AsymptoticClamp, 1.0),
                monitors: alloc::vec![Monitor::DensityRate, Monitor::DeficitVanishing, Monitor::TypeIii],
                expected: Expected::Convergent,
                mu: 1.0,
                profile: None,
                construction: "straight segment through the origin",
            }
        }
        ScenarioKind::PlaneGraph | ScenarioKind::EhGraph | ScenarioKind::RevolutionSinlog | ScenarioKind::ExpanderProfile => {
            graph_scenario(kind, p)?
        }
        ScenarioKind::Hyperboloid => hyperboloid_scenario(p)?,
    };
    if let Some(v) = p.variant {
        sc.spec.variant = v;
        let clock = v.clock();
        sc.snapshot = sc.snapshot.with_time(0.0, clock);
    }
    Ok(sc)
}

fn graph_scenario(kind: ScenarioKind, p: &ScenarioParams) -> Result<Scenario> {
    let r = radial_grid(p.r_max, p.spacing);
    let (profile, u, monitors, expected, construction, boundary) = match kind {
        ScenarioKind::PlaneGraph => {
            let prof = RadialProfile::Flat { height: 0.0 };
            (
                Some(prof),
                alloc::vec![0.0; r.len()],
                alloc::vec![Monitor::TypeIii, Monitor::DeficitVanishing, Monitor::ExpanderMatch],
                Expected::Convergent,
                "the plane through the origin",
                Boundary::FarFieldTransport(prof),
            )
        }
        ScenarioKind::EhGraph | ScenarioKind::RevolutionSinlog => {
            let slope = if kind == ScenarioKind::EhGraph { 0.0 } else { 6.0 };
            let prof = RadialProfile::SinLog { slope };
            (
                Some(prof),
                r.iter().map(|&x| prof.value(x)).collect(),
                alloc::vec![Monitor::TypeIii, Monitor::ResidualFloor, Monitor::DeficitVanishing],
                Expected::NonConvergent,
                "r sin log r + slope r for r >= 1; even quartic cap matching value, slope and curvature at r = 1",
                Boundary::FarFieldTransport(prof),
            )
        }
        _ => {
            let profile = solve_graph_expander(p.dim, p.u0, p.r_max.max(5.0), p.expander_tol)?;
            (
                None,
                r.iter().map(|&x| profile.value(x)).collect(),
                alloc::vec![Monitor::DeficitVanishing, Monitor::ExpanderMatch, Monitor::TypeIii],
                Expected::Convergent,
                "shooting profile from the axis, cubic Hermite resampled",
                Boundary::AsymptoticClamp,
            )
        }
    };
    let dim = if kind == ScenarioKind::RevolutionSinlog || kind == ScenarioKind::EhGraph { 2 } else { p.dim };
    let rep = Representation::radial_graph(dim, &r, &u)?;
    Ok(Scenario {
        kind,
        label: kind.name().to_string(),
        snapshot: compute_geometry(rep, 0.0, Clock::Rescaled)?,
        spec: spec(Variant::NormalizedDriftingMcf, Gauge::Graphical, boundary, 4.0),
        monitors,
        expected,
        mu: 1.0,
        profile,
        construction,
    })
}

fn hyperboloid_scenario(p: &ScenarioParams) -> Result<Scenario> {
    check_positive("a", p.a)?;
    check_positive("c", p.c)?;
    let prof = RadialProfile::Hyperboloid { a: p.a, c: p.c };
    let gauge = p.gauge.unwrap_or(Gauge::Parametric);
    let monitors = alloc::vec![
        Monitor::WeightedMass,
        Monitor::DerivativeIdentity,
        Monitor::DeficitVanishing,
        Monitor::SignPreservation,
        Monitor::Factorization,
        Monitor::ExpanderMatch,
        Monitor::TypeIii,
    ];
    // μ is found on the unscaled data, then applied before the run.
    let raw = hyperboloid_analytic(p.dim, p.a, p.c, &hyperboloid_parameters(p.a, p.c, p.r_max, p.spacing))?;
    let mu = match p.mu {
        Some(m) => {
            check_positive("mu", m)?;
            m
        }
        None => smallest_mu(&raw, p.q0).unwrap_or(1.0),
    };
    let s = 1.0 / sqrt(mu);
    let (snapshot, spec_) = match gauge {
        Gauge::Parametric => {
            // sample so that the rescaled meridian reaches r_max with spacing h
            let taus = hyperboloid_parameters(p.a * s, p.c * s, p.r_max, p.spacing);
            let pts: Vec<Point> = taus
                .iter()
                .map(|&t| {
                    let q = hyperboloid_point(p.a * s, p.c * s, t);
                    [q[0], q[1] - p.q0[1] * s]
                })
                .collect();
            let rep = Representation::revolution(p.dim, pts, End::Axis, End::Free)?;
            (
                compute_geometry(rep, 0.0, Clock::Rescaled)?,
                spec(Variant::NormalizedDriftingMcf, Gauge::Parametric, Boundary::AsymptoticClamp, 3.0),
            )
        }
        Gauge::Graphical => {
            let r = radial_grid(p.r_max, p.spacing);
            let scaled = RadialProfile::Hyperboloid { a: p.a * s, c: p.c * s };
            let u: Vec<f64> = r.iter().map(|&x| scaled.value(x) - p.q0[1] * s).collect();
            (
                compute_geometry(Representation::radial_graph(p.dim, &r, &u)?, 0.0, Clock::Rescaled)?,
                spec(Variant::NormalizedDriftingMcf, Gauge::Graphical, Boundary::FarFieldTransport(scaled), 3.0),
            )
        }
    };
    Ok(Scenario {
        kind: ScenarioKind::Hyperboloid,
        label: ScenarioKind::Hyperboloid.name().to_string(),
        snapshot,
        spec: spec_,
        monitors,
        expected: Expected::Convergent,
        mu,
        profile: Some(prof),
        construction: "upper sheet, meridian (a sinh t, c cosh t) resampled to uniform arclength, axis cap at t = 0",
    })
}

/// Outcome of checking one hypothesis on a truncated grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "HOLDS",
            Status::Fails => "FAILS",
            Status::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub status: Status,
    /// Characteristic number: `γ` estimate, `μ`, or an integral.
    pub value: f64,
    pub witnesses: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    /// `⟨x₀,ν⟩² ≤ c (1 + |x₀|²)^{1-δ}`.
    pub growth: Hypothesis,
    /// `μ H ≥ -⟨x₀ - q₀, ν⟩ ≥ 0` for a power of two `μ`.
    pub expander_condition: Hypothesis,
    /// `-⟨x₀ - q₀, ν⟩ ≥ μ H ≥ 0` for some `μ > 0`.
    pub nondecreasing_condition: Hypothesis,
    /// `∫ e^{-½|x₀|²} dμ₀ < ∞`.
    pub c0: Hypothesis,
}

/// Local maxima of `γ = ⟨x,ν⟩²/|x|²` with `γ` above this count as growth witnesses.
const GAMMA_FLOOR: f64 = 0.05;

/// Check the convergence hypotheses on initial data. Noncompact data should be
/// sampled far enough out that recurring behavior is visible.
pub fn admissibility_report(snapshot: &Snapshot, q0: Point) -> Result<AdmissibilityReport> {
    let pts = snapshot.points();
    let geo = snapshot.geometry();
    let compact = snapshot.rep.topology == Topology::Closed
        || snapshot.rep.topology == (Topology::Open { start: End::Axis, end: End::Axis });
    let n = pts.len();

    let growth = if compact {
        Hypothesis { status: Status::Holds, value: 0.0, witnesses: Vec::new() }
    } else {
        let xn2: Vec<f64> = geo.iter().map(|g| g.normal_part * g.normal_part).collect();
        let gamma: Vec<f64> = (0..n)
            .map(|i| {
                let x2 = snapshot.position_sq(i);
                if x2 > 0.0 { xn2[i] / x2 } else { 0.0 }
            })
            .collect();
        let witnesses: Vec<usize> = (1..n - 1)
            .filter(|&i| {
                snapshot.position_sq(i) >= 1.0
                    && gamma[i] >= GAMMA_FLOOR
                    && gamma[i] >= gamma[i - 1]
                    && gamma[i] >= gamma[i + 1]
            })
            .collect();
        let recurring = witnesses.len() >= 2 && {
            let first = gamma[witnesses[0]];
            let last = gamma[witnesses[witnesses.len() - 1]];
            last >= 0.5 * first
        };
        let split = 2 * n / 3;
        let inner = xn2[..split].iter().copied().fold(0.0, f64::max);
        let outer = xn2[split..].iter().copied().fold(0.0, f64::max);
        if recurring {
            let est = witnesses.iter().map(|&i| gamma[i]).fold(f64::INFINITY, f64::min);
            Hypothesis { status: Status::Fails, value: est, witnesses }
        } else if outer <= inner * (1.0 + 1e-9) {
            Hypothesis { status: Status::Holds, value: inner.max(outer), witnesses: Vec::new() }
        } else {
            Hypothesis { status: Status::Inconclusive, value: outer, witnesses }
        }
    };

    let expander_condition = match smallest_mu(snapshot, q0) {
        Some(mu) => Hypothesis { status: Status::Holds, value: mu, witnesses: Vec::new() },
        None => {
            let bad: Vec<usize> =
                (0..n).filter(|&i| -dot(sub(pts[i], q0), geo[i].normal) < 0.0 || geo[i].mean_curvature < 0.0).collect();
            Hypothesis { status: Status::Fails, value: f64::NAN, witnesses: bad }
        }
    };

    let nondecreasing_condition = {
        let mut mu = f64::INFINITY;
        let mut bad = Vec::new();
        for i in 0..n {
            let m = -dot(sub(pts[i], q0), geo[i].normal);
            let h = geo[i].mean_curvature;
            if m < 0.0 || h < 0.0 {
                bad.push(i);
            } else if h > 0.0 {
                mu = mu.min(m / h);
            }
        }
        if bad.is_empty() && mu > 0.0 {
            Hypothesis { status: Status::Holds, value: mu, witnesses: Vec::new() }
        } else {
            if bad.is_empty() {
                bad = (0..n).filter(|&i| geo[i].mean_curvature > 0.0 && -dot(sub(pts[i], q0), geo[i].normal) == 0.0).collect();
            }
            Hypothesis { status: Status::Fails, value: mu.min(0.0), witnesses: bad }
        }
    };

    let c0 = {
        let w = crate::functionals::Weight::single(crate::functionals::WeightChoice::NormalizedGaussian);
        let total = crate::functionals::weighted_mass(snapshot, &w, None, f64::INFINITY)?;
        let status = if compact {
            Status::Holds
        } else {
            // the outermost tenth of the grid must carry a negligible share
            let far = pts[(9 * n) / 10];
            let r_cut = sqrt(dot(far, far));
            let inner = crate::functionals::weighted_mass(snapshot, &w, None, r_cut)?;
            if total.value.is_finite() && abs(total.value - inner.value) <= 1e-12 * total.value {
                Status::Holds
            } else {
                Status::Inconclusive
            }
        };
        Hypothesis { status, value: total.value, witnesses: Vec::new() }
    };

    Ok(AdmissibilityReport { growth, expander_condition, nondecreasing_condition, c0 })
}

/// Wide, log-spaced analytic snapshot of a scenario's initial data for
/// [`admissibility_report`], or the scenario snapshot itself for compact data.
pub fn admissibility_snapshot(sc: &Scenario, r_far: f64) -> Result<Snapshot> {
    match (sc.kind, sc.profile) {
        (ScenarioKind::EhGraph | ScenarioKind::RevolutionSinlog | ScenarioKind::PlaneGraph, Some(prof)) => {
            let inner = 200;
            let outer = 4000;
            let mut r: Vec<f64> = (0..inner).map(|i| i as f64 / inner as f64).collect();
            let l = crate::math::ln(r_far);
            r.extend((0..=outer).map(|k| crate::math::exp(l * k as f64 / outer as f64)));
            graph_analytic(2, prof, &r)
        }
        (ScenarioKind::Hyperboloid, Some(RadialProfile::Hyperboloid { a, c })) => {
            let t1 = libm::asinh(r_far / a);
            let taus: Vec<f64> = (0..=4000).map(|k| t1 * k as f64 / 4000.0).collect();
            hyperboloid_analytic(sc.snapshot.dim(), a, c, &taus)
        }
        _ => Ok(sc.snapshot.clone()),
    }
}

/// `(sup |f'|, sup |r f''|)` of a radial profile over a grid.
pub fn slope_bounds(profile: RadialProfile, r: &[f64]) -> (f64, f64) {
    r.iter().fold((0.0f64, 0.0f64), |(a, b), &x| {
        let j = profile.jet(x);
        (a.max(abs(j.d1)), b.max(abs(x * j.d2)))
    })
}
