//! Explicit time stepping of the four flow variants.
//!
//! Parametric gauge moves meridian nodes with the full velocity field, so node
//! indices are material labels. Graphical gauge evolves the height of a radial
//! graph over a fixed grid.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::geometry::{
    self, compute_geometry_with, cross, dot, norm, sub, Clock, End, Ghosts, Kind, NodeGeometry, Point,
    Representation, Snapshot, Topology,
};
use crate::math::{abs, exp, sqrt};
use crate::profiles::RadialProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// `∂x/∂t = -Hν`.
    Mcf,
    /// `∂x/∂t = -Hν + x^T/(2t+1)`.
    DriftingMcf,
    /// `∂x/∂s = -Hν - x`.
    NormalizedMcf,
    /// `∂x/∂s = -(H + ⟨x,ν⟩)ν`.
    NormalizedDriftingMcf,
}

impl Variant {
    pub fn clock(self) -> Clock {
        match self {
            Variant::Mcf | Variant::DriftingMcf => Clock::Time,
            Variant::NormalizedMcf | Variant::NormalizedDriftingMcf => Clock::Rescaled,
        }
    }

    pub fn is_normalized(self) -> bool {
        self.clock() == Clock::Rescaled
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    Parametric,
    Graphical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    /// Closed curves.
    Periodic,
    /// Ghost node continuing the outermost edge along the initial far-field tangent.
    AsymptoticClamp,
    /// Outermost nodes frozen.
    FixedDirichlet,
    /// Graph heights at the outer edge follow the initial profile transported by
    /// the similarity scaling, `e^{-s} u₀(R e^s)`.
    FarFieldTransport(RadialProfile),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    /// CFL factor θ ∈ (0, 1].
    pub cfl: f64,
    pub max_step: f64,
    pub horizon: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { cfl: 0.5, max_step: f64::INFINITY, horizon: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limits {
    /// `max |A|²` above which the run is declared singular.
    pub curvature_cap: f64,
    /// Edge length below which the mesh is declared collapsed.
    pub edge_floor: f64,
    /// `sup |Du|` above which a graphical run loses its gauge.
    pub gradient_bound: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self { curvature_cap: 1.0e4, edge_floor: 1.0e-9, gradient_bound: 1.0e3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowSpec {
    pub variant: Variant,
    pub gauge: Gauge,
    pub boundary: Boundary,
    pub control: StepControl,
    pub limits: Limits,
}

impl FlowSpec {
    pub fn new(variant: Variant, gauge: Gauge, boundary: Boundary) -> Self {
        Self { variant, gauge, boundary, control: StepControl::default(), limits: Limits::default() }
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.control.horizon = horizon;
        self
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.control.cfl = cfl;
        self
    }

    pub fn clock(&self) -> Clock {
        self.variant.clock()
    }

    pub fn validate(&self, rep: &Representation) -> Result<()> {
        let c = &self.control;
        if !(c.cfl > 0.0 && c.cfl <= 1.0) {
            return Err(Error::InvalidParameter { name: "cfl", reason: "must lie in (0, 1]" });
        }
        if !(c.max_step > 0.0) || !(c.horizon >= 0.0) {
            return Err(Error::InvalidParameter { name: "step control", reason: "non-positive step or horizon" });
        }
        let closed = rep.is_closed();
        if closed != (self.boundary == Boundary::Periodic) {
            return Err(Error::SpecMismatch("periodic boundary is for closed curves only"));
        }
        match self.gauge {
            Gauge::Graphical => {
                if rep.kind != Kind::RadialGraph {
                    return Err(Error::SpecMismatch("graphical gauge needs a radial graph"));
                }
                if self.boundary == Boundary::AsymptoticClamp || matches!(self.boundary, Boundary::FixedDirichlet) {
                    return Ok(());
                }
                if let Boundary::FarFieldTransport(_) = self.boundary {
                    return Ok(());
                }
                Err(Error::SpecMismatch("unsupported boundary for graphical gauge"))
            }
            Gauge::Parametric => {
                if rep.kind == Kind::RadialGraph {
                    return Err(Error::SpecMismatch("parametric gauge needs a curve or profile"));
                }
                if let Boundary::FarFieldTransport(_) = self.boundary {
                    return Err(Error::SpecMismatch("far-field transport is a graphical boundary"));
                }
                Ok(())
            }
        }
    }
}

/// Typed early-termination signals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    FiniteTimeSingularity { clock: f64, max_second_ff_sq: f64 },
    MeshCollapse { clock: f64, min_edge: f64 },
    GaugeLoss { clock: f64, max_slope: f64 },
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::FiniteTimeSingularity { .. } => "FiniteTimeSingularity",
            Termination::MeshCollapse { .. } => "MeshCollapse",
            Termination::GaugeLoss { .. } => "GaugeLoss",
        }
    }

    pub fn clock(&self) -> f64 {
        match *self {
            Termination::FiniteTimeSingularity { clock, .. }
            | Termination::MeshCollapse { clock, .. }
            | Termination::GaugeLoss { clock, .. } => clock,
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Termination::FiniteTimeSingularity { clock, max_second_ff_sq } => {
                write!(f, "FiniteTimeSingularity at clock {clock} (max |A|² = {max_second_ff_sq:e})")
            }
            Termination::MeshCollapse { clock, min_edge } => {
                write!(f, "MeshCollapse at clock {clock} (min edge {min_edge:e})")
            }
            Termination::GaugeLoss { clock, max_slope } => {
                write!(f, "GaugeLoss at clock {clock} (sup |Du| = {max_slope:e})")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub max_second_ff_sq: f64,
    pub min_edge: f64,
    pub last_step: f64,
    /// Steps whose requested size exceeded the stability bound and were cut.
    pub rejected_steps: u64,
    pub max_slope: f64,
}

#[derive(Clone, Debug)]
struct GraphStencil {
    centered: ([f64; 3], [f64; 3]),
    upwind: [f64; 3],
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub snapshot: Snapshot,
    pub steps: u64,
    pub clock: f64,
    pub diagnostics: Diagnostics,
    /// Positions at the start of the run, indexed by material label.
    pub initial_points: Vec<Point>,
    spec: FlowSpec,
    start_tangent: Point,
    end_tangent: Point,
    far_slope: f64,
    stencils: Vec<GraphStencil>,
}

fn unit(p: Point) -> Point {
    let l = norm(p);
    [p[0] / l, p[1] / l]
}

impl FlowState {
    pub fn new(snapshot: Snapshot, spec: FlowSpec) -> Result<Self> {
        spec.validate(&snapshot.rep)?;
        let clock = spec.clock();
        if snapshot.clock != clock && snapshot.time != 0.0 {
            return Err(Error::SpecMismatch("snapshot clock differs from the flow clock"));
        }
        let time = snapshot.time;
        let pts = snapshot.points().to_vec();
        let n = pts.len();
        let start_tangent = unit(sub(pts[1], pts[0]));
        let end_tangent = unit(sub(pts[n - 1], pts[n - 2]));
        let far_slope = if spec.gauge == Gauge::Graphical {
            geometry::graph_derivatives(&pts, n - 1, false, None).0
        } else {
            0.0
        };
        let stencils = if spec.gauge == Gauge::Graphical { graph_stencils(&pts) } else { Vec::new() };
        let mut state = Self {
            snapshot: snapshot.clone(),
            steps: 0,
            clock: time,
            diagnostics: Diagnostics::default(),
            initial_points: pts.clone(),
            spec,
            start_tangent,
            end_tangent,
            far_slope,
            stencils,
        };
        state.snapshot = state.rebuild(pts, time).map_err(|_| Error::InvalidRepresentation("initial geometry"))?;
        state.refresh_diagnostics();
        Ok(state)
    }

    pub fn spec(&self) -> &FlowSpec {
        &self.spec
    }

    /// Far-field slope frozen by the asymptotic clamp (graphical gauge).
    pub fn far_field_slope(&self) -> f64 {
        self.far_slope
    }

    fn ghosts(&self, pts: &[Point]) -> Ghosts {
        let mut g = Ghosts::default();
        if self.spec.boundary != Boundary::AsymptoticClamp {
            return g;
        }
        let n = pts.len();
        match self.snapshot.rep.kind {
            Kind::RadialGraph => {
                let h = pts[n - 1][0] - pts[n - 2][0];
                g.end = Some([pts[n - 1][0] + h, pts[n - 1][1] + self.far_slope * h]);
            }
            _ => {
                if let Topology::Open { start, end } = self.snapshot.rep.topology {
                    if start == End::Free {
                        let l = norm(sub(pts[1], pts[0]));
                        g.start = Some([pts[0][0] - l * self.start_tangent[0], pts[0][1] - l * self.start_tangent[1]]);
                    }
                    if end == End::Free {
                        let l = norm(sub(pts[n - 1], pts[n - 2]));
                        g.end = Some([
                            pts[n - 1][0] + l * self.end_tangent[0],
                            pts[n - 1][1] + l * self.end_tangent[1],
                        ]);
                    }
                }
            }
        }
        g
    }

    fn rebuild(&self, pts: Vec<Point>, clock: f64) -> Result<Snapshot> {
        let ghosts = self.ghosts(&pts);
        let rep = Representation {
            kind: self.snapshot.rep.kind,
            dim: self.snapshot.rep.dim,
            topology: self.snapshot.rep.topology,
            points: pts,
        };
        compute_geometry_with(rep, clock, self.spec.clock(), &ghosts, self.snapshot.tilt_direction)
    }

    fn refresh_diagnostics(&mut self) {
        let s = &self.snapshot;
        self.diagnostics.max_second_ff_sq = s.max_second_ff_sq();
        self.diagnostics.min_edge = s.min_edge();
        if s.kind() == Kind::RadialGraph {
            self.diagnostics.max_slope = s
                .geometry()
                .iter()
                .map(|g| if g.tilt.is_finite() { sqrt((g.tilt * g.tilt - 1.0).max(0.0)) } else { f64::INFINITY })
                .fold(0.0, f64::max);
        }
    }

    /// Largest stable step at the current state.
    pub fn stable_step(&self) -> f64 {
        let n = self.snapshot.dim() as f64;
        let theta = self.spec.control.cfl;
        let pts = self.snapshot.points();
        match self.spec.gauge {
            Gauge::Graphical => {
                let h = self.snapshot.min_edge_radial();
                let mut bound = h * h / (2.0 * n);
                if self.spec.variant.is_normalized() {
                    let r_max = pts[pts.len() - 1][0];
                    bound = bound.min(0.5 * h / r_max).min(1.0);
                }
                theta * bound
            }
            Gauge::Parametric => {
                let l = self.snapshot.min_edge();
                let mut bound = l * l / (2.0 * n);
                let drift = match self.spec.variant {
                    Variant::Mcf => 0.0,
                    Variant::DriftingMcf => 1.0 / (2.0 * self.clock + 1.0),
                    _ => 1.0,
                };
                if drift > 0.0 {
                    let rmax = pts.iter().map(|p| norm(*p)).fold(0.0, f64::max);
                    if rmax > 0.0 {
                        bound = bound.min(l / (rmax * drift));
                    }
                }
                theta * bound
            }
        }
    }

    fn meridian_velocity(&self, snap: &Snapshot, clock: f64) -> Vec<Point> {
        let pts = snap.points();
        let n = pts.len();
        let variant = self.spec.variant;
        let pinned_ends = self.spec.boundary == Boundary::FixedDirichlet;
        let (free_start, free_end) = match snap.rep.topology {
            Topology::Open { start, end } => (start == End::Free, end == End::Free),
            Topology::Closed => (false, false),
        };
        snap.geometry()
            .iter()
            .zip(pts)
            .enumerate()
            .map(|(i, (g, p))| {
                if pinned_ends && ((i == 0 && free_start) || (i == n - 1 && free_end)) {
                    return [0.0, 0.0];
                }
                meridian_node_velocity(variant, g, *p, clock)
            })
            .collect()
    }

    fn graph_rate(&self, u: &[f64], r: &[f64], clock: f64) -> Vec<f64> {
        let n = u.len();
        let dim = self.snapshot.dim() as f64;
        let normalized = self.spec.variant.is_normalized();
        let clamp = self.spec.boundary == Boundary::AsymptoticClamp;
        let mut rate = vec![0.0; n];
        let _ = clock;
        for i in 0..n {
            if i == n - 1 && !clamp {
                continue;
            }
            if i == 0 && r[0] == 0.0 {
                let h = r[1];
                rate[0] = dim * 2.0 * (u[1] - u[0]) / (h * h) - if normalized { u[0] } else { 0.0 };
                continue;
            }
            let (prev, next) = if i == n - 1 {
                let h = r[n - 1] - r[n - 2];
                (u[n - 2], u[n - 1] + self.far_slope * h)
            } else if i == 0 {
                // free inner edge: reflect the outward slope
                (u[1], u[1])
            } else {
                (u[i - 1], u[i + 1])
            };
            let (w1, w2) = &self.stencils[i].centered;
            let p = w1[0] * prev + w1[1] * u[i] + w1[2] * next;
            let q = w2[0] * prev + w2[1] * u[i] + w2[2] * next;
            let mut v = q / (1.0 + p * p) + (dim - 1.0) * p / r[i];
            if normalized {
                let up = if i + 2 < n {
                    let w = &self.stencils[i].upwind;
                    w[0] * u[i] + w[1] * u[i + 1] + w[2] * u[i + 2]
                } else if i + 1 < n && clamp {
                    let h = r[n - 1] - r[n - 2];
                    let ghost = u[n - 1] + self.far_slope * h;
                    let w = &self.stencils[i].upwind;
                    w[0] * u[i] + w[1] * u[i + 1] + w[2] * ghost
                } else if i == n - 1 {
                    self.far_slope
                } else {
                    p
                };
                v += r[i] * up - u[i];
            }
            rate[i] = v;
        }
        rate
    }

    fn boundary_height(&self, r_end: f64, clock: f64) -> Option<f64> {
        match self.spec.boundary {
            Boundary::FarFieldTransport(profile) => Some(if self.spec.variant.is_normalized() {
                let e = exp(clock);
                profile.value(r_end * e) / e
            } else {
                profile.value(r_end)
            }),
            _ => None,
        }
    }

    fn try_step(&mut self, dt: f64) -> core::result::Result<(), Termination> {
        let t0 = self.clock;
        let t1 = t0 + dt;
        let new_pts = match self.spec.gauge {
            Gauge::Parametric => {
                let x0 = self.snapshot.points().to_vec();
                let k1 = self.meridian_velocity(&self.snapshot, t0);
                let mid: Vec<Point> =
                    x0.iter().zip(&k1).map(|(x, v)| [x[0] + dt * v[0], x[1] + dt * v[1]]).collect();
                let mid_snap = self.rebuild(mid, t1).map_err(|_| self.collapse(t1))?;
                let k2 = self.meridian_velocity(&mid_snap, t1);
                x0.iter()
                    .zip(k1.iter().zip(&k2))
                    .map(|(x, (a, b))| [x[0] + 0.5 * dt * (a[0] + b[0]), x[1] + 0.5 * dt * (a[1] + b[1])])
                    .collect::<Vec<_>>()
            }
            Gauge::Graphical => {
                let pts = self.snapshot.points();
                let r: Vec<f64> = pts.iter().map(|p| p[0]).collect();
                let u0: Vec<f64> = pts.iter().map(|p| p[1]).collect();
                let k1 = self.graph_rate(&u0, &r, t0);
                let mut mid: Vec<f64> = u0.iter().zip(&k1).map(|(u, k)| u + dt * k).collect();
                let n = mid.len();
                if let Some(b) = self.boundary_height(r[n - 1], t1) {
                    mid[n - 1] = b;
                }
                let k2 = self.graph_rate(&mid, &r, t1);
                let mut u1: Vec<f64> = u0.iter().zip(k1.iter().zip(&k2)).map(|(u, (a, b))| u + 0.5 * dt * (a + b)).collect();
                if let Some(b) = self.boundary_height(r[n - 1], t1) {
                    u1[n - 1] = b;
                }
                r.iter().zip(&u1).map(|(&r, &u)| [r, u]).collect()
            }
        };
        if new_pts.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(self.lost(t1));
        }
        self.snapshot = self.rebuild(new_pts, t1).map_err(|_| self.lost(t1))?;
        self.clock = t1;
        self.steps += 1;
        self.diagnostics.last_step = dt;
        self.refresh_diagnostics();
        let d = self.diagnostics;
        let lim = self.spec.limits;
        if !d.max_second_ff_sq.is_finite() || d.max_second_ff_sq > lim.curvature_cap {
            return Err(Termination::FiniteTimeSingularity { clock: t1, max_second_ff_sq: d.max_second_ff_sq });
        }
        if d.min_edge < lim.edge_floor {
            return Err(Termination::MeshCollapse { clock: t1, min_edge: d.min_edge });
        }
        if self.spec.gauge == Gauge::Graphical && d.max_slope > lim.gradient_bound {
            return Err(Termination::GaugeLoss { clock: t1, max_slope: d.max_slope });
        }
        Ok(())
    }

    fn collapse(&self, clock: f64) -> Termination {
        Termination::MeshCollapse { clock, min_edge: self.diagnostics.min_edge }
    }

    fn lost(&self, clock: f64) -> Termination {
        match self.spec.gauge {
            Gauge::Parametric => self.collapse(clock),
            Gauge::Graphical => Termination::GaugeLoss { clock, max_slope: f64::INFINITY },
        }
    }

    /// One accepted step of at most `max_dt`; returns the step taken.
    pub fn step(&mut self, max_dt: f64) -> core::result::Result<f64, Termination> {
        let bound = self.stable_step();
        let mut dt = max_dt.min(self.spec.control.max_step);
        while dt > bound {
            dt *= 0.5;
            self.diagnostics.rejected_steps += 1;
        }
        self.try_step(dt)?;
        Ok(dt)
    }

    /// Step until the clock reads exactly `target`.
    pub fn advance_to(&mut self, target: f64) -> core::result::Result<(), Termination> {
        self.advance_to_with(target, |_| {})
    }

    /// [`advance_to`](Self::advance_to), calling `on_step` after every step that
/// moved the state, including one that ends the run.
    pub fn advance_to_with<F: FnMut(&FlowState)>(
        &mut self,
        target: f64,
        mut on_step: F,
    ) -> core::result::Result<(), Termination> {
        while self.clock < target {
            let remaining = target - self.clock;
            let bound = self.stable_step().min(self.spec.control.max_step);
            let before = self.steps;
            let result = if remaining <= bound * (1.0 + 1e-12) {
                let r = self.try_step(remaining);
                if r.is_ok() {
                    self.clock = target;
                    self.snapshot.time = target;
                }
                r
            } else {
                // split the remainder evenly so the final step is not a sliver
                let k = libm::ceil(remaining / bound);
                self.try_step(remaining / k)
            };
            // a step that trips a limit still moved the state
            if self.steps > before {
                on_step(self);
            }
            result?;
        }
        Ok(())
    }
}

fn graph_stencils(pts: &[Point]) -> Vec<GraphStencil> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let r = |k: usize| pts[k][0];
            let centered = if i == 0 {
                let h = r(1) - r(0);
                geometry::three_point(r(0) - h, r(0), r(1))
            } else if i == n - 1 {
                let h = r(n - 1) - r(n - 2);
                geometry::three_point(r(n - 2), r(n - 1), r(n - 1) + h)
            } else {
                geometry::three_point(r(i - 1), r(i), r(i + 1))
            };
            let upwind = if i + 2 < n {
                upwind_weights(r(i), r(i + 1), r(i + 2))
            } else if i + 1 < n {
                let h = r(n - 1) - r(n - 2);
                upwind_weights(r(i), r(i + 1), r(i + 1) + h)
            } else {
                [0.0; 3]
            };
            GraphStencil { centered, upwind }
        })
        .collect()
}

/// First derivative at `x0` from `(x0, x1, x2)`.
fn upwind_weights(x0: f64, x1: f64, x2: f64) -> [f64; 3] {
    let h1 = x1 - x0;
    let h2 = x2 - x1;
    let s = h1 + h2;
    [-(2.0 * h1 + h2) / (h1 * s), s / (h1 * h2), -h1 / (h2 * s)]
}

fn meridian_node_velocity(variant: Variant, g: &NodeGeometry, p: Point, clock: f64) -> Point {
    let nu = g.normal;
    let h = g.mean_curvature;
    match variant {
        Variant::Mcf => [-h * nu[0], -h * nu[1]],
        Variant::DriftingMcf => {
            let xn = g.normal_part;
            let k = 1.0 / (2.0 * clock + 1.0);
            [
                -h * nu[0] + k * (p[0] - xn * nu[0]),
                -h * nu[1] + k * (p[1] - xn * nu[1]),
            ]
        }
        Variant::NormalizedMcf => [-h * nu[0] - p[0], -h * nu[1] - p[1]],
        Variant::NormalizedDriftingMcf => {
            let f = h + g.normal_part;
            [-f * nu[0], -f * nu[1]]
        }
    }
}

/// Advance a parametric state by one stable step.
pub fn step_parametric(mut state: FlowState) -> Result<FlowState> {
    if state.spec.gauge != Gauge::Parametric {
        return Err(Error::SpecMismatch("state is not in parametric gauge"));
    }
    state.step(f64::INFINITY).map_err(Error::Terminated)?;
    Ok(state)
}

/// Advance a graphical state by one stable step.
pub fn step_graphical(mut state: FlowState) -> Result<FlowState> {
    if state.spec.gauge != Gauge::Graphical {
        return Err(Error::SpecMismatch("state is not in graphical gauge"));
    }
    state.step(f64::INFINITY).map_err(Error::Terminated)?;
    Ok(state)
}

/// Right-hand side of the graphical similarity-variable equation
/// `ũ_rr/(1+ũ_r²) + (n-1)ũ_r/r + r ũ_r - ũ` on the interior nodes, centered stencils.
pub fn similarity_residual(snapshot: &Snapshot) -> Vec<f64> {
    let pts = snapshot.points();
    let n = pts.len();
    let dim = snapshot.dim() as f64;
    let axis = pts[0][0] == 0.0;
    (0..n)
        .map(|i| {
            let (p, q) = geometry::graph_derivatives(pts, i, axis, None);
            let r = pts[i][0];
            let rot = if i == 0 && axis { q } else { p / r };
            q / (1.0 + p * p) + (dim - 1.0) * rot + r * p - pts[i][1]
        })
        .collect()
}

/// `x ↦ μ^{-1/2}(x - q₀)`, physical time `t ↦ t/μ`; the cache is transformed
/// in place rather than recomputed.
pub fn mu_rescale(snapshot: &Snapshot, mu: f64, q0: Point) -> Result<Snapshot> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter { name: "mu", reason: "must be positive" });
    }
    if snapshot.kind() != Kind::PlanarCurve && q0[0] != 0.0 {
        return Err(Error::InvalidParameter { name: "q0", reason: "must lie on the rotation axis" });
    }
    let s = 1.0 / sqrt(mu);
    let points: Vec<Point> = snapshot.points().iter().map(|p| [(p[0] - q0[0]) * s, (p[1] - q0[1]) * s]).collect();
    let area = crate::math::powf(mu, -(snapshot.dim() as f64) / 2.0);
    let nodes: Vec<NodeGeometry> = snapshot
        .geometry()
        .iter()
        .zip(&points)
        .map(|(g, p)| NodeGeometry {
            mean_curvature: g.mean_curvature / s,
            meridian_curvature: g.meridian_curvature / s,
            rotational_curvature: g.rotational_curvature / s,
            second_ff_sq: g.second_ff_sq * mu,
            dmu: g.dmu * area,
            normal_part: dot(*p, g.normal),
            tangential_norm: abs(cross(g.normal, *p)),
            ..*g
        })
        .collect();
    let rep = Representation { points, ..snapshot.rep.clone() };
    let time = match snapshot.clock {
        Clock::Time => snapshot.time / mu,
        Clock::Rescaled => snapshot.time,
    };
    Ok(Snapshot::from_parts(rep, time, snapshot.clock, snapshot.tilt_direction, nodes))
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    let t = if l2 > 0.0 { (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

fn one_sided_distance(from: &Snapshot, to: &Snapshot) -> f64 {
    let tp = to.points();
    let n = tp.len();
    let segs = if to.rep.is_closed() { n } else { n - 1 };
    from.points()
        .iter()
        .map(|p| (0..segs).map(|k| point_segment_distance(*p, tp[k], tp[(k + 1) % n])).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between the polylines of two snapshots.
pub fn image_distance(a: &Snapshot, b: &Snapshot) -> f64 {
    one_sided_distance(a, b).max(one_sided_distance(b, a))
}

/// Evolve the same initial data by MCF and by drifting MCF (parametric gauge)
/// to `horizon` and return the distance between the final images.
pub fn reparametrization_equivalence_check(
    initial: &Snapshot,
    boundary: Boundary,
    control: StepControl,
    limits: Limits,
    horizon: f64,
) -> Result<f64> {
    let run = |variant| -> Result<Snapshot> {
        let spec = FlowSpec { variant, gauge: Gauge::Parametric, boundary, control, limits };
        let mut state = FlowState::new(initial.clone(), spec)?;
        state.advance_to(horizon).map_err(Error::Terminated)?;
        Ok(state.snapshot)
    };
    let a = run(Variant::Mcf)?;
    let b = run(Variant::DriftingMcf)?;
    Ok(image_distance(&a, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::compute_geometry;
    use crate::math::{cos, sin, PI};

    fn circle(n: usize, center: Point, r: f64) -> Snapshot {
        let pts = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                [center[0] + r * cos(t), center[1] + r * sin(t)]
            })
            .collect();
        compute_geometry(Representation::planar_closed(pts).unwrap(), 0.0, Clock::Time).unwrap()
    }

    fn mean_radius(s: &Snapshot, c: Point) -> f64 {
        s.points().iter().map(|p| norm(sub(*p, c))).sum::<f64>() / s.len() as f64
    }

    #[test]
    fn shrinking_circle_radius() {
        let spec = FlowSpec::new(Variant::Mcf, Gauge::Parametric, Boundary::Periodic).with_cfl(0.5);
        let mut st = FlowState::new(circle(256, [0.0, 0.0], 1.0), spec).unwrap();
        st.advance_to(0.375).unwrap();
        let r = mean_radius(&st.snapshot, [0.0, 0.0]);
        assert!((r - 0.5).abs() / 0.5 <= 1e-4, "radius {r}");
    }

    #[test]
    fn centered_circle_drifting_equals_mcf() {
        let run = |v| {
            let spec = FlowSpec::new(v, Gauge::Parametric, Boundary::Periodic);
            let mut st = FlowState::new(circle(64, [0.0, 0.0], 1.0), spec).unwrap();
            st.advance_to(0.2).unwrap();
            st.snapshot
        };
        let a = run(Variant::Mcf);
        let b = run(Variant::DriftingMcf);
        for (p, q) in a.points().iter().zip(b.points()) {
            assert!(norm(sub(*p, *q)) <= 1e-10);
        }
    }

    #[test]
    fn line_is_a_normalized_expander() {
        let pts: Vec<Point> = (0..41).map(|i| [-2.0 + 0.1 * i as f64, 0.0]).collect();
        let snap = compute_geometry(Representation::planar_open(pts.clone()).unwrap(), 0.0, Clock::Rescaled).unwrap();
        let spec = FlowSpec::new(Variant::NormalizedDriftingMcf, Gauge::Parametric, Boundary::AsymptoticClamp);
        let mut st = FlowState::new(snap, spec).unwrap();
        st.advance_to(1.0).unwrap();
        for (p, q) in st.snapshot.points().iter().zip(&pts) {
            assert!(norm(sub(*p, *q)) <= 1e-12);
        }
    }

    #[test]
    fn flat_graph_stationary() {
        let r: Vec<f64> = (0..101).map(|i| 0.2 * i as f64).collect();
        let u = vec![0.0; r.len()];
        let snap = compute_geometry(Representation::radial_graph(2, &r, &u).unwrap(), 0.0, Clock::Rescaled).unwrap();
        assert!(similarity_residual(&snap).iter().all(|v| v.abs() <= 1e-12));
        let spec = FlowSpec::new(Variant::NormalizedDriftingMcf, Gauge::Graphical, Boundary::AsymptoticClamp);
        let mut st = FlowState::new(snap, spec).unwrap();
        st.advance_to(0.5).unwrap();
        assert!(st.snapshot.points().iter().all(|p| p[1].abs() <= 1e-12));
    }

    #[test]
    fn mu_rescale_identity_and_circle() {
        let c = circle(64, [0.0, 0.0], 1.0);
        let same = mu_rescale(&c, 1.0, [0.0, 0.0]).unwrap();
        assert_eq!(same.points(), c.points());
        let half = mu_rescale(&c, 4.0, [0.0, 0.0]).unwrap();
        assert!((mean_radius(&half, [0.0, 0.0]) - 0.5).abs() < 1e-14);
        for g in half.geometry() {
            assert!((g.mean_curvature - 2.0).abs() < 1e-9);
            assert!((g.normal_part - 0.5).abs() < 1e-12);
        }
        assert!(mu_rescale(&c, 0.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn periodic_boundary_needs_closed_curve() {
        let pts: Vec<Point> = (0..10).map(|i| [i as f64, 0.0]).collect();
        let snap = compute_geometry(Representation::planar_open(pts).unwrap(), 0.0, Clock::Time).unwrap();
        let spec = FlowSpec::new(Variant::Mcf, Gauge::Parametric, Boundary::Periodic);
        assert!(matches!(FlowState::new(snap, spec), Err(Error::SpecMismatch(_))));
    }

    #[test]
    fn shrinking_circle_becomes_singular() {
        let spec = FlowSpec::new(Variant::Mcf, Gauge::Parametric, Boundary::Periodic);
        let mut st = FlowState::new(circle(64, [0.0, 0.0], 1.0), spec).unwrap();
        let err = st.advance_to(0.6).unwrap_err();
        match err {
            Termination::FiniteTimeSingularity { clock, max_second_ff_sq } => {
                assert!(clock < 0.5);
                assert!((0.5 - clock) * max_second_ff_sq < 1.0);
            }
            other => panic!("unexpected {other}"),
        }
    }
}
