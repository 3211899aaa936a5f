//! Discretized hypersurfaces and their first and second order geometry.
//!
//! Every supported representation reduces to a curve in a two dimensional
//! half-plane: a planar curve is itself, a rotationally symmetric hypersurface
//! in `R^{n+1}` is generated by its meridian `(a, z)` with `a` the distance to
//! the rotation axis, and a radial graph `u(r)` over `R^n` is the meridian
//! `(r, u(r))`. The unit normal is the right-hand normal of the direction of
//! travel, which is the outer normal for counterclockwise closed curves and the
//! downward normal for graphs. Mean curvature is positive on convex surfaces
//! with that normal, so the mean curvature vector is `-H ν`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, sphere_volume, sqrt};
use crate::stencil::fd_weights;

pub type Point = [f64; 2];

#[inline]
pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn norm(a: Point) -> f64 {
    sqrt(dot(a, a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Closed or open curve in the plane, `n = 1`.
    PlanarCurve,
    /// Meridian `(a, z)` of a hypersurface of revolution, rotational dimension `n - 1`.
    RevolutionProfile,
    /// Height `u(r)` over a ball in `R^n`.
    RadialGraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    /// The node sits on the rotation axis and the surface closes with a smooth cap.
    Axis,
    /// Truncation of a noncompact surface.
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    Closed,
    Open { start: End, end: End },
}

/// Which flow clock a snapshot is stamped with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clock {
    /// Physical time `t`.
    Time,
    /// Rescaled time `s = ½ log(2t + 1)`.
    Rescaled,
}

impl Clock {
    /// Physical time corresponding to a clock reading.
    pub fn physical_time(self, value: f64) -> f64 {
        match self {
            Clock::Time => value,
            Clock::Rescaled => 0.5 * (crate::math::exp(2.0 * value) - 1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    pub kind: Kind,
    /// Dimension `n` of the hypersurface.
    pub dim: usize,
    pub topology: Topology,
    /// Meridian nodes `(a, z)`; `(r, u)` for radial graphs.
    pub points: Vec<Point>,
}

impl Representation {
    pub fn planar_closed(points: Vec<Point>) -> Result<Self> {
        let rep = Self { kind: Kind::PlanarCurve, dim: 1, topology: Topology::Closed, points };
        rep.validate()?;
        Ok(rep)
    }

    pub fn planar_open(points: Vec<Point>) -> Result<Self> {
        let rep = Self {
            kind: Kind::PlanarCurve,
            dim: 1,
            topology: Topology::Open { start: End::Free, end: End::Free },
            points,
        };
        rep.validate()?;
        Ok(rep)
    }

    pub fn revolution(dim: usize, points: Vec<Point>, start: End, end: End) -> Result<Self> {
        let rep = Self {
            kind: Kind::RevolutionProfile,
            dim,
            topology: Topology::Open { start, end },
            points,
        };
        rep.validate()?;
        Ok(rep)
    }

    /// Radial graph on the grid `r`; the axis end is declared when `r[0] == 0`.
    pub fn radial_graph(dim: usize, r: &[f64], u: &[f64]) -> Result<Self> {
        if r.len() != u.len() {
            return Err(Error::InvalidRepresentation("grid and height lengths differ"));
        }
        let start = if r.first() == Some(&0.0) { End::Axis } else { End::Free };
        let rep = Self {
            kind: Kind::RadialGraph,
            dim,
            topology: Topology::Open { start, end: End::Free },
            points: r.iter().zip(u).map(|(&r, &u)| [r, u]).collect(),
        };
        rep.validate()?;
        Ok(rep)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.topology == Topology::Closed
    }

    /// Number of rotational principal directions.
    pub fn multiplicity(&self) -> usize {
        match self.kind {
            Kind::PlanarCurve => 0,
            _ => self.dim - 1,
        }
    }

    /// Factor turning meridian integrals into integrals over the hypersurface.
    pub fn rotational_factor(&self) -> f64 {
        match self.kind {
            Kind::PlanarCurve => 1.0,
            _ => sphere_volume(self.dim - 1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if self.points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidRepresentation("non-finite node coordinates"));
        }
        match self.kind {
            Kind::PlanarCurve => {
                if self.dim != 1 {
                    return Err(Error::InvalidRepresentation("planar curves have n = 1"));
                }
                if n < 8 {
                    return Err(Error::InvalidRepresentation("planar curves need at least 8 nodes"));
                }
                if let Topology::Open { start, end } = self.topology {
                    if start == End::Axis || end == End::Axis {
                        return Err(Error::InvalidRepresentation("planar curves have no axis"));
                    }
                }
                let wrap = if self.is_closed() { n } else { n - 1 };
                for i in 0..wrap {
                    if norm(sub(self.points[(i + 1) % n], self.points[i])) <= 0.0 {
                        return Err(Error::InvalidRepresentation("consecutive nodes coincide"));
                    }
                }
            }
            Kind::RevolutionProfile => {
                if self.dim < 2 {
                    return Err(Error::InvalidRepresentation("surfaces of revolution need n >= 2"));
                }
                if n < 5 {
                    return Err(Error::InvalidRepresentation("profiles need at least 5 nodes"));
                }
                let Topology::Open { start, end } = self.topology else {
                    return Err(Error::InvalidRepresentation("profiles are open curves"));
                };
                for (i, p) in self.points.iter().enumerate() {
                    let declared = (i == 0 && start == End::Axis) || (i == n - 1 && end == End::Axis);
                    if declared {
                        if p[0] != 0.0 {
                            return Err(Error::InvalidRepresentation("declared cap node is off the axis"));
                        }
                    } else if p[0] <= 0.0 {
                        return Err(Error::AxisDegeneracy { node: i, radius: p[0] });
                    }
                }
                for i in 0..n - 1 {
                    if norm(sub(self.points[i + 1], self.points[i])) <= 0.0 {
                        return Err(Error::InvalidRepresentation("consecutive nodes coincide"));
                    }
                }
            }
            Kind::RadialGraph => {
                if self.dim < 1 {
                    return Err(Error::InvalidRepresentation("dimension must be positive"));
                }
                if n < 5 {
                    return Err(Error::InvalidRepresentation("radial graphs need at least 5 nodes"));
                }
                if self.points[0][0] < 0.0 {
                    return Err(Error::AxisDegeneracy { node: 0, radius: self.points[0][0] });
                }
                for i in 1..n {
                    if self.points[i][0] <= self.points[i - 1][0] {
                        return Err(Error::NonGraphicalFold { node: i });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Cached per-node geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeGeometry {
    /// Unit normal in the meridian plane.
    pub normal: Point,
    /// Mean curvature `H` (sum of principal curvatures).
    pub mean_curvature: f64,
    /// Principal curvature of the meridian.
    pub meridian_curvature: f64,
    /// Each of the `n - 1` rotational principal curvatures.
    pub rotational_curvature: f64,
    /// `|A|²`.
    pub second_ff_sq: f64,
    /// Quadrature weight of the node: local area element times its parameter cell,
    /// without the rotational sphere factor.
    pub dmu: f64,
    /// `⟨x, ν⟩`.
    pub normal_part: f64,
    /// `|x^T|`.
    pub tangential_norm: f64,
    /// `V = ⟨ν, w⟩^{-1}`, infinite where `⟨ν, w⟩ ≤ 0`.
    pub tilt: f64,
}

/// Ghost nodes supplied by a boundary condition at open free ends.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Ghosts {
    pub start: Option<Point>,
    pub end: Option<Point>,
}

/// Exact first and second parameter derivatives of a meridian at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub d1: Point,
    pub d2: Point,
}

/// Default direction `w` for the gauge tilt: the downward `(n+1)`-th axis, so
/// that `⟨ν, w⟩ > 0` for graphs with our downward normal.
pub const DEFAULT_TILT_DIRECTION: Point = [0.0, -1.0];

/// A hypersurface at one instant with its geometry cache filled.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub rep: Representation,
    pub time: f64,
    pub clock: Clock,
    pub tilt_direction: Point,
    nodes: Vec<NodeGeometry>,
}

struct Local {
    normal: Point,
    kappa: f64,
    density: f64,
}

fn from_jet(d1: Point, d2: Point) -> Local {
    let speed = norm(d1);
    let t = [d1[0] / speed, d1[1] / speed];
    Local {
        normal: [t[1], -t[0]],
        kappa: cross(d1, d2) / (speed * speed * speed),
        density: speed,
    }
}

/// Three-point local geometry: chord normal and signed Menger curvature.
fn from_triple(prev: Point, cur: Point, next: Point) -> Local {
    let chord = sub(next, prev);
    let lc = norm(chord);
    let e1 = sub(cur, prev);
    let e2 = sub(next, cur);
    let t = [chord[0] / lc, chord[1] / lc];
    Local {
        normal: [t[1], -t[0]],
        kappa: 2.0 * cross(e1, e2) / (norm(e1) * norm(e2) * lc),
        density: 0.5 * lc,
    }
}

fn one_sided(p0: Point, p1: Point, p2: Point, p3: Point) -> Local {
    let d1 = [
        0.5 * (-3.0 * p0[0] + 4.0 * p1[0] - p2[0]),
        0.5 * (-3.0 * p0[1] + 4.0 * p1[1] - p2[1]),
    ];
    let d2 = [
        2.0 * p0[0] - 5.0 * p1[0] + 4.0 * p2[0] - p3[0],
        2.0 * p0[1] - 5.0 * p1[1] + 4.0 * p2[1] - p3[1],
    ];
    from_jet(d1, d2)
}

fn reflect(p: Point) -> Point {
    [-p[0], p[1]]
}

fn finish(rep: &Representation, i: usize, local: Local, cell: f64, on_axis: bool, w: Point) -> NodeGeometry {
    let p = rep.points[i];
    let m = rep.multiplicity();
    let nu = local.normal;
    let rot = if m == 0 {
        0.0
    } else if on_axis {
        local.kappa
    } else {
        nu[0] / p[0]
    };
    let mf = m as f64;
    let normal_part = dot(p, nu);
    let tangential = abs(cross(nu, p));
    let radial_power = if m == 0 { 1.0 } else { crate::math::powi(abs(p[0]), m as i32) };
    let nw = dot(nu, w);
    NodeGeometry {
        normal: nu,
        mean_curvature: local.kappa + mf * rot,
        meridian_curvature: local.kappa,
        rotational_curvature: rot,
        second_ff_sq: local.kappa * local.kappa + mf * rot * rot,
        dmu: local.density * cell * radial_power,
        normal_part,
        tangential_norm: tangential,
        tilt: if nw > 0.0 { 1.0 / nw } else { f64::INFINITY },
    }
}

/// Fill the geometry cache from node positions with second order stencils.
pub fn compute_geometry(rep: Representation, time: f64, clock: Clock) -> Result<Snapshot> {
    compute_geometry_with(rep, time, clock, &Ghosts::default(), DEFAULT_TILT_DIRECTION)
}

pub fn compute_geometry_with(
    rep: Representation,
    time: f64,
    clock: Clock,
    ghosts: &Ghosts,
    tilt_direction: Point,
) -> Result<Snapshot> {
    rep.validate()?;
    let nodes = match rep.kind {
        Kind::RadialGraph => graph_nodes(&rep, ghosts, tilt_direction),
        _ => meridian_nodes(&rep, ghosts, tilt_direction),
    };
    Ok(Snapshot { rep, time, clock, tilt_direction, nodes })
}

fn meridian_nodes(rep: &Representation, ghosts: &Ghosts, w: Point) -> Vec<NodeGeometry> {
    let pts = &rep.points;
    let n = pts.len();
    let mut out = Vec::with_capacity(n);
    match rep.topology {
        Topology::Closed => {
            for i in 0..n {
                let local = from_triple(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
                out.push(finish(rep, i, local, 1.0, false, w));
            }
        }
        Topology::Open { start, end } => {
            for i in 0..n {
                let (local, cell, axis) = if i == 0 {
                    match (start, ghosts.start) {
                        (End::Axis, _) => (from_triple(reflect(pts[1]), pts[0], pts[1]), 0.5, true),
                        (End::Free, Some(g)) => (from_triple(g, pts[0], pts[1]), 0.5, false),
                        (End::Free, None) => (one_sided(pts[0], pts[1], pts[2], pts[3]), 0.5, false),
                    }
                } else if i == n - 1 {
                    match (end, ghosts.end) {
                        (End::Axis, _) => {
                            (from_triple(pts[n - 2], pts[n - 1], reflect(pts[n - 2])), 0.5, true)
                        }
                        (End::Free, Some(g)) => (from_triple(pts[n - 2], pts[n - 1], g), 0.5, false),
                        (End::Free, None) => {
                            let mut l = one_sided(pts[n - 1], pts[n - 2], pts[n - 3], pts[n - 4]);
                            // stencil runs backwards: flip the travel direction back
                            l.normal = [-l.normal[0], -l.normal[1]];
                            l.kappa = -l.kappa;
                            (l, 0.5, false)
                        }
                    }
                } else {
                    (from_triple(pts[i - 1], pts[i], pts[i + 1]), 1.0, false)
                };
                out.push(finish(rep, i, local, cell, axis, w));
            }
        }
    }
    out
}

/// Weights of the three-point first and second derivative at the middle node
/// `x1` of `(x0, x1, x2)`.
#[inline]
pub(crate) fn three_point(x0: f64, x1: f64, x2: f64) -> ([f64; 3], [f64; 3]) {
    let h1 = x1 - x0;
    let h2 = x2 - x1;
    let s = h1 + h2;
    (
        [-h2 / (h1 * s), (h2 - h1) / (h1 * h2), h1 / (h2 * s)],
        [2.0 / (h1 * s), -2.0 / (h1 * h2), 2.0 / (h2 * s)],
    )
}

/// Radial derivatives `(u_r, u_rr)` at node `i` of a radial graph.
pub(crate) fn graph_derivatives(pts: &[Point], i: usize, axis: bool, ghost_end: Option<Point>) -> (f64, f64) {
    let n = pts.len();
    let apply = |a: Point, b: Point, c: Point| {
        let (w1, w2) = three_point(a[0], b[0], c[0]);
        (
            w1[0] * a[1] + w1[1] * b[1] + w1[2] * c[1],
            w2[0] * a[1] + w2[1] * b[1] + w2[2] * c[1],
        )
    };
    let one_sided = |idx: [usize; 4], at: usize| {
        let xs = idx.map(|k| pts[k][0]);
        let w = fd_weights(xs[at], &xs, 2);
        let d1: f64 = w[1].iter().zip(idx).map(|(c, k)| c * pts[k][1]).sum();
        let d2: f64 = w[2].iter().zip(idx).map(|(c, k)| c * pts[k][1]).sum();
        (d1, d2)
    };
    if i == 0 {
        if axis {
            let h = pts[1][0];
            return (0.0, 2.0 * (pts[1][1] - pts[0][1]) / (h * h));
        }
        return one_sided([0, 1, 2, 3], 0);
    }
    if i == n - 1 {
        return match ghost_end {
            Some(g) => apply(pts[n - 2], pts[n - 1], g),
            None => one_sided([n - 4, n - 3, n - 2, n - 1], 3),
        };
    }
    apply(pts[i - 1], pts[i], pts[i + 1])
}

pub(crate) fn graph_cell(pts: &[Point], i: usize) -> f64 {
    let n = pts.len();
    if i == 0 {
        0.5 * (pts[1][0] - pts[0][0])
    } else if i == n - 1 {
        0.5 * (pts[n - 1][0] - pts[n - 2][0])
    } else {
        0.5 * (pts[i + 1][0] - pts[i - 1][0])
    }
}

fn graph_nodes(rep: &Representation, ghosts: &Ghosts, w: Point) -> Vec<NodeGeometry> {
    let pts = &rep.points;
    let axis = matches!(rep.topology, Topology::Open { start: End::Axis, .. });
    (0..pts.len())
        .map(|i| {
            let (p, q) = graph_derivatives(pts, i, axis, ghosts.end);
            let local = from_jet([1.0, p], [0.0, q]);
            finish(rep, i, local, graph_cell(pts, i), axis && i == 0, w)
        })
        .collect()
}

/// Trapezoid cell widths for the parameter values of an analytic sampling.
/// `period` closes the parameter interval for closed curves.
pub fn trapezoid_cells(params: &[f64], period: Option<f64>) -> Vec<f64> {
    let n = params.len();
    (0..n)
        .map(|i| match period {
            Some(p) => {
                let next = if i + 1 == n { params[0] + p } else { params[i + 1] };
                let prev = if i == 0 { params[n - 1] - p } else { params[i - 1] };
                0.5 * (next - prev)
            }
            None => {
                if i == 0 {
                    0.5 * (params[1] - params[0])
                } else if i == n - 1 {
                    0.5 * (params[n - 1] - params[n - 2])
                } else {
                    0.5 * (params[i + 1] - params[i - 1])
                }
            }
        })
        .collect()
}

/// Fill the geometry cache from exact derivatives of an analytic parametrization.
pub fn from_analytic(
    rep: Representation,
    jets: &[Jet],
    cells: &[f64],
    time: f64,
    clock: Clock,
) -> Result<Snapshot> {
    rep.validate()?;
    if jets.len() != rep.len() || cells.len() != rep.len() {
        return Err(Error::InvalidRepresentation("jet or cell count differs from node count"));
    }
    let axis_start = matches!(rep.topology, Topology::Open { start: End::Axis, .. });
    let axis_end = matches!(rep.topology, Topology::Open { end: End::Axis, .. });
    let n = rep.len();
    let nodes = (0..n)
        .map(|i| {
            let on_axis = (i == 0 && axis_start) || (i == n - 1 && axis_end);
            finish(&rep, i, from_jet(jets[i].d1, jets[i].d2), cells[i], on_axis, DEFAULT_TILT_DIRECTION)
        })
        .collect();
    Ok(Snapshot { rep, time, clock, tilt_direction: DEFAULT_TILT_DIRECTION, nodes })
}

impl Snapshot {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rep.dim
    }

    pub fn kind(&self) -> Kind {
        self.rep.kind
    }

    pub fn points(&self) -> &[Point] {
        &self.rep.points
    }

    pub fn geometry(&self) -> &[NodeGeometry] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Result<&NodeGeometry> {
        self.nodes.get(i).ok_or(Error::LabelOutOfRange(i))
    }

    /// `|x|²` at node `i`.
    pub fn position_sq(&self, i: usize) -> f64 {
        let p = self.rep.points[i];
        dot(p, p)
    }

    /// Physical time of this snapshot.
    pub fn physical_time(&self) -> f64 {
        self.clock.physical_time(self.time)
    }

    /// Normal part `⟨x, ν⟩` and tangential length `|x^T|` at a node.
    pub fn split_position(&self, i: usize) -> Result<(f64, f64)> {
        let g = self.node(i)?;
        Ok((g.normal_part, g.tangential_norm))
    }

    /// `|H⃗ - x^⊥| = |H + ⟨x, ν⟩|`, zero on self-expanders.
    pub fn expander_residual(&self, i: usize) -> Result<f64> {
        let g = self.node(i)?;
        Ok(abs(g.mean_curvature + g.normal_part))
    }

    pub fn max_second_ff_sq(&self) -> f64 {
        self.nodes.iter().map(|g| g.second_ff_sq).fold(0.0, f64::max)
    }

    /// Edge lengths between consecutive nodes (wrapping for closed curves).
    pub fn edges(&self) -> impl Iterator<Item = f64> + '_ {
        let pts = &self.rep.points;
        let n = pts.len();
        let m = if self.rep.is_closed() { n } else { n - 1 };
        (0..m).map(move |i| norm(sub(pts[(i + 1) % n], pts[i])))
    }

    pub fn min_edge(&self) -> f64 {
        self.edges().fold(f64::INFINITY, f64::min)
    }

    pub fn mean_edge(&self) -> f64 {
        let (s, c) = self.edges().fold((0.0, 0usize), |(s, c), e| (s + e, c + 1));
        s / c as f64
    }

    /// Smallest radial grid spacing of a graph (smallest edge otherwise).
    pub fn min_edge_radial(&self) -> f64 {
        if self.rep.kind != Kind::RadialGraph {
            return self.min_edge();
        }
        self.rep.points.windows(2).map(|w| w[1][0] - w[0][0]).fold(f64::INFINITY, f64::min)
    }

    /// Assemble a snapshot from an already transformed cache.
    pub(crate) fn from_parts(
        rep: Representation,
        time: f64,
        clock: Clock,
        tilt_direction: Point,
        nodes: Vec<NodeGeometry>,
    ) -> Self {
        Self { rep, time, clock, tilt_direction, nodes }
    }

    /// Replace the clock stamp without touching geometry.
    pub fn with_time(mut self, time: f64, clock: Clock) -> Self {
        self.time = time;
        self.clock = clock;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, sin, PI};
    use alloc::vec;

    fn circle(n: usize, r: f64) -> Representation {
        let pts = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                [r * cos(t), r * sin(t)]
            })
            .collect();
        Representation::planar_closed(pts).unwrap()
    }

    #[test]
    fn unit_circle_geometry() {
        let s = compute_geometry(circle(256, 1.0), 0.0, Clock::Time).unwrap();
        for g in s.geometry() {
            assert!((g.mean_curvature - 1.0).abs() < 1e-6);
            assert!((g.normal_part - 1.0).abs() < 1e-6);
            assert!((g.second_ff_sq - 1.0).abs() < 1e-6);
            assert!(g.tangential_norm < 1e-6);
        }
        assert!((s.expander_residual(3).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn circle_radius_r_scaling() {
        let s = compute_geometry(circle(64, 2.5), 0.0, Clock::Time).unwrap();
        let (np, tn) = s.split_position(10).unwrap();
        assert!((np - 2.5).abs() < 1e-12 && tn < 1e-12);
        assert!((s.geometry()[10].mean_curvature - 0.4).abs() < 1e-12);
    }

    #[test]
    fn line_through_origin() {
        let pts: Vec<Point> = (0..21).map(|i| [-1.0 + 0.1 * i as f64, 0.0]).collect();
        let s = compute_geometry(Representation::planar_open(pts).unwrap(), 0.0, Clock::Time).unwrap();
        for (i, g) in s.geometry().iter().enumerate() {
            assert!(g.normal_part.abs() < 1e-15);
            assert!((g.tangential_norm - s.points()[i][0].abs()).abs() < 1e-14);
            assert!(s.expander_residual(i).unwrap() < 1e-14);
        }
    }

    #[test]
    fn unit_sphere_as_profile() {
        let n = 65;
        let pts: Vec<Point> = (0..n)
            .map(|i| {
                let phi = PI * i as f64 / (n - 1) as f64;
                [if i == 0 || i == n - 1 { 0.0 } else { sin(phi) }, -cos(phi)]
            })
            .collect();
        let rep = Representation::revolution(2, pts, End::Axis, End::Axis).unwrap();
        let s = compute_geometry(rep, 0.0, Clock::Time).unwrap();
        for g in s.geometry() {
            assert!((g.mean_curvature - 2.0).abs() < 1e-10, "{}", g.mean_curvature);
            assert!((g.second_ff_sq - 2.0).abs() < 1e-10);
            assert!((g.normal_part - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn undeclared_axis_rejected() {
        let pts = vec![[0.0, 0.0], [0.1, 0.0], [0.2, 0.0], [0.3, 0.0], [0.4, 0.0]];
        let err = Representation::revolution(2, pts, End::Free, End::Free).unwrap_err();
        assert!(matches!(err, Error::AxisDegeneracy { node: 0, .. }));
    }

    #[test]
    fn folded_graph_rejected() {
        let r = [0.0, 0.1, 0.2, 0.15, 0.3];
        let u = [0.0; 5];
        assert_eq!(Representation::radial_graph(2, &r, &u).unwrap_err(), Error::NonGraphicalFold { node: 3 });
    }

    #[test]
    fn too_few_planar_nodes() {
        let pts = (0..7).map(|i| [i as f64, 0.0]).collect();
        assert!(Representation::planar_open(pts).is_err());
    }

    #[test]
    fn graph_paraboloid_axis() {
        // u = r²/2 has H(0) = n u_rr(0) = n
        let r: Vec<f64> = (0..41).map(|i| 0.05 * i as f64).collect();
        let u: Vec<f64> = r.iter().map(|r| 0.5 * r * r).collect();
        let rep = Representation::radial_graph(3, &r, &u).unwrap();
        let s = compute_geometry(rep, 0.0, Clock::Time).unwrap();
        assert!((s.geometry()[0].mean_curvature - 3.0).abs() < 1e-12);
        assert!(s.geometry()[0].tilt == 1.0);
    }
}
