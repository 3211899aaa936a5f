//! Rotationally symmetric graphical self-expanders.
//!
//! The profile `ũ(r)` solves
//! `ũ'' = -(1 + ũ'²) [ (n-1) ũ'/r + r ũ' - ũ ]`, `ũ(0) = u₀`, `ũ'(0) = 0`,
//! integrated outward with RK4 from the axis, where the equation forces
//! `ũ''(0) = u₀/n`. The grid is refined until the expander residual
//! `|H + ⟨x,ν⟩|`, recomputed from the nodes by the geometry stencils, is below
//! the requested tolerance.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{compute_geometry, Clock, Kind, Representation, Snapshot};
use crate::math::abs;

/// Finest grid tried before giving up on a tolerance.
const MAX_NODES: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub struct ExpanderProfile {
    pub dim: usize,
    pub initial_height: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Cone slope `k` of the far field `ũ ≈ k r + (n-1)k/(2r)`.
    pub slope: f64,
    /// `sup |H + ⟨x,ν⟩|` over the grid.
    pub residual: f64,
    pub tolerance: f64,
    pub step: f64,
    /// Grid refinements performed.
    pub iterations: usize,
}

fn rhs(dim: f64, r: f64, u: f64, p: f64) -> f64 {
    if r == 0.0 {
        return u / dim;
    }
    -(1.0 + p * p) * ((dim - 1.0) * p / r + r * p - u)
}

/// Integrate on the uniform grid of spacing `h` up to `r_max`.
fn integrate(dim: usize, u0: f64, r_max: f64, h: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = libm::ceil(r_max / h - 1e-9) as usize;
    let h = r_max / n as f64;
    let d = dim as f64;
    let mut r = Vec::with_capacity(n + 1);
    let mut u = Vec::with_capacity(n + 1);
    let mut du = Vec::with_capacity(n + 1);
    let (mut y, mut p) = (u0, 0.0);
    r.push(0.0);
    u.push(y);
    du.push(p);
    for i in 0..n {
        let x = i as f64 * h;
        let k1 = (p, rhs(d, x, y, p));
        let k2 = (p + 0.5 * h * k1.1, rhs(d, x + 0.5 * h, y + 0.5 * h * k1.0, p + 0.5 * h * k1.1));
        let k3 = (p + 0.5 * h * k2.1, rhs(d, x + 0.5 * h, y + 0.5 * h * k2.0, p + 0.5 * h * k2.1));
        let k4 = (p + h * k3.1, rhs(d, x + h, y + h * k3.0, p + h * k3.1));
        y += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        p += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !y.is_finite() || !p.is_finite() || abs(p) > 1e8 {
            return Err(Error::ExpanderBlowup(x + h));
        }
        r.push((i + 1) as f64 * h);
        u.push(y);
        du.push(p);
    }
    Ok((r, u, du))
}

fn residual_of(dim: usize, r: &[f64], u: &[f64]) -> Result<f64> {
    let snap = compute_geometry(Representation::radial_graph(dim, r, u)?, 0.0, Clock::Rescaled)?;
    Ok((0..snap.len()).map(|i| snap.expander_residual(i).unwrap_or(f64::INFINITY)).fold(0.0, f64::max))
}

/// Profile on a fixed grid spacing, without the tolerance loop.
pub fn solve_with_step(dim: usize, u0: f64, r_max: f64, h: f64) -> Result<ExpanderProfile> {
    if dim < 1 {
        return Err(Error::InvalidParameter { name: "n", reason: "must be positive" });
    }
    if !(r_max >= 5.0) {
        return Err(Error::InvalidParameter { name: "r_max", reason: "must be at least 5" });
    }
    if !(h > 0.0) || !u0.is_finite() {
        return Err(Error::InvalidParameter { name: "step", reason: "must be positive" });
    }
    let (r, u, du) = integrate(dim, u0, r_max, h)?;
    let residual = residual_of(dim, &r, &u)?;
    let big_r = r[r.len() - 1];
    let slope = u[u.len() - 1] / (big_r + (dim as f64 - 1.0) / (2.0 * big_r));
    let step = r[1];
    Ok(ExpanderProfile { dim, initial_height: u0, r, u, du, slope, residual, tolerance: f64::INFINITY, step, iterations: 0 })
}

/// Shoot from the axis with height `u0`, halving the step until the residual
/// is at most `tol`.
pub fn solve_graph_expander(dim: usize, u0: f64, r_max: f64, tol: f64) -> Result<ExpanderProfile> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter { name: "tol", reason: "must be positive" });
    }
    // explicit steps lose stability once h r (1 + u'^2) is of order one
    let mut h = (r_max / 256.0).min(0.05).min(1.0 / r_max);
    let mut iterations = 0;
    loop {
        let mut p = match solve_with_step(dim, u0, r_max, h) {
            Err(Error::ExpanderBlowup(_)) if ((r_max / h) as usize) * 2 <= MAX_NODES => {
                h *= 0.5;
                iterations += 1;
                continue;
            }
            other => other?,
        };
        if p.residual <= tol {
            p.tolerance = tol;
            p.iterations = iterations;
            return Ok(p);
        }
        if p.r.len() * 2 > MAX_NODES {
            return Err(Error::ToleranceNotMet { tol, residual: p.residual });
        }
        h *= 0.5;
        iterations += 1;
    }
}

impl ExpanderProfile {
    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    /// Cubic Hermite interpolation of the height.
    pub fn value(&self, x: f64) -> f64 {
        let h = self.step;
        let n = self.r.len();
        let k = ((x / h) as usize).min(n - 2);
        let t = (x - self.r[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.u[k]
            + (t3 - 2.0 * t2 + t) * h * self.du[k]
            + (-2.0 * t3 + 3.0 * t2) * self.u[k + 1]
            + (t3 - t2) * h * self.du[k + 1]
    }

    pub fn snapshot(&self) -> Result<Snapshot> {
        compute_geometry(Representation::radial_graph(self.dim, &self.r, &self.u)?, 0.0, Clock::Rescaled)
    }
}

/// Sup height difference between a graphical snapshot and a profile on `r ≤ window`.
/// Revolution profiles are accepted as long as the meridian is a graph over the window.
pub fn compare_to_expander(snapshot: &Snapshot, profile: &ExpanderProfile, window: f64) -> Result<f64> {
    if snapshot.kind() == Kind::PlanarCurve {
        return Err(Error::SpecMismatch("comparison needs a radial graph or a graphical profile"));
    }
    let pts = snapshot.points();
    let extent = pts.iter().map(|p| p[0]).fold(0.0, f64::max);
    if window > profile.r_max() || window > extent {
        return Err(Error::IncompatibleWindow("window exceeds a grid"));
    }
    let mut sup: f64 = 0.0;
    let mut last = f64::NEG_INFINITY;
    for (i, p) in pts.iter().enumerate() {
        if p[0] > window {
            continue;
        }
        if p[0] <= last {
            return Err(Error::NonGraphicalFold { node: i });
        }
        last = p[0];
        sup = sup.max(abs(p[1] - profile.value(p[0])));
    }
    Ok(sup)
}
