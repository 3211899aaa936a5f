//! Float functions routed through `libm` so results do not depend on whether
//! `std` is linked.

pub use libm::{atan2, cos, exp, fabs as abs, log as ln, sin, sqrt};

pub const PI: f64 = core::f64::consts::PI;

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn powi(x: f64, k: i32) -> f64 {
    libm::pow(x, k as f64)
}

/// Volume of the unit sphere `S^k` embedded in `R^{k+1}`.
pub fn sphere_volume(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_volume(k - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-13);
    }
}
