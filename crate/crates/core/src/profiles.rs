//! Analytic radial height functions used as initial data and far-field data.

use crate::math::{cos, ln, sin, sqrt};

/// Value and first two derivatives of a radial function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialProfile {
    /// `u ≡ height`.
    Flat { height: f64 },
    /// Upper sheet `u = c √(1 + r²/a²)` of the two-sheeted hyperboloid.
    Hyperboloid { a: f64, c: f64 },
    /// `u = r sin log r + slope·r` for `r ≥ 1`, capped for `r ≤ 1` by the even
    /// quartic matching value, slope and curvature at `r = 1`.
    SinLog { slope: f64 },
}

impl RadialProfile {
    pub fn jet(&self, r: f64) -> RadialJet {
        match *self {
            RadialProfile::Flat { height } => RadialJet { value: height, d1: 0.0, d2: 0.0 },
            RadialProfile::Hyperboloid { a, c } => {
                let q = sqrt(1.0 + r * r / (a * a));
                RadialJet {
                    value: c * q,
                    d1: c * r / (a * a * q),
                    d2: c / (a * a * q * q * q),
                }
            }
            RadialProfile::SinLog { slope } => {
                if r >= 1.0 {
                    let l = ln(r);
                    RadialJet {
                        value: r * sin(l) + slope * r,
                        d1: sin(l) + cos(l) + slope,
                        d2: (cos(l) - sin(l)) / r,
                    }
                } else {
                    let [c0, c2, c4] = sinlog_cap(slope);
                    let r2 = r * r;
                    RadialJet {
                        value: c0 + c2 * r2 + c4 * r2 * r2,
                        d1: 2.0 * c2 * r + 4.0 * c4 * r2 * r,
                        d2: 2.0 * c2 + 12.0 * c4 * r2,
                    }
                }
            }
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.jet(r).value
    }

    /// Third derivative where it exists in closed form (outside caps).
    pub fn third_derivative(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Flat { .. } => 0.0,
            RadialProfile::Hyperboloid { a, c } => {
                let q2 = 1.0 + r * r / (a * a);
                -3.0 * c * r / (a * a * a * a * q2 * q2 * sqrt(q2))
            }
            RadialProfile::SinLog { slope } => {
                if r >= 1.0 {
                    -2.0 * cos(ln(r)) / (r * r)
                } else {
                    let [_, _, c4] = sinlog_cap(slope);
                    24.0 * c4 * r
                }
            }
        }
    }
}

/// Coefficients `[c0, c2, c4]` of the cap `c0 + c2 r² + c4 r⁴`.
fn sinlog_cap(slope: f64) -> [f64; 3] {
    // f(1) = slope, f'(1) = 1 + slope, f''(1) = 1
    let c4 = -slope / 8.0;
    let c2 = 0.5 * (1.0 + 1.5 * slope);
    [slope - c2 - c4, c2, c4]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_matches_at_one() {
        for slope in [0.0, 6.0] {
            let p = RadialProfile::SinLog { slope };
            let below = p.jet(1.0 - 1e-12);
            let above = p.jet(1.0);
            assert!((below.value - above.value).abs() < 1e-10);
            assert!((below.d1 - above.d1).abs() < 1e-10);
            assert!((below.d2 - above.d2).abs() < 1e-10);
        }
        let f = RadialProfile::SinLog { slope: 6.0 }.jet(1.0);
        assert_eq!((f.d1, f.d2), (7.0, 1.0));
    }

    #[test]
    fn sinlog_cap_monotone_convex() {
        let p = RadialProfile::SinLog { slope: 6.0 };
        for i in 0..=100 {
            let j = p.jet(i as f64 / 100.0);
            assert!(j.d1 >= 0.0 && j.d2 >= 0.0);
        }
    }

    #[test]
    fn hyperboloid_derivatives_match_differences() {
        let p = RadialProfile::Hyperboloid { a: 1.3, c: 0.7 };
        let h = 1e-5;
        for r in [0.0, 0.5, 3.0] {
            let j = p.jet(r);
            let fd1 = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
            let fd2 = (p.jet(r + h).d1 - p.jet(r - h).d1) / (2.0 * h);
            let fd3 = (p.jet(r + h).d2 - p.jet(r - h).d2) / (2.0 * h);
            assert!((j.d1 - fd1).abs() < 1e-8);
            assert!((j.d2 - fd2).abs() < 1e-8);
            assert!((p.third_derivative(r) - fd3).abs() < 1e-7);
        }
    }
}
