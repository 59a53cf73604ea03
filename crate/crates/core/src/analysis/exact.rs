//! Closed-form solutions with analytic gradients.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point, Shape};

pub trait ExactSolution: Send + Sync {
    fn value(&self, x: &Point) -> Result<f64>;
    fn gradient(&self, x: &Point) -> Result<[f64; 3]>;
}

/// An exact solution from a pair of closures.
pub struct FnSolution<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> ExactSolution for FnSolution<V, G>
where
    V: Fn(&Point) -> f64 + Send + Sync,
    G: Fn(&Point) -> [f64; 3] + Send + Sync,
{
    fn value(&self, x: &Point) -> Result<f64> {
        Ok((self.value)(x))
    }

    fn gradient(&self, x: &Point) -> Result<[f64; 3]> {
        Ok((self.gradient)(x))
    }
}

fn singular(x: &Point) -> Error {
    Error::SingularEvaluation(x.c)
}

/// `-log|x| / 2π`, the unit point mass at the origin on the unit disk.
pub fn exact_point_2d(x: &Point) -> Result<f64> {
    let r = x.norm();
    if r == 0.0 {
        return Err(singular(x));
    }
    Ok(-r.ln() / (2.0 * PI))
}

/// `(1/|x| - 1) / 4π`, the unit point mass at the origin on the unit ball.
pub fn exact_point_3d(x: &Point) -> Result<f64> {
    let r = x.norm();
    if r == 0.0 {
        return Err(singular(x));
    }
    Ok((1.0 / r - 1.0) / (4.0 * PI))
}

#[derive(Clone, Copy, Debug)]
pub struct PointSolution {
    pub dim: usize,
}

impl ExactSolution for PointSolution {
    fn value(&self, x: &Point) -> Result<f64> {
        if self.dim == 2 {
            exact_point_2d(x)
        } else {
            exact_point_3d(x)
        }
    }

    fn gradient(&self, x: &Point) -> Result<[f64; 3]> {
        let r = x.norm();
        if r == 0.0 {
            return Err(singular(x));
        }
        let f = if self.dim == 2 {
            -1.0 / (2.0 * PI * r * r)
        } else {
            -1.0 / (4.0 * PI * r * r * r)
        };
        Ok([f * x.c[0], f * x.c[1], f * x.c[2]])
    }
}

/// Distances to `(0,0,±1)` and the squared distance to the axis.
fn axis_geometry(x: &Point) -> (f64, f64, f64, f64) {
    let q = x.c[0] * x.c[0] + x.c[1] * x.c[1];
    let z = x.c[2];
    let rp = (q + (z - 1.0) * (z - 1.0)).sqrt();
    let rm = (q + (z + 1.0) * (z + 1.0)).sqrt();
    (q, z, rp, rm)
}

/// Potential of the unit-density segment from `(0,0,-1)` to `(0,0,1)`, zero on
/// the ellipsoid `x²/3 + y²/3 + z²/4 = 1`.
pub fn exact_segment_3d(x: &Point) -> Result<f64> {
    let (q, z, rp, rm) = axis_geometry(x);
    // ratio (rp + 1 - z) / (rm - 1 - z) without cancellation
    let ratio = if z > 1.0 {
        (rm + z + 1.0) / (rp + z - 1.0)
    } else if z < -1.0 {
        (rp + 1.0 - z) / (rm - 1.0 - z)
    } else {
        if q == 0.0 {
            return Err(singular(x));
        }
        (rp + 1.0 - z) * (rm + 1.0 + z) / q
    };
    Ok((ratio / 3.0).ln() / (4.0 * PI))
}

/// Potential of a constant-density axis segment on the ellipsoid.
#[derive(Clone, Copy, Debug)]
pub struct SegmentSolution3d {
    pub density: f64,
}

impl ExactSolution for SegmentSolution3d {
    fn value(&self, x: &Point) -> Result<f64> {
        Ok(self.density * exact_segment_3d(x)?)
    }

    fn gradient(&self, x: &Point) -> Result<[f64; 3]> {
        let (q, z, rp, rm) = axis_geometry(x);
        // ∫ dt / |x - (0,0,t)|³ over [-1, 1], times q
        let inv3 = if z > 1.0 {
            1.0 / (rp * (rp + z - 1.0)) - 1.0 / (rm * (rm + z + 1.0))
        } else if z < -1.0 {
            1.0 / (rm * (rm - z - 1.0)) - 1.0 / (rp * (rp - z + 1.0))
        } else {
            if q == 0.0 {
                return Err(singular(x));
            }
            ((1.0 - z) / rp + (1.0 + z) / rm) / q
        };
        let c = self.density / (4.0 * PI);
        Ok([
            -c * x.c[0] * inv3,
            -c * x.c[1] * inv3,
            c * (1.0 / rm - 1.0 / rp),
        ])
    }
}

/// `∫ log(x² + s²) ds`.
fn log_antiderivative(x: f64, s: f64) -> f64 {
    let ax = x.abs();
    let q = x * x + s * s;
    let log_term = if q == 0.0 { 0.0 } else { s * q.ln() };
    let atan_term = if ax == 0.0 {
        0.0
    } else {
        2.0 * ax * (s / ax).atan()
    };
    log_term - 2.0 * s + atan_term
}

/// `∫_{-1}^{1} log(x² + (y-t)²) dt`.
fn log_integral(x: &Point) -> f64 {
    let (a, y) = (x.c[0], x.c[1]);
    log_antiderivative(a, 1.0 - y) - log_antiderivative(a, -1.0 - y)
}

/// Value of the log integral on the boundary of the 2D segment domain,
/// attained at the axis point `(0, 2)`.
pub fn segment_2d_level() -> f64 {
    3.0 * 9.0f64.ln() - 4.0
}

fn on_segment_2d(x: &Point) -> bool {
    x.c[0] == 0.0 && x.c[1].abs() <= 1.0
}

/// Potential of the density-½ segment from `(0,-1)` to `(0,1)`, zero on the
/// level curve through `(0, 2)`.
pub fn exact_segment_2d(x: &Point) -> Result<f64> {
    if on_segment_2d(x) {
        return Err(singular(x));
    }
    Ok(-(log_integral(x) - segment_2d_level()) / (8.0 * PI))
}

/// Potential of a constant-density axis segment on [`SegmentLevelDomain`].
#[derive(Clone, Copy, Debug)]
pub struct SegmentSolution2d {
    pub density: f64,
}

impl ExactSolution for SegmentSolution2d {
    fn value(&self, x: &Point) -> Result<f64> {
        Ok(2.0 * self.density * exact_segment_2d(x)?)
    }

    fn gradient(&self, x: &Point) -> Result<[f64; 3]> {
        if on_segment_2d(x) {
            return Err(singular(x));
        }
        let (a, y) = (x.c[0], x.c[1]);
        let di_dx = 2.0 * (2.0 * a).atan2(a * a + y * y - 1.0);
        let di_dy = (a * a + (1.0 + y) * (1.0 + y)).ln() - (a * a + (1.0 - y) * (1.0 - y)).ln();
        let c = -self.density / (4.0 * PI);
        Ok([c * di_dx, c * di_dy, 0.0])
    }
}

/// The planar domain where the 2D segment potential exceeds its value at
/// `(0, 2)`; it contains every point within distance one of the segment.
#[derive(Clone, Copy, Debug, Default)]
pub struct SegmentLevelDomain;

impl SegmentLevelDomain {
    pub fn domain() -> Domain {
        Domain::Custom(Arc::new(SegmentLevelDomain))
    }
}

impl Shape for SegmentLevelDomain {
    fn dim(&self) -> usize {
        2
    }

    fn inside(&self, x: &Point) -> bool {
        on_segment_2d(x) || self.level(x) <= 0.0
    }

    fn project(&self, x: &Point) -> Result<Point> {
        let n = x.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::DegenerateInput(
                "projection direction undefined at the center".into(),
            ));
        }
        let d = *x * (1.0 / n);
        let (mut lo, mut hi) = (1.0, 4.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.level(&(d * mid)) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(d * (0.5 * (lo + hi)))
    }

    fn level(&self, x: &Point) -> f64 {
        if on_segment_2d(x) {
            return f64::NEG_INFINITY;
        }
        let l0 = segment_2d_level();
        (log_integral(x) - l0) / l0
    }
}
