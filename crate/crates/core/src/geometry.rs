//! Points, singular sources, distances and analytic domains.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

/// A point in the plane or in space. Unused trailing coordinates are zero.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    pub dim: usize,
    pub c: [f64; 3],
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.c[..self.dim]).finish()
    }
}

impl Point {
    pub fn new2(x: f64, y: f64) -> Self {
        Point {
            dim: 2,
            c: [x, y, 0.0],
        }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Point {
            dim: 3,
            c: [x, y, z],
        }
    }

    pub fn origin(dim: usize) -> Self {
        Point { dim, c: [0.0; 3] }
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v.len() {
            2 => Ok(Point::new2(v[0], v[1])),
            3 => Ok(Point::new3(v[0], v[1], v[2])),
            n => Err(Error::InvalidArgument(format!(
                "points have 2 or 3 coordinates, got {n}"
            ))),
        }
    }

    /// Embeds raw storage of the given dimension.
    pub fn from_raw(dim: usize, c: [f64; 3]) -> Self {
        let mut p = Point { dim, c };
        if dim == 2 {
            p.c[2] = 0.0;
        }
        p
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, o: &Point) -> f64 {
        self.c[0] * o.c[0] + self.c[1] * o.c[1] + self.c[2] * o.c[2]
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, o: &Point) -> f64 {
        (*self - *o).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point {
            dim: self.dim,
            c: [self.c[0] + o.c[0], self.c[1] + o.c[1], self.c[2] + o.c[2]],
        }
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point {
            dim: self.dim,
            c: [self.c[0] - o.c[0], self.c[1] - o.c[1], self.c[2] - o.c[2]],
        }
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point {
            dim: self.dim,
            c: [self.c[0] * s, self.c[1] * s, self.c[2] * s],
        }
    }
}

/// Line density of a segment measure, as a function of arclength from `a`.
#[derive(Clone)]
pub enum Density {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Density {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Density::Constant(c) => *c,
            Density::Function(f) => f(t),
        }
    }
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Constant(c) => write!(f, "Constant({c})"),
            Density::Function(_) => write!(f, "Function(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum SingularSource {
    Point {
        location: Point,
    },
    Segment {
        a: Point,
        b: Point,
        density: Density,
    },
}

impl SingularSource {
    pub fn point(location: Point) -> Self {
        SingularSource::Point { location }
    }

    pub fn segment(a: Point, b: Point, density: Density) -> Result<Self> {
        if a.dim != b.dim {
            return Err(Error::InvalidArgument(
                "segment endpoints differ in dimension".into(),
            ));
        }
        if a.dist(&b) == 0.0 {
            return Err(Error::InvalidArgument("segment endpoints coincide".into()));
        }
        Ok(SingularSource::Segment { a, b, density })
    }

    /// Constant-density segment from `-e_n` to `e_n`.
    pub fn axis_segment(dim: usize, density: f64) -> Self {
        let mut a = Point::origin(dim);
        let mut b = Point::origin(dim);
        a.c[dim - 1] = -1.0;
        b.c[dim - 1] = 1.0;
        SingularSource::Segment {
            a,
            b,
            density: Density::Constant(density),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SingularSource::Point { location } => location.dim,
            SingularSource::Segment { a, .. } => a.dim,
        }
    }

    /// Dimension of the singular set: 0 for a point, 1 for a segment.
    pub fn set_dim(&self) -> usize {
        match self {
            SingularSource::Point { .. } => 0,
            SingularSource::Segment { .. } => 1,
        }
    }

    pub fn is_segment(&self) -> bool {
        matches!(self, SingularSource::Segment { .. })
    }

    /// Distance from `x`, without dimension checks.
    pub fn r(&self, x: &Point) -> f64 {
        match self {
            SingularSource::Point { location } => x.dist(location),
            SingularSource::Segment { a, b, .. } => {
                let t = segment_param(x, a, b);
                x.dist(&(*a + (*b - *a) * t))
            }
        }
    }

    /// Distance to the endpoints (to the point itself for a point source).
    pub fn r_e(&self, x: &Point) -> f64 {
        match self {
            SingularSource::Point { location } => x.dist(location),
            SingularSource::Segment { a, b, .. } => x.dist(a).min(x.dist(b)),
        }
    }
}

/// Clamped parameter of the closest point of `[a, b]` to `x`.
pub fn segment_param(x: &Point, a: &Point, b: &Point) -> f64 {
    let d = *b - *a;
    ((*x - *a).dot(&d) / d.dot(&d)).clamp(0.0, 1.0)
}

pub fn dist_to_source(x: &Point, src: &SingularSource) -> Result<f64> {
    if x.dim != src.dim() {
        return Err(Error::InvalidArgument(format!(
            "point has dimension {}, source has dimension {}",
            x.dim,
            src.dim()
        )));
    }
    Ok(src.r(x))
}

pub fn dist_to_endpoints(x: &Point, src: &SingularSource) -> Result<f64> {
    match src {
        SingularSource::Point { .. } => Err(Error::InvalidArgument(
            "endpoint distance needs a segment source".into(),
        )),
        SingularSource::Segment { a, .. } => {
            if x.dim != a.dim {
                return Err(Error::InvalidArgument("dimension mismatch".into()));
            }
            Ok(src.r_e(x))
        }
    }
}

/// A user supplied domain given by an inside test and a boundary projection.
pub trait Shape: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn inside(&self, x: &Point) -> bool;
    fn project(&self, x: &Point) -> Result<Point>;
    /// Zero on the boundary, negative inside; scaled to be dimensionless.
    fn level(&self, x: &Point) -> f64;
}

#[derive(Clone, Debug)]
pub enum Domain {
    UnitDisk,
    UnitBall,
    /// `x²/3 + y²/3 + z²/4 ≤ 1`.
    Ellipsoid,
    Custom(Arc<dyn Shape>),
}

const ELLIPSOID_AXES: [f64; 3] = [3.0, 3.0, 4.0];

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::UnitDisk => 2,
            Domain::UnitBall | Domain::Ellipsoid => 3,
            Domain::Custom(s) => s.dim(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::UnitDisk => "unit-disk",
            Domain::UnitBall => "unit-ball",
            Domain::Ellipsoid => "ellipsoid",
            Domain::Custom(_) => "custom",
        }
    }

    /// Largest distance between two points of the domain.
    pub fn diameter(&self) -> f64 {
        match self {
            Domain::UnitDisk | Domain::UnitBall => 2.0,
            Domain::Ellipsoid => 4.0,
            Domain::Custom(_) => f64::INFINITY,
        }
    }

    fn quadratic(&self, x: &Point) -> Option<f64> {
        match self {
            Domain::UnitDisk | Domain::UnitBall => Some(x.dot(x)),
            Domain::Ellipsoid => Some((0..3).map(|i| x.c[i] * x.c[i] / ELLIPSOID_AXES[i]).sum()),
            Domain::Custom(_) => None,
        }
    }

    fn bilinear(&self, x: &Point, y: &Point) -> f64 {
        match self {
            Domain::Ellipsoid => (0..3).map(|i| x.c[i] * y.c[i] / ELLIPSOID_AXES[i]).sum(),
            _ => x.dot(y),
        }
    }

    pub fn inside(&self, x: &Point) -> bool {
        match self {
            Domain::Custom(s) => s.inside(x),
            _ => self.quadratic(x).unwrap() <= 1.0,
        }
    }

    /// Relative defect of the boundary equation at `x`.
    pub fn boundary_residual(&self, x: &Point) -> f64 {
        match self {
            Domain::Custom(s) => s.level(x).abs(),
            _ => (self.quadratic(x).unwrap().sqrt() - 1.0).abs(),
        }
    }

    /// Radial projection onto the boundary.
    pub fn boundary_project(&self, x: &Point) -> Result<Point> {
        if x.dim != self.dim() {
            return Err(Error::InvalidArgument("dimension mismatch".into()));
        }
        match self {
            Domain::Custom(s) => s.project(x),
            _ => {
                let q = self.quadratic(x).unwrap();
                if q == 0.0 || !q.is_finite() {
                    return Err(Error::DegenerateInput(
                        "projection direction undefined at the center".into(),
                    ));
                }
                let mut p = *x * (1.0 / q.sqrt());
                // one Newton correction on the scale removes the last ulp drift
                let q2 = self.quadratic(&p).unwrap();
                p = p * (1.0 / q2.sqrt());
                Ok(p)
            }
        }
    }

    /// Positive `t` with `origin + t·dir` on the boundary, for `origin` inside.
    pub fn ray_exit(&self, origin: &Point, dir: &Point) -> Result<f64> {
        match self {
            Domain::Custom(s) => ray_exit_bisect(s.as_ref(), origin, dir),
            _ => {
                let a = self.quadratic(dir).unwrap();
                let b = 2.0 * self.bilinear(origin, dir);
                let c = self.quadratic(origin).unwrap() - 1.0;
                if a <= 0.0 || c > 0.0 {
                    return Err(Error::DegenerateInput("ray does not start inside".into()));
                }
                let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
                Ok(if b >= 0.0 {
                    -2.0 * c / (b + disc)
                } else {
                    (-b + disc) / (2.0 * a)
                })
            }
        }
    }
}

fn ray_exit_bisect(s: &dyn Shape, origin: &Point, dir: &Point) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut n = 0;
    while s.inside(&(*origin + *dir * hi)) {
        lo = hi;
        hi *= 2.0;
        n += 1;
        if n > 60 {
            return Err(Error::DegenerateInput("ray never leaves the domain".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if s.level(&(*origin + *dir * mid)) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_seg() -> SingularSource {
        SingularSource::segment(
            Point::new3(0.0, 0.0, -0.5),
            Point::new3(0.0, 0.0, 0.5),
            Density::Constant(1.0),
        )
        .unwrap()
    }

    #[test]
    fn segment_distances() {
        let s = unit_seg();
        assert_eq!(
            dist_to_source(&Point::new3(1.0, 0.0, 0.0), &s).unwrap(),
            1.0
        );
        assert_eq!(
            dist_to_source(&Point::new3(0.0, 0.0, 1.0), &s).unwrap(),
            0.5
        );
        assert_eq!(
            dist_to_endpoints(&Point::new3(0.0, 0.0, 0.0), &s).unwrap(),
            0.5
        );
        assert!((dist_to_endpoints(&Point::new3(0.0, 3.0, 4.5), &s).unwrap() - 5.0).abs() < 1e-15);
        assert_eq!(
            dist_to_endpoints(&Point::new3(0.0, 0.0, 0.5), &s).unwrap(),
            0.0
        );
    }

    #[test]
    fn point_distance_and_errors() {
        let p = SingularSource::point(Point::origin(3));
        assert_eq!(dist_to_source(&Point::origin(3), &p).unwrap(), 0.0);
        assert!(dist_to_source(&Point::origin(2), &p).is_err());
        assert!(dist_to_endpoints(&Point::origin(3), &p).is_err());
    }

    #[test]
    fn projections() {
        let p = Domain::UnitDisk
            .boundary_project(&Point::new2(2.0, 0.0))
            .unwrap();
        assert_eq!(p, Point::new2(1.0, 0.0));
        let p = Domain::Ellipsoid
            .boundary_project(&Point::new3(0.0, 0.0, 3.0))
            .unwrap();
        assert!((p.c[2] - 2.0).abs() < 1e-15);
        let p = Domain::Ellipsoid
            .boundary_project(&Point::new3(1.0, 1.0, 0.0))
            .unwrap();
        let s = 1.5f64.sqrt();
        assert!((p.c[0] - s).abs() < 1e-15 && (p.c[1] - s).abs() < 1e-15);
        assert!(matches!(
            Domain::UnitBall.boundary_project(&Point::origin(3)),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn ellipsoid_ray_exit() {
        let o = Point::new3(0.0, 0.0, 1.0);
        let t = Domain::Ellipsoid
            .ray_exit(&o, &Point::new3(0.0, 0.0, 1.0))
            .unwrap();
        assert!((t - 1.0).abs() < 1e-14);
        let t = Domain::Ellipsoid
            .ray_exit(&o, &Point::new3(1.0, 0.0, 0.0))
            .unwrap();
        let hit = o + Point::new3(t, 0.0, 0.0);
        assert!(Domain::Ellipsoid.boundary_residual(&hit) < 1e-14);
    }
}
