use std::f64::consts::PI;

use graded_fem::analysis::quadrature::gauss_legendre;
use graded_fem::Point;

/// `(1/4π) ∫₋₁¹ dt / |x - t e₃|` by Gauss rules on subintervals graded
/// geometrically away from the nearest segment point.
pub fn line_integral(x: &Point) -> f64 {
    let q = (x.c[0] * x.c[0] + x.c[1] * x.c[1]).sqrt();
    let z = x.c[2];
    let foot = z.clamp(-1.0, 1.0);
    let scale = (q * q + (z - foot) * (z - foot)).sqrt();
    let mut breaks = vec![-1.0, foot, 1.0];
    let mut d = scale;
    while d < 2.0 {
        breaks.push(foot + d);
        breaks.push(foot - d);
        d *= 2.0;
    }
    breaks.retain(|t| (-1.0..=1.0).contains(t));
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let (nodes, weights) = gauss_legendre(20);
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        for (t, wt) in nodes.iter().zip(&weights) {
            let s = m + r * t;
            sum += wt * r / (q * q + (z - s) * (z - s)).sqrt();
        }
    }
    sum / (4.0 * PI)
}
