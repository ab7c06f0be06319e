//! Quadrature rules on the reference triangle.

use crate::{Error, Result};

/// Positive-weight quadrature rule on the reference triangle; weights sum to
/// the triangle area 1/2 and the rule integrates polynomials up to `degree`
/// exactly.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub degree: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// Builds a rule exact to the requested total degree (1..=12). Degree 1 is
/// the centroid rule, degree 2 the classical symmetric 3-point rule, and
/// degrees 3-4 the symmetric 6-point rule; higher degrees use a collapsed
/// Gauss-Legendre product rule, which keeps all weights positive.
pub fn make_quadrature(degree: usize) -> Result<QuadratureRule> {
    if !(1..=12).contains(&degree) {
        return Err(Error::invalid_argument(format!(
            "unsupported quadrature degree {degree}; supported range is 1..=12"
        )));
    }
    let (points, weights) = match degree {
        1 => (vec![[1.0 / 3.0, 1.0 / 3.0]], vec![0.5]),
        2 => (
            vec![
                [1.0 / 6.0, 1.0 / 6.0],
                [2.0 / 3.0, 1.0 / 6.0],
                [1.0 / 6.0, 2.0 / 3.0],
            ],
            vec![1.0 / 6.0; 3],
        ),
        3 | 4 => {
            let a = 0.445_948_490_915_965;
            let b = 0.091_576_213_509_771;
            let wa = 0.5 * 0.223_381_589_678_011;
            let wb = 0.5 * 0.109_951_743_655_322;
            (
                vec![
                    [a, a],
                    [1.0 - 2.0 * a, a],
                    [a, 1.0 - 2.0 * a],
                    [b, b],
                    [1.0 - 2.0 * b, b],
                    [b, 1.0 - 2.0 * b],
                ],
                vec![wa, wa, wa, wb, wb, wb],
            )
        }
        d => collapsed_product(d),
    };
    Ok(QuadratureRule {
        degree,
        points,
        weights,
    })
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over the reference triangle.
    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }
}

/// Square-to-triangle collapse x = u, y = v(1-u) with Jacobian (1-u). The
/// u-direction integrand has degree `d + 1`, so `(d + 3) / 2` Gauss points
/// per direction suffice.
fn collapsed_product(degree: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let n = (degree + 3) / 2;
    let (gx, gw) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (iu, &u) in gx.iter().enumerate() {
        for (iv, &v) in gx.iter().enumerate() {
            points.push([u, v * (1.0 - u)]);
            weights.push(gw[iu] * gw[iv] * (1.0 - u));
        }
    }
    (points, weights)
}

/// Gauss-Legendre nodes and weights on [0, 1], by Newton iteration on the
/// Legendre polynomial. Also used directly for boundary-edge integrals.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess on [-1, 1].
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        x.push(0.5 * (1.0 - t)); // map to [0, 1], ascending later
        w.push(1.0 / ((1.0 - t * t) * dp * dp)); // = 2/((1-t^2)dp^2) * 1/2
    }
    x.reverse();
    w.reverse();
    (x, w)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
