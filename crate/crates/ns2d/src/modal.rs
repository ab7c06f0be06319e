//! Normal-mode analysis toolkit for the semi-discrete half-plane model
//! problem: closed-form root functions, determinant scans over the complex
//! Laplace variable, and leading-order boundary-layer coefficients.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use num_complex::Complex64;

use crate::{Error, Result};

/// Parameters of one modal evaluation: grid spacing, wavenumber, viscosity,
/// divergence damping coefficient and the Laplace variable.
#[derive(Debug, Clone, Copy)]
pub struct ModalCase {
    pub h: f64,
    pub k: f64,
    pub nu: f64,
    pub alpha: f64,
    pub s: Complex64,
}

impl ModalCase {
    pub fn validate(&self) -> Result<()> {
        if self.h <= 0.0 || self.nu <= 0.0 || self.k == 0.0 {
            return Err(Error::invalid_argument(
                "modal case requires h > 0, nu > 0, k != 0".to_string(),
            ));
        }
        Ok(())
    }
}

/// Decay rate xi > 0 of the pressure mode: (4/h^2) sinh^2(xi h / 2) = k^2.
pub fn solve_xi(h: f64, k: f64) -> f64 {
    2.0 / h * (k.abs() * h / 2.0).asinh()
}

/// e^{-xi h} in closed form: the root of w^2 - (2 + h^2 k^2) w + 1 = 0 with
/// magnitude below one.
pub fn exp_neg_xi_h(h: f64, k: f64) -> f64 {
    let hk2 = h * h * k * k;
    0.5 * ((2.0 + hk2) - (4.0 * hk2 + hk2 * hk2).sqrt())
}

/// e^{-gamma h} where (4/h^2) sinh^2(gamma h / 2) = s/nu + k^2, Re(gamma)>0.
/// Only defined for Re(s) > 0 or real nonnegative s; elsewhere the branch
/// selection is ambiguous.
pub fn exp_neg_gamma_h(h: f64, k: f64, nu: f64, s: Complex64) -> Result<Complex64> {
    if !(s.re > 0.0 || (s.im == 0.0 && s.re >= 0.0)) {
        return Err(Error::Domain(format!(
            "gamma branch undefined for s = {s} (need Re(s) > 0 or real s >= 0)"
        )));
    }
    let z = s / nu + k * k;
    let b = 2.0 + h * h * z;
    let disc = (b * b - 4.0).sqrt();
    let r1 = (b - disc) / 2.0;
    let r2 = (b + disc) / 2.0;
    Ok(if r1.norm() <= r2.norm() { r1 } else { r2 })
}

/// gamma itself (complex with positive real part).
pub fn solve_gamma(h: f64, k: f64, nu: f64, s: Complex64) -> Result<Complex64> {
    let w = exp_neg_gamma_h(h, k, nu, s)?;
    Ok(-w.ln() / h)
}

/// q1(s) = (e^{-xi h} - e^{-gamma h})/s, with the s -> 0 limit evaluated in
/// closed form.
pub fn q1(case: &ModalCase) -> Result<Complex64> {
    case.validate()?;
    let (h, k, nu) = (case.h, case.k, case.nu);
    if case.s.norm() == 0.0 {
        let hk2 = h * h * k * k;
        let root = (4.0 * hk2 + hk2 * hk2).sqrt();
        let val = (h * h * hk2 + 2.0 * h * h) / (2.0 * nu * root) - h * h / (2.0 * nu);
        return Ok(Complex64::new(val, 0.0));
    }
    let exi = exp_neg_xi_h(h, k);
    let ega = exp_neg_gamma_h(h, k, nu, case.s)?;
    Ok((exi - ega) / case.s)
}

/// q(s) = (e^{-xi h} - 1) + nu k^2 q1(s); its s -> 0 limit is
/// -h^2 k^2 / sqrt(4 h^2 k^2 + h^4 k^4).
pub fn q(case: &ModalCase) -> Result<Complex64> {
    let exi = exp_neg_xi_h(case.h, case.k);
    Ok((exi - 1.0) + case.nu * case.k * case.k * q1(case)?)
}

/// Closed-form derivative q1'(s) = -(N1 - N2)/N3 for real s > 0.
pub fn q1_prime(h: f64, k: f64, nu: f64, s: f64) -> f64 {
    let (n1, n2, n3) = q1_prime_terms(h, k, nu, s);
    -(n1 - n2) / n3
}

/// The three terms N1, N2, N3 of the q1' closed form (also used to check the
/// identity N1^2 - N2^2 = 4 h^4 s^2).
pub fn q1_prime_terms(h: f64, k: f64, nu: f64, s: f64) -> (f64, f64, f64) {
    let h2 = h * h;
    let h4 = h2 * h2;
    let k2 = k * k;
    let z = s / nu + k2;
    let root_k = (4.0 * h2 * k2 + h4 * k2 * k2).sqrt();
    let root_z = (4.0 * h2 * z + h4 * z * z).sqrt();
    let n1 = 2.0 * h2 * s + 4.0 * h2 * k2 * nu + h4 * k2 * k2 * nu + h4 * k2 * s;
    let n2 = nu * root_k * root_z;
    let n3 = 2.0 * nu * s * s * root_z;
    (n1, n2, n3)
}

/// The three d2 roots of the characteristic cubic.
pub fn d2_roots(case: &ModalCase) -> Result<[Complex64; 3]> {
    case.validate()?;
    let (h, k, nu, alpha, s) = (case.h, case.k, case.nu, case.alpha, case.s);
    let h2 = h * h;
    let k2 = k * k;
    let denom = 2.0 * (nu - alpha * h2 / 4.0);
    if denom == 0.0 {
        return Err(Error::Domain(
            "degenerate quadratic: nu = alpha h^2 / 4".to_string(),
        ));
    }
    let d1 = h2 * (s + nu * k2) / nu;
    let b = h2 * (s + 2.0 * nu * k2 + alpha);
    let disc = (((alpha + s) * (alpha + s) + (s + alpha + nu * k2) * alpha * h2 * k2) * h2 * h2)
        .sqrt();
    Ok([d1, (b + disc) / denom, (b - disc) / denom])
}

/// Residual of the quadratic factor of the characteristic cubic at a given
/// d2 (zero for the second and third roots).
pub fn d2_quadratic_residual(case: &ModalCase, d2: Complex64) -> Complex64 {
    let h2 = case.h * case.h;
    let k2 = case.k * case.k;
    (case.nu - case.alpha * h2 / 4.0) * d2 * d2
        - h2 * (case.s + 2.0 * case.nu * k2 + case.alpha) * d2
        + h2 * h2 * k2 * (case.s + case.nu * k2 + case.alpha)
}

/// The root of lambda^2 - (2 + d2) lambda + 1 = 0 with magnitude below one.
pub fn lambda_inside(d2: Complex64) -> Result<Complex64> {
    let b = 2.0 + d2;
    let disc = (d2 * (d2 + 4.0)).sqrt();
    let r1 = (b - disc) / 2.0;
    let r2 = (b + disc) / 2.0;
    let lam = if r1.norm() <= r2.norm() { r1 } else { r2 };
    if (lam.norm() - 1.0).abs() < 1e-12 {
        return Err(Error::Domain(format!(
            "marginal root |lambda| = 1 at d2 = {d2}"
        )));
    }
    Ok(lam)
}

/// Non-erroring variant for determinant scans: simply the smaller-magnitude
/// root, marginal or not.
fn lambda_min_mag(d2: Complex64) -> Complex64 {
    let b = 2.0 + d2;
    let disc = (d2 * (d2 + 4.0)).sqrt();
    let r1 = (b - disc) / 2.0;
    let r2 = (b + disc) / 2.0;
    if r1.norm() <= r2.norm() {
        r1
    } else {
        r2
    }
}

fn build_z_from_lambdas(case: &ModalCase, lam: [Complex64; 3], d2: [Complex64; 3]) -> [[Complex64; 3]; 3] {
    let (h, k, nu, alpha, s) = (case.h, case.k, case.nu, case.alpha, case.s);
    let i = Complex64::i();
    let d1: Vec<Complex64> = lam.iter().map(|&l| (l - 1.0 / l) / 2.0).collect();
    let ik = i * k;
    let row3 = |n: usize| ((-(s + 2.0 * nu * k * k)) + nu * d2[n] / (h * h)) * (lam[n] - 1.0) / h;
    [
        [-d1[0] / h, ik, ik / alpha],
        [ik, d1[1] / h, d1[2] / (h * alpha)],
        [
            -nu * ik * d1[0] * (lam[0] - 1.0) / (h * h),
            row3(1),
            row3(2) / alpha,
        ],
    ]
}

/// The 3x3 boundary-condition matrix Z whose determinant condition encodes
/// Godunov-Ryabenkii stability.
pub fn build_z(case: &ModalCase) -> Result<[[Complex64; 3]; 3]> {
    if case.alpha == 0.0 {
        return Err(Error::invalid_argument(
            "Z matrix requires alpha != 0".to_string(),
        ));
    }
    let d2 = d2_roots(case)?;
    let lam = [
        lambda_inside(d2[0])?,
        lambda_inside(d2[1])?,
        lambda_inside(d2[2])?,
    ];
    Ok(build_z_from_lambdas(case, lam, d2))
}

pub fn det3(z: &[[Complex64; 3]; 3]) -> Complex64 {
    z[0][0] * (z[1][1] * z[2][2] - z[1][2] * z[2][1])
        - z[0][1] * (z[1][0] * z[2][2] - z[1][2] * z[2][0])
        + z[0][2] * (z[1][0] * z[2][1] - z[1][1] * z[2][0])
}

/// det(Z) evaluated leniently (marginal lambda roots allowed), for scans.
pub fn det_z_lenient(case: &ModalCase) -> Result<Complex64> {
    let d2 = d2_roots(case)?;
    let lam = [
        lambda_min_mag(d2[0]),
        lambda_min_mag(d2[1]),
        lambda_min_mag(d2[2]),
    ];
    Ok(det3(&build_z_from_lambdas(case, lam, d2)))
}

/// Closed-form h -> 0 limit of det(Z).
pub fn limit_detz(k: f64, nu: f64, alpha: f64, s: Complex64) -> Complex64 {
    let k2 = k * k;
    let a = ((nu * k2 + s) / nu).sqrt();
    let b = ((nu * k2 + alpha + s) / nu).sqrt();
    -(alpha + s) * (k.abs() * a - k2) * b / alpha
}

/// Leading-order boundary-layer coefficients sigma_1..3 for an O(h^r)
/// boundary truncation error of amplitude g0 (r = 1 for the Neumann
/// condition, r = 2 for the weighted-average condition).
pub fn leading_sigma(
    h: f64,
    k: f64,
    nu: f64,
    alpha: f64,
    s: Complex64,
    r: u32,
    g0: f64,
) -> [Complex64; 3] {
    let k2 = k * k;
    let a = ((nu * k2 + s) / nu).sqrt();
    let b = ((nu * k2 + alpha + s) / nu).sqrt();
    let hr = h.powi(r as i32) * g0;
    let i = Complex64::i();
    let denom = (alpha + s) * (k.abs() * a - k2) * b;
    [
        i * hr * k * (k.abs() - b) / denom,
        -hr / ((alpha + s) * b),
        alpha * hr * (a * b - k2) / denom,
    ]
}

/// Rectangular sampling grid over the complex Laplace variable.
#[derive(Debug, Clone, Copy)]
pub struct ScanGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            re_min: -20.0,
            re_max: 20.0,
            im_min: -30.0,
            im_max: 30.0,
            n_re: 400,
            n_im: 600,
        }
    }
}

impl ScanGrid {
    pub fn re(&self, i: usize) -> f64 {
        self.re_min + (self.re_max - self.re_min) * i as f64 / (self.n_re - 1) as f64
    }

    pub fn im(&self, j: usize) -> f64 {
        self.im_min + (self.im_max - self.im_min) * j as f64 / (self.n_im - 1) as f64
    }
}

/// Sampled det(Z) values with extracted zero contours.
#[derive(Debug, Clone)]
pub struct ComplexScan {
    pub grid: ScanGrid,
    /// Row-major values[j * n_re + i] = det(Z)(re(i) + i*im(j)).
    pub values: Vec<Complex64>,
    /// Zero-level segments of Re(det Z), each a two-point polyline.
    pub re_contours: Vec<[[f64; 2]; 2]>,
    /// Zero-level segments of Im(det Z).
    pub im_contours: Vec<[[f64; 2]; 2]>,
    /// Centers of cells where both real and imaginary parts change sign.
    pub intersections: Vec<[f64; 2]>,
}

/// Samples det(Z) over the grid and extracts zero contours by marching
/// squares with linear interpolation. Cells where both the real and
/// imaginary parts change sign are reported as intersection candidates
/// (conservative: may over-report, never under-reports on the grid).
pub fn detz_scan(h: f64, k: f64, nu: f64, alpha: f64, grid: ScanGrid) -> Result<ComplexScan> {
    if grid.n_re < 2 || grid.n_im < 2 {
        return Err(Error::invalid_argument(
            "scan grid needs at least 2 points per axis".to_string(),
        ));
    }
    let mut values = Vec::with_capacity(grid.n_re * grid.n_im);
    for j in 0..grid.n_im {
        for i in 0..grid.n_re {
            let s = Complex64::new(grid.re(i), grid.im(j));
            let case = ModalCase { h, k, nu, alpha, s };
            values.push(det_z_lenient(&case)?);
        }
    }
    let re_contours = marching_squares(&grid, &values, |v| v.re);
    let im_contours = marching_squares(&grid, &values, |v| v.im);
    let mut intersections = Vec::new();
    for j in 0..grid.n_im - 1 {
        for i in 0..grid.n_re - 1 {
            let c = [
                values[j * grid.n_re + i],
                values[j * grid.n_re + i + 1],
                values[(j + 1) * grid.n_re + i + 1],
                values[(j + 1) * grid.n_re + i],
            ];
            let re_change = sign_change(c.iter().map(|v| v.re));
            let im_change = sign_change(c.iter().map(|v| v.im));
            if re_change && im_change {
                intersections.push([
                    0.5 * (grid.re(i) + grid.re(i + 1)),
                    0.5 * (grid.im(j) + grid.im(j + 1)),
                ]);
            }
        }
    }
    Ok(ComplexScan {
        grid,
        values,
        re_contours,
        im_contours,
        intersections,
    })
}

fn sign_change(vals: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = vals.collect();
    let has_pos = v.iter().any(|&x| x > 0.0);
    let has_neg = v.iter().any(|&x| x < 0.0);
    has_pos && has_neg
}

/// Marching squares on one scalar component. Emits one or two line segments
/// per cell with edge crossings located by linear interpolation.
fn marching_squares(
    grid: &ScanGrid,
    values: &[Complex64],
    comp: impl Fn(&Complex64) -> f64,
) -> Vec<[[f64; 2]; 2]> {
    let mut out = Vec::new();
    for j in 0..grid.n_im - 1 {
        for i in 0..grid.n_re - 1 {
            // Corner order: (i,j), (i+1,j), (i+1,j+1), (i,j+1).
            let f = [
                comp(&values[j * grid.n_re + i]),
                comp(&values[j * grid.n_re + i + 1]),
                comp(&values[(j + 1) * grid.n_re + i + 1]),
                comp(&values[(j + 1) * grid.n_re + i]),
            ];
            let p = [
                [grid.re(i), grid.im(j)],
                [grid.re(i + 1), grid.im(j)],
                [grid.re(i + 1), grid.im(j + 1)],
                [grid.re(i), grid.im(j + 1)],
            ];
            let mut crossings: Vec<[f64; 2]> = Vec::new();
            for e in 0..4 {
                let (a, b) = (e, (e + 1) % 4);
                if (f[a] < 0.0) != (f[b] < 0.0) {
                    let t = f[a] / (f[a] - f[b]);
                    crossings.push([
                        p[a][0] + t * (p[b][0] - p[a][0]),
                        p[a][1] + t * (p[b][1] - p[a][1]),
                    ]);
                }
            }
            match crossings.len() {
                2 => out.push([crossings[0], crossings[1]]),
                4 => {
                    // Ambiguous saddle: resolve by the cell-center average.
                    let center = (f[0] + f[1] + f[2] + f[3]) / 4.0;
                    if (center < 0.0) == (f[0] < 0.0) {
                        out.push([crossings[0], crossings[3]]);
                        out.push([crossings[1], crossings[2]]);
                    } else {
                        out.push([crossings[0], crossings[1]]);
                        out.push([crossings[2], crossings[3]]);
                    }
                }
                _ => {}
            }
        }
    }
    out
}

impl ComplexScan {
    /// Conjugate-symmetry-friendly count of intersection candidates with
    /// Re(s) > 0.
    pub fn right_half_intersections(&self) -> usize {
        self.intersections.iter().filter(|p| p[0] > 0.0).count()
    }

    /// Writes the sampled values as CSV: re_s, im_s, re_det, im_det.
    pub fn write_values_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut emit = || -> std::io::Result<()> {
            writeln!(w, "re_s,im_s,re_det,im_det")?;
            for j in 0..self.grid.n_im {
                for i in 0..self.grid.n_re {
                    let v = self.values[j * self.grid.n_re + i];
                    writeln!(w, "{},{},{},{}", self.grid.re(i), self.grid.im(j), v.re, v.im)?;
                }
            }
            Ok(())
        };
        emit().map_err(|e| Error::io(path, e))
    }

    /// Writes both contour families as CSV segments: curve_id, part, re_s, im_s.
    pub fn write_contours_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut emit = || -> std::io::Result<()> {
            writeln!(w, "curve_id,part,re_s,im_s")?;
            for (id, seg) in self.re_contours.iter().enumerate() {
                for p in seg {
                    writeln!(w, "{id},re,{},{}", p[0], p[1])?;
                }
            }
            let base = self.re_contours.len();
            for (id, seg) in self.im_contours.iter().enumerate() {
                for p in seg {
                    writeln!(w, "{},im,{},{}", base + id, p[0], p[1])?;
                }
            }
            Ok(())
        };
        emit().map_err(|e| Error::io(path, e))
    }
}

/// Report of the q-function lemma checks.
#[derive(Debug, Clone, Default)]
pub struct QLemmaReport {
    pub samples: usize,
    pub violations: Vec<String>,
    /// Largest q(s) observed over real s > 0 (should stay below q(0) < 0).
    pub max_q: f64,
}

impl QLemmaReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Numerically confirms, for each wavenumber and sampled real s > 0, that
/// q1'(s) < 0 (closed form), q(s) < q(0) < 0, and the identity
/// N1^2 - N2^2 = 4 h^4 s^2.
pub fn verify_q_lemmas(h: f64, nu: f64, ks: &[f64], s_samples: &[f64]) -> Result<QLemmaReport> {
    let mut report = QLemmaReport {
        max_q: f64::NEG_INFINITY,
        ..Default::default()
    };
    for &k in ks {
        let q0 = q(&ModalCase {
            h,
            k,
            nu,
            alpha: 0.0,
            s: Complex64::new(0.0, 0.0),
        })?
        .re;
        if q0 >= 0.0 {
            report.violations.push(format!("q(0) = {q0} >= 0 at k = {k}"));
        }
        for &s in s_samples {
            if s <= 0.0 {
                continue;
            }
            report.samples += 1;
            let case = ModalCase {
                h,
                k,
                nu,
                alpha: 0.0,
                s: Complex64::new(s, 0.0),
            };
            let qs = q(&case)?.re;
            report.max_q = report.max_q.max(qs);
            if qs >= q0 {
                report
                    .violations
                    .push(format!("q({s}) = {qs} >= q(0) = {q0} at k = {k}"));
            }
            let qp = q1_prime(h, k, nu, s);
            if qp >= 0.0 {
                report
                    .violations
                    .push(format!("q1'({s}) = {qp} >= 0 at k = {k}"));
            }
            let (n1, n2, _) = q1_prime_terms(h, k, nu, s);
            let lhs = n1 * n1 - n2 * n2;
            let rhs = 4.0 * h.powi(4) * s * s;
            // The difference cancels catastrophically when s is small, so
            // scale the tolerance by the magnitude of the squared terms.
            if (lhs - rhs).abs() > 1e-9 * rhs.max(n1 * n1) {
                report
                    .violations
                    .push(format!("N identity off by {} at k={k}, s={s}", lhs - rhs));
            }
        }
    }
    Ok(report)
}
