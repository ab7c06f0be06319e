//! Restarted GMRES with right preconditioning.

use super::{dot, norm2, CsrMatrix, Ilu0, SolveStats};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    /// Krylov subspace dimension between restarts.
    pub restart: usize,
    /// Relative residual tolerance (against the right-hand side norm).
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            restart: 50,
            tol: 1e-12,
            max_iters: 10_000,
        }
    }
}

/// Solves A x = b with ILU(0)-preconditioned restarted GMRES. `x` holds the
/// initial guess on entry.
pub fn gmres(
    a: &CsrMatrix,
    ilu: &Ilu0,
    b: &[f64],
    x: &mut [f64],
    opts: &GmresOptions,
) -> Result<SolveStats> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n || x.len() != n {
        return Err(Error::InvalidSystem(
            "matrix and vector sizes disagree".into(),
        ));
    }
    gmres_operator(
        n,
        |v, out| a.mul_vec(v, out),
        |v, out| ilu.apply(v, out),
        b,
        x,
        opts,
    )
}

/// Matrix-free restarted GMRES with right preconditioning: solves
/// A M^{-1} u = b, x = M^{-1} u.
pub fn gmres_operator(
    n: usize,
    mut apply_a: impl FnMut(&[f64], &mut [f64]),
    mut apply_m: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    opts: &GmresOptions,
) -> Result<SolveStats> {
    let m = opts.restart.max(1);
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut total_iters = 0usize;

    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];

    loop {
        apply_a(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = norm2(&r);
        if beta <= opts.tol * bnorm {
            return Ok(SolveStats {
                iterations: total_iters,
                residual: beta / bnorm,
            });
        }
        if total_iters >= opts.max_iters {
            return Err(Error::IterationLimit {
                iters: total_iters,
                residual: beta / bnorm,
            });
        }

        // Arnoldi basis and Hessenberg factor kept in Givens-rotated form.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![0.0; (m + 1) * m]; // column-major (m+1) x m
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;

        for k in 0..m {
            apply_m(&basis[k], &mut z);
            apply_a(&z, &mut w);
            // Modified Gram-Schmidt.
            for j in 0..=k {
                let hjk = dot(&w, &basis[j]);
                h[k * (m + 1) + j] = hjk;
                for i in 0..n {
                    w[i] -= hjk * basis[j][i];
                }
            }
            let hk1 = norm2(&w);
            h[k * (m + 1) + k + 1] = hk1;

            // Apply previous Givens rotations to the new column.
            for j in 0..k {
                let t = h[k * (m + 1) + j];
                let t1 = h[k * (m + 1) + j + 1];
                h[k * (m + 1) + j] = cs[j] * t + sn[j] * t1;
                h[k * (m + 1) + j + 1] = -sn[j] * t + cs[j] * t1;
            }
            let t = h[k * (m + 1) + k];
            let denom = (t * t + hk1 * hk1).sqrt();
            if denom == 0.0 {
                return Err(Error::Breakdown("gmres: zero Hessenberg column".into()));
            }
            cs[k] = t / denom;
            sn[k] = hk1 / denom;
            h[k * (m + 1) + k] = denom;
            h[k * (m + 1) + k + 1] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];

            total_iters += 1;
            k_used = k + 1;
            let res = g[k + 1].abs();
            if res <= opts.tol * bnorm || hk1 == 0.0 || total_iters >= opts.max_iters {
                break;
            }
            basis.push(w.iter().map(|v| v / hk1).collect());
        }

        // Back-substitute for the Krylov coefficients.
        let mut y = vec![0.0; k_used];
        for j in (0..k_used).rev() {
            let mut s = g[j];
            for l in j + 1..k_used {
                s -= h[l * (m + 1) + j] * y[l];
            }
            y[j] = s / h[j * (m + 1) + j];
        }
        // x += M^{-1} (V y)
        for i in 0..n {
            r[i] = 0.0;
        }
        for (j, &yj) in y.iter().enumerate() {
            for i in 0..n {
                r[i] += yj * basis[j][i];
            }
        }
        apply_m(&r, &mut z);
        for i in 0..n {
            x[i] += z[i];
        }
    }
}
