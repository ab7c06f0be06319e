//! Sparse matrices, iterative Krylov solvers, and a band direct solver.
//!
//! Systems assembled here are modest (up to a few times 10^4 unknowns).
//! Jacobi-preconditioned CG covers SPD systems and restarted GMRES with an
//! ILU(0) preconditioner everything else; the constant operators that are
//! solved once per time step are factored up front with a banded LU over an
//! RCM-ordered dof numbering.

mod band;
mod csr;
mod gmres;
mod ilu;

pub use band::{rcm_order, BandedLu};
pub use csr::{CooMatrix, CsrMatrix};
pub use gmres::{gmres, GmresOptions};
pub use ilu::Ilu0;

use crate::{Error, Result};

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients for SPD systems. `x` holds the
/// initial guess on entry and the solution on exit.
pub fn cg(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> Result<SolveStats> {
    let n = b.len();
    if a.nrows() != n || x.len() != n {
        return Err(Error::InvalidSystem(
            "matrix and vector sizes disagree".into(),
        ));
    }
    let diag = a.diagonal();
    if diag.iter().any(|&d| d == 0.0) {
        return Err(Error::InvalidSystem("zero diagonal entry".into()));
    }
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);

    let mut r = vec![0.0; n];
    a.mul_vec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for it in 0..max_iters {
        let rnorm = norm2(&r);
        if rnorm <= tol * bnorm {
            return Ok(SolveStats {
                iterations: it,
                residual: rnorm / bnorm,
            });
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Breakdown(format!(
                "conjugate gradients: non-positive curvature {pap:e}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rnorm = norm2(&r) / bnorm;
    if rnorm <= tol {
        Ok(SolveStats {
            iterations: max_iters,
            residual: rnorm,
        })
    } else {
        Err(Error::IterationLimit {
            iters: max_iters,
            residual: rnorm,
        })
    }
}

/// A square system bordered by one extra row and column:
///
/// ```text
/// [ A   c ] [x]   [b]
/// [ r^T 0 ] [y] = [g]
/// ```
///
/// used for pure-Neumann pressure systems with a mean-zero constraint.
#[derive(Debug, Clone)]
pub struct BorderedSystem {
    pub a: CsrMatrix,
    pub col: Vec<f64>,
    pub row: Vec<f64>,
}

impl BorderedSystem {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Applies the full (n+1)x(n+1) operator.
    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n();
        self.a.mul_vec(&v[..n], &mut out[..n]);
        for i in 0..n {
            out[i] += self.col[i] * v[n];
        }
        out[n] = dot(&self.row, &v[..n]);
    }
}

/// Solves a bordered system with GMRES, preconditioning the leading block
/// with ILU(0) and passing the border through unchanged. `x` has length n+1
/// (solution and multiplier) and holds the initial guess on entry.
pub fn solve_bordered(
    sys: &BorderedSystem,
    ilu: &Ilu0,
    b: &[f64],
    x: &mut [f64],
    opts: &GmresOptions,
) -> Result<SolveStats> {
    let n = sys.n();
    if b.len() != n + 1 || x.len() != n + 1 {
        return Err(Error::InvalidSystem(
            "bordered system right-hand side must have length n + 1".into(),
        ));
    }
    gmres::gmres_operator(
        n + 1,
        |v, out| sys.mul_vec(v, out),
        |v, out| {
            ilu.apply(&v[..n], &mut out[..n]);
            out[n] = v[n];
        },
        b,
        x,
        opts,
    )
}
