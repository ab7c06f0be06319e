//! Zero fill-in incomplete LU factorization.

use super::CsrMatrix;
use crate::{Error, Result};

/// ILU(0) preconditioner: an approximate LU factorization sharing the
/// sparsity pattern of the input matrix. L is unit lower triangular; the two
/// factors are stored together in one CSR copy.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    /// Position of the diagonal entry within each row of `lu`.
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::InvalidSystem(
                "incomplete LU requires a square matrix".into(),
            ));
        }
        let mut lu = a.clone();
        let mut diag_pos = vec![usize::MAX; n];
        for r in 0..n {
            let (s, e) = (lu.row_ptr()[r], lu.row_ptr()[r + 1]);
            match lu.col_idx()[s..e].binary_search(&r) {
                Ok(k) => diag_pos[r] = s + k,
                Err(_) => {
                    return Err(Error::InvalidSystem(format!(
                        "missing structural diagonal in row {r}"
                    )))
                }
            }
        }

        // IKJ-ordered factorization restricted to the existing pattern.
        let row_ptr = lu.row_ptr().to_vec();
        let col_idx = lu.col_idx().to_vec();
        for i in 0..n {
            let (rs, re) = (row_ptr[i], row_ptr[i + 1]);
            for kk in rs..re {
                let k = col_idx[kk];
                if k >= i {
                    break;
                }
                let pivot = lu.values()[diag_pos[k]];
                if pivot == 0.0 {
                    return Err(Error::Breakdown(format!(
                        "incomplete LU: zero pivot at row {k}"
                    )));
                }
                let factor = lu.values()[kk] / pivot;
                lu.values_mut()[kk] = factor;
                // Subtract factor * row k from row i on the shared pattern.
                let (ks, ke) = (row_ptr[k], row_ptr[k + 1]);
                let mut j = kk + 1;
                for kj in ks..ke {
                    let c = col_idx[kj];
                    if c <= k {
                        continue;
                    }
                    while j < re && col_idx[j] < c {
                        j += 1;
                    }
                    if j < re && col_idx[j] == c {
                        let upd = factor * lu.values()[kj];
                        lu.values_mut()[j] -= upd;
                    }
                }
            }
            if lu.values()[diag_pos[i]] == 0.0 {
                return Err(Error::Breakdown(format!(
                    "incomplete LU: zero pivot at row {i}"
                )));
            }
        }
        Ok(Ilu0 { lu, diag_pos })
    }

    /// Applies the preconditioner: out = U^{-1} L^{-1} v.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.lu.nrows();
        debug_assert_eq!(v.len(), n);
        // Forward solve L y = v (unit diagonal).
        for i in 0..n {
            let mut s = v[i];
            let (rs, _) = (self.lu.row_ptr()[i], self.lu.row_ptr()[i + 1]);
            for k in rs..self.diag_pos[i] {
                s -= self.lu.values()[k] * out[self.lu.col_idx()[k]];
            }
            out[i] = s;
        }
        // Backward solve U x = y.
        for i in (0..n).rev() {
            let re = self.lu.row_ptr()[i + 1];
            let mut s = out[i];
            for k in self.diag_pos[i] + 1..re {
                s -= self.lu.values()[k] * out[self.lu.col_idx()[k]];
            }
            out[i] = s / self.lu.values()[self.diag_pos[i]];
        }
    }
}
