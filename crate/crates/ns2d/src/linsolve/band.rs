//! Banded LU factorization with partial pivoting, for the constant
//! operators that are factored once and solved every time step.

use super::csr::CsrMatrix;
use crate::{Error, Result};

/// LU factors of a band matrix with `kl` sub- and `ku` superdiagonals.
/// Pivoting can fill the upper band out to `kl + ku` superdiagonals, so the
/// working storage holds `2*kl + ku + 1` diagonals per column.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column-major band storage: entry (row, col) lives at
    /// `ab[col * ld + (kl + ku + row - col)]` with `ld = 2*kl + ku + 1`.
    ab: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    /// Factors a sparse matrix, deriving the bandwidths from its pattern.
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::InvalidSystem(
                "band factorization needs a square, non-empty matrix".to_string(),
            ));
        }
        let mut kl = 0usize;
        let mut ku = 0usize;
        for r in 0..n {
            let (cols, _) = a.row(r);
            for &c in cols {
                if r > c {
                    kl = kl.max(r - c);
                } else {
                    ku = ku.max(c - r);
                }
            }
        }
        let ld = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ld * n];
        for r in 0..n {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                ab[c * ld + (kl + ku + r - c)] = v;
            }
        }
        let mut lu = BandedLu {
            n,
            kl,
            ku,
            ab,
            piv: vec![0; n],
        };
        lu.factor()?;
        Ok(lu)
    }

    /// Total (lower, upper) bandwidths of the stored factors.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.kl + self.ku)
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        c * (2 * self.kl + self.ku + 1) + (self.kl + self.ku + r - c)
    }

    fn factor(&mut self) -> Result<()> {
        let n = self.n;
        let kl = self.kl;
        let kuw = self.kl + self.ku; // working upper bandwidth
        for j in 0..n {
            // Pivot search in column j, rows j..=j+kl.
            let rmax = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.ab[self.idx(j, j)].abs();
            for r in j + 1..=rmax {
                let v = self.ab[self.idx(r, j)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return Err(Error::Breakdown(format!(
                    "zero pivot in band factorization at column {j}"
                )));
            }
            self.piv[j] = p;
            if p != j {
                // Swap rows j and p across the active columns.
                let cmax = (j + kuw).min(n - 1);
                for c in j..=cmax {
                    if p > c + kl {
                        continue;
                    }
                    let ij = self.idx(j, c);
                    let ip = self.idx(p, c);
                    self.ab.swap(ij, ip);
                }
            }
            let pivot = self.ab[self.idx(j, j)];
            for r in j + 1..=rmax {
                let ir = self.idx(r, j);
                let m = self.ab[ir] / pivot;
                self.ab[ir] = m;
                if m != 0.0 {
                    let cmax = (j + kuw).min(n - 1);
                    for c in j + 1..=cmax {
                        let v = self.ab[self.idx(j, c)];
                        if v != 0.0 {
                            let irc = self.idx(r, c);
                            self.ab[irc] -= m * v;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Solves A x = b in place.
    pub fn solve(&self, x: &mut [f64]) {
        let n = self.n;
        let kl = self.kl;
        let kuw = self.kl + self.ku;
        // Forward: apply pivots and unit-lower factor; the L column below the
        // diagonal is contiguous in storage.
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            if xj != 0.0 {
                let rmax = (j + kl).min(n - 1);
                let base = self.idx(j + 1, j);
                let col = &self.ab[base..base + (rmax - j)];
                for (k, &m) in col.iter().enumerate() {
                    x[j + 1 + k] -= m * xj;
                }
            }
        }
        // Backward: upper factor, column-oriented so each inner loop walks
        // one contiguous stored column.
        for j in (0..n).rev() {
            let xj = x[j] / self.ab[self.idx(j, j)];
            x[j] = xj;
            if xj != 0.0 {
                let rmin = j.saturating_sub(kuw);
                let base = self.idx(rmin, j);
                let col = &self.ab[base..base + (j - rmin)];
                for (k, &m) in col.iter().enumerate() {
                    x[rmin + k] -= m * xj;
                }
            }
        }
    }

    /// Solves two right-hand sides in one pass over the factors; streaming
    /// the band storage once instead of twice matters when it outgrows cache.
    pub fn solve2(&self, x: &mut [f64], y: &mut [f64]) {
        let n = self.n;
        let kl = self.kl;
        let kuw = self.kl + self.ku;
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                x.swap(j, p);
                y.swap(j, p);
            }
            let xj = x[j];
            let yj = y[j];
            let rmax = (j + kl).min(n - 1);
            let base = self.idx(j + 1, j);
            let col = &self.ab[base..base + (rmax - j)];
            for (k, &m) in col.iter().enumerate() {
                x[j + 1 + k] -= m * xj;
                y[j + 1 + k] -= m * yj;
            }
        }
        for j in (0..n).rev() {
            let d = self.ab[self.idx(j, j)];
            let xj = x[j] / d;
            let yj = y[j] / d;
            x[j] = xj;
            y[j] = yj;
            let rmin = j.saturating_sub(kuw);
            let base = self.idx(rmin, j);
            let col = &self.ab[base..base + (j - rmin)];
            for (k, &m) in col.iter().enumerate() {
                x[rmin + k] -= m * xj;
                y[rmin + k] -= m * yj;
            }
        }
    }
}

/// Reverse Cuthill-McKee ordering of an undirected graph given as sorted
/// adjacency lists. Returns `perm` with `perm[old] = new`.
pub fn rcm_order(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    loop {
        // Start a new component from an unvisited vertex of minimum degree.
        let start = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (adj[v].len(), v));
        let Some(start) = start else { break };
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (adj[w].len(), w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    let mut perm = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        perm[old] = new;
    }
    perm
}
