//! Sparse storage, Krylov solvers, the band direct solver and dof reordering.

use proptest::prelude::*;

use ns2d::assembly::{assemble_mass, assemble_stiffness, mass_row_sums};
use ns2d::elements::build_dof_map;
use ns2d::linsolve::{
    cg, dot, gmres, norm2, rcm_order, BandedLu, BorderedSystem, CooMatrix, GmresOptions, Ilu0,
};
use ns2d::mesh::gen_unit_square;
use ns2d::Error;

fn csr_from_dense(rows: usize, cols: usize, dense: &[f64]) -> ns2d::linsolve::CsrMatrix {
    let mut coo = CooMatrix::new(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            coo.push(r, c, dense[r * cols + c]);
        }
    }
    coo.to_csr()
}

/// Small deterministic pseudo-random stream for matrix fill-in.
struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[test]
fn coo_sums_duplicates() {
    let mut coo = CooMatrix::new(2, 2);
    coo.push(0, 0, 1.0);
    coo.push(0, 0, 2.5);
    coo.push(1, 0, -1.0);
    coo.push(0, 1, 0.0); // dropped
    let csr = coo.to_csr();
    assert_eq!(csr.nnz(), 2);
    assert_eq!(csr.get(0, 0), 3.5);
    assert_eq!(csr.get(1, 0), -1.0);
    assert_eq!(csr.get(0, 1), 0.0);
}

#[test]
fn csr_mul_and_dense_round_trip() {
    let dense = [1.0, 2.0, 0.0, -1.0, 0.0, 3.0];
    let a = csr_from_dense(2, 3, &dense);
    assert_eq!(a.dense(), dense);
    let mut out = [0.0; 2];
    a.mul_vec(&[1.0, 1.0, 1.0], &mut out);
    assert_eq!(out, [3.0, 2.0]);
    assert_eq!(a.diagonal(), vec![1.0, 0.0]);
}

#[test]
fn cg_solves_identity_and_reports_residual() {
    let a = csr_from_dense(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let b = [3.0, -1.0, 2.0];
    let mut x = [0.0; 3];
    let stats = cg(&a, &b, &mut x, 1e-12, 100).unwrap();
    assert_eq!(x, b);
    assert!(stats.residual < 1e-12);
    assert!(stats.iterations <= 2);
}

#[test]
fn cg_matches_dense_oracle() {
    // SPD system A = B^T B + I built from a deterministic dense B.
    let n = 12;
    let mut rng = Lcg(7);
    let b: Vec<f64> = (0..n * n).map(|_| rng.next_f64() - 0.5).collect();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in 0..n {
                s += b[k * n + i] * b[k * n + j];
            }
            a[i * n + j] = s;
        }
    }
    let rhs: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
    let oracle = {
        let am = nalgebra::DMatrix::from_row_slice(n, n, &a);
        let bv = nalgebra::DVector::from_column_slice(&rhs);
        am.lu().solve(&bv).unwrap()
    };
    let csr = csr_from_dense(n, n, &a);
    let mut x = vec![0.0; n];
    cg(&csr, &rhs, &mut x, 1e-14, 1000).unwrap();
    for i in 0..n {
        assert!((x[i] - oracle[i]).abs() < 1e-10);
    }
}

#[test]
fn cg_solves_a_mass_system() {
    let mesh = gen_unit_square(8).unwrap();
    let space = build_dof_map(&mesh, 1, 1).unwrap();
    let mass = assemble_mass(&space).unwrap();
    // M x = M 1 has the solution x = 1.
    let b = mass_row_sums(&mass);
    let mut x = vec![0.0; space.ndofs()];
    let stats = cg(&mass, &b, &mut x, 1e-12, 1000).unwrap();
    assert!(stats.residual < 1e-12);
    for &v in &x {
        assert!((v - 1.0).abs() < 1e-9);
    }
}

#[test]
fn cg_rejects_zero_diagonal_and_size_mismatch() {
    let a = csr_from_dense(2, 2, &[1.0, 1.0, 1.0, 0.0]);
    let mut x = [0.0; 2];
    assert!(matches!(
        cg(&a, &[1.0, 1.0], &mut x, 1e-10, 10),
        Err(Error::InvalidSystem(_))
    ));
    let id = csr_from_dense(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let mut x3 = [0.0; 3];
    assert!(cg(&id, &[1.0, 1.0, 1.0], &mut x3, 1e-10, 10).is_err());
}

#[test]
fn cg_reports_iteration_limit() {
    let mesh = gen_unit_square(8).unwrap();
    let space = build_dof_map(&mesh, 1, 1).unwrap();
    let k = assemble_stiffness(&space).unwrap();
    let mass = assemble_mass(&space).unwrap();
    // K + M is well conditioned but not solvable in two CG steps for a
    // rough right-hand side.
    let n = space.ndofs();
    let mut coo = CooMatrix::new(n, n);
    for r in 0..n {
        let (cols, vals) = k.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            coo.push(r, c, v);
        }
        let (cols, vals) = mass.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            coo.push(r, c, v);
        }
    }
    let a = coo.to_csr();
    let b: Vec<f64> = (0..space.ndofs()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
    let mut x = vec![0.0; space.ndofs()];
    match cg(&a, &b, &mut x, 1e-14, 2) {
        Err(Error::IterationLimit { iters, residual }) => {
            assert_eq!(iters, 2);
            assert!(residual > 1e-14);
        }
        other => panic!("expected iteration limit, got {other:?}"),
    }
}

#[test]
fn gmres_solves_upper_triangular_system() {
    let a = csr_from_dense(2, 2, &[2.0, 1.0, 0.0, 3.0]);
    let ilu = Ilu0::new(&a).unwrap();
    let mut x = [0.0; 2];
    let stats = gmres(&a, &ilu, &[3.0, 3.0], &mut x, &GmresOptions::default()).unwrap();
    assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    assert!(stats.residual < 1e-12);
}

#[test]
fn gmres_solves_a_nonsymmetric_system() {
    let n = 10;
    let mut rng = Lcg(42);
    // Strictly diagonally dominant, hence nonsingular.
    let mut dense = vec![0.0; n * n];
    for i in 0..n {
        let mut off = 0.0;
        for j in 0..n {
            if i != j {
                let v = rng.next_f64() - 0.5;
                dense[i * n + j] = v;
                off += v.abs();
            }
        }
        dense[i * n + i] = off + 1.0;
    }
    let rhs: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let a = csr_from_dense(n, n, &dense);
    let ilu = Ilu0::new(&a).unwrap();
    let mut x = vec![0.0; n];
    gmres(&a, &ilu, &rhs, &mut x, &GmresOptions::default()).unwrap();
    let mut r = vec![0.0; n];
    a.mul_vec(&x, &mut r);
    for i in 0..n {
        assert!((r[i] - rhs[i]).abs() < 1e-10);
    }
}

#[test]
fn bordered_system_solves_a_neumann_problem() {
    // (grad p, grad q) = (f, q) with f = 8 pi^2 cos(2 pi x) cos(2 pi y) has
    // the zero-mean solution p = cos(2 pi x) cos(2 pi y).
    use std::f64::consts::PI;
    let mesh = gen_unit_square(16).unwrap();
    let space = build_dof_map(&mesh, 1, 1).unwrap();
    let n = space.ndofs();
    let k = assemble_stiffness(&space).unwrap();
    let mass = assemble_mass(&space).unwrap();
    let c = mass_row_sums(&mass);
    let f = space.interpolate_scalar(|x, y| {
        8.0 * PI * PI * (2.0 * PI * x).cos() * (2.0 * PI * y).cos()
    });
    let mut b = vec![0.0; n + 1];
    mass.mul_vec(&f, &mut b[..n]);

    let sys = BorderedSystem {
        a: k.clone(),
        col: c.clone(),
        row: c.clone(),
    };
    let ilu = Ilu0::new(&k).unwrap();
    let mut x = vec![0.0; n + 1];
    let stats = ns2d::linsolve::solve_bordered(&sys, &ilu, &b, &mut x, &GmresOptions::default())
        .unwrap();
    assert!(stats.residual < 1e-10);
    // Zero weighted mean and small multiplier.
    assert!(dot(&c, &x[..n]).abs() < 1e-8);
    assert!(x[n].abs() < 1e-8);
    let exact = space.interpolate_scalar(|x, y| (2.0 * PI * x).cos() * (2.0 * PI * y).cos());
    let err = x[..n]
        .iter()
        .zip(&exact)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    // P1 discretization error at h = 1/16 (measured 0.097).
    assert!(err < 0.12, "max nodal error {err}");
}

#[test]
fn bordered_zero_rhs_gives_zero() {
    let mesh = gen_unit_square(4).unwrap();
    let space = build_dof_map(&mesh, 1, 1).unwrap();
    let n = space.ndofs();
    let k = assemble_stiffness(&space).unwrap();
    let c = mass_row_sums(&assemble_mass(&space).unwrap());
    let sys = BorderedSystem { a: k.clone(), col: c.clone(), row: c };
    let ilu = Ilu0::new(&k).unwrap();
    let mut x = vec![0.0; n + 1];
    ns2d::linsolve::solve_bordered(&sys, &ilu, &vec![0.0; n + 1], &mut x, &GmresOptions::default())
        .unwrap();
    assert!(norm2(&x) < 1e-12);
}

#[test]
fn banded_lu_matches_dense_oracle() {
    let n = 40;
    let (kl, ku) = (3usize, 2usize);
    let mut rng = Lcg(3);
    let mut dense = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            if c + kl >= r && r + ku >= c {
                dense[r * n + c] = rng.next_f64() - 0.5;
            }
        }
        dense[r * n + r] += 2.0;
    }
    let a = csr_from_dense(n, n, &dense);
    let lu = BandedLu::new(&a).unwrap();
    assert_eq!(lu.bandwidths(), (kl, kl + ku));

    let am = nalgebra::DMatrix::from_row_slice(n, n, &dense);
    let dense_lu = am.lu();
    for seed in 0..3u64 {
        let mut rng = Lcg(100 + seed);
        let b: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
        let oracle = dense_lu
            .solve(&nalgebra::DVector::from_column_slice(&b))
            .unwrap();
        let mut x = b.clone();
        lu.solve(&mut x);
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() < 1e-11, "entry {i}");
        }
    }
}

#[test]
fn banded_lu_pivots_on_zero_diagonal() {
    // Requires a row swap at the first column.
    let a = csr_from_dense(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 2.0, 1.0]);
    let lu = BandedLu::new(&a).unwrap();
    // b = A (1, 2, 3)
    let mut x = [2.0, 4.0, 7.0];
    lu.solve(&mut x);
    assert!((x[0] - 1.0).abs() < 1e-13);
    assert!((x[1] - 2.0).abs() < 1e-13);
    assert!((x[2] - 3.0).abs() < 1e-13);
}

#[test]
fn banded_lu_rejects_singular_and_empty_systems() {
    let a = csr_from_dense(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    assert!(matches!(BandedLu::new(&a), Err(Error::Breakdown(_))));
    let empty = CooMatrix::new(0, 0).to_csr();
    assert!(matches!(BandedLu::new(&empty), Err(Error::InvalidSystem(_))));
}

#[test]
fn solve2_matches_two_single_solves() {
    let mesh = gen_unit_square(6).unwrap();
    let space = build_dof_map(&mesh, 1, 1).unwrap();
    let mass = assemble_mass(&space).unwrap();
    let lu = BandedLu::new(&mass).unwrap();
    let n = space.ndofs();
    let mut rng = Lcg(11);
    let b1: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
    let b2: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
    let mut s1 = b1.clone();
    let mut s2 = b2.clone();
    lu.solve(&mut s1);
    lu.solve(&mut s2);
    let mut p1 = b1;
    let mut p2 = b2;
    lu.solve2(&mut p1, &mut p2);
    assert_eq!(s1, p1);
    assert_eq!(s2, p2);
}

#[test]
fn rcm_is_a_permutation_that_shrinks_bandwidth() {
    // Path graph numbered badly: natural order 0..n shuffled.
    let n = 50;
    let label = |i: usize| (i * 17) % n; // gcd(17, 50) = 1, a bijection
    let mut adj = vec![Vec::new(); n];
    for i in 0..n - 1 {
        let (a, b) = (label(i), label(i + 1));
        adj[a].push(b);
        adj[b].push(a);
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
    }
    let perm = rcm_order(&adj);
    let mut seen = vec![false; n];
    for &p in &perm {
        assert!(!seen[p], "duplicate image {p}");
        seen[p] = true;
    }
    let bw = |order: &dyn Fn(usize) -> usize| -> usize {
        let mut m = 0;
        for a in 0..n {
            for &b in &adj[a] {
                m = m.max(order(a).abs_diff(order(b)));
            }
        }
        m
    };
    let before = bw(&|v| v);
    let after = bw(&|v| perm[v]);
    assert_eq!(after, 1, "a path graph relabels to bandwidth 1");
    assert!(before > after);
}

#[test]
fn rcm_handles_disconnected_graphs() {
    let adj = vec![vec![1], vec![0], vec![], vec![4], vec![3]];
    let perm = rcm_order(&adj);
    let mut sorted = perm.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
}

#[test]
fn dot_and_norm_helpers() {
    assert_eq!(dot(&[1.0, 2.0], &[3.0, -1.0]), 1.0);
    assert_eq!(norm2(&[3.0, 4.0]), 5.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn banded_lu_random_tridiagonal(seed in 0u64..1000) {
        let n = 20;
        let mut rng = Lcg(seed.wrapping_mul(2654435761).wrapping_add(1));
        let mut dense = vec![0.0; n * n];
        for r in 0..n {
            for c in r.saturating_sub(1)..(r + 2).min(n) {
                dense[r * n + c] = rng.next_f64() - 0.5;
            }
            dense[r * n + r] += 3.0;
        }
        let a = csr_from_dense(n, n, &dense);
        let lu = BandedLu::new(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
        let mut x = b.clone();
        lu.solve(&mut x);
        let mut r = vec![0.0; n];
        a.mul_vec(&x, &mut r);
        for i in 0..n {
            prop_assert!((r[i] - b[i]).abs() < 1e-11);
        }
    }
}
