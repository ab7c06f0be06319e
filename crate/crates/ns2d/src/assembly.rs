//! Global operator and right-hand-side assembly.
//!
//! Velocity fields are stored blockwise: a 2-component field over a space
//! with N scalar dofs is a vector of length 2N, x-component first. All
//! quadrature-assembled forms run over straight-sided (affine) triangles.

use std::collections::BTreeMap;

use crate::elements::{
    bilinear_quadrature_degree, convection_quadrature_degree, gauss_legendre_unit, make_quadrature,
    FiniteElementSpace, QuadratureRule, ReferenceElement,
};
use crate::linsolve::{CooMatrix, CsrMatrix};
use crate::Result;

/// Per-triangle affine geometry: physical corner, Jacobian, its inverse
/// transpose (for gradient push-forward) and determinant.
#[derive(Debug, Clone, Copy)]
struct TriGeom {
    p0: [f64; 2],
    j: [[f64; 2]; 2],
    invjt: [[f64; 2]; 2],
    detj: f64,
}

fn tri_geom(space: &FiniteElementSpace, t: usize) -> TriGeom {
    let mesh = space.mesh();
    let tri = mesh.triangles()[t];
    let p0 = mesh.vertices()[tri[0]];
    let p1 = mesh.vertices()[tri[1]];
    let p2 = mesh.vertices()[tri[2]];
    let j = [
        [p1[0] - p0[0], p2[0] - p0[0]],
        [p1[1] - p0[1], p2[1] - p0[1]],
    ];
    let detj = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    // J^{-T} = (1/det) [[ J22, -J21], [-J12, J11]]
    let invjt = [
        [j[1][1] / detj, -j[1][0] / detj],
        [-j[0][1] / detj, j[0][0] / detj],
    ];
    TriGeom { p0, j, invjt, detj }
}

impl TriGeom {
    fn to_phys(&self, xr: f64, yr: f64) -> [f64; 2] {
        [
            self.p0[0] + self.j[0][0] * xr + self.j[0][1] * yr,
            self.p0[1] + self.j[1][0] * xr + self.j[1][1] * yr,
        ]
    }

    fn push_grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.invjt[0][0] * g[0] + self.invjt[0][1] * g[1],
            self.invjt[1][0] * g[0] + self.invjt[1][1] * g[1],
        ]
    }
}

/// Reference basis values and gradients tabulated at a rule's points.
struct BasisTable {
    phi: Vec<Vec<f64>>,
    gref: Vec<Vec<[f64; 2]>>,
}

fn tabulate(elem: &ReferenceElement, rule: &QuadratureRule) -> BasisTable {
    let n = elem.node_count();
    let mut phi = Vec::with_capacity(rule.len());
    let mut gref = Vec::with_capacity(rule.len());
    for p in &rule.points {
        let mut f = vec![0.0; n];
        let mut g = vec![[0.0; 2]; n];
        elem.eval_basis(p[0], p[1], &mut f);
        elem.eval_grad(p[0], p[1], &mut g);
        phi.push(f);
        gref.push(g);
    }
    BasisTable { phi, gref }
}

/// Mass matrix M_ij = (phi_j, phi_i) over scalar dofs.
pub fn assemble_mass(space: &FiniteElementSpace) -> Result<CsrMatrix> {
    let elem = space.element();
    let rule = make_quadrature(bilinear_quadrature_degree(space.order()))?;
    let tab = tabulate(elem, &rule);
    let n = elem.node_count();
    let mut coo = CooMatrix::new(space.ndofs(), space.ndofs());
    for t in 0..space.mesh().triangle_count() {
        let geom = tri_geom(space, t);
        let dofs = space.elem_dofs(t);
        let mut local = vec![0.0; n * n];
        for (q, w) in rule.weights.iter().enumerate() {
            let wj = w * geom.detj;
            let phi = &tab.phi[q];
            for i in 0..n {
                let wi = wj * phi[i];
                for j in 0..n {
                    local[i * n + j] += wi * phi[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                coo.push(dofs[i], dofs[j], local[i * n + j]);
            }
        }
    }
    Ok(coo.to_csr())
}

/// Stiffness matrix K_ij = (grad phi_j, grad phi_i).
pub fn assemble_stiffness(space: &FiniteElementSpace) -> Result<CsrMatrix> {
    let elem = space.element();
    let rule = make_quadrature(bilinear_quadrature_degree(space.order()))?;
    let tab = tabulate(elem, &rule);
    let n = elem.node_count();
    let mut coo = CooMatrix::new(space.ndofs(), space.ndofs());
    for t in 0..space.mesh().triangle_count() {
        let geom = tri_geom(space, t);
        let dofs = space.elem_dofs(t);
        let mut local = vec![0.0; n * n];
        for (q, w) in rule.weights.iter().enumerate() {
            let wj = w * geom.detj;
            let g: Vec<[f64; 2]> = tab.gref[q].iter().map(|&gr| geom.push_grad(gr)).collect();
            for i in 0..n {
                for j in 0..n {
                    local[i * n + j] += wj * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                coo.push(dofs[i], dofs[j], local[i * n + j]);
            }
        }
    }
    Ok(coo.to_csr())
}

/// Row sums of the mass matrix, i.e. the load vector (1, phi_i). Used both
/// for mean-value constraints and mass lumping.
pub fn mass_row_sums(mass: &CsrMatrix) -> Vec<f64> {
    (0..mass.nrows())
        .map(|r| mass.row(r).1.iter().sum())
        .collect()
}

/// Momentum residual (L u + F, v) tested against all vector basis functions:
/// L u = -rho (u . grad) u - grad p + mu Lap u, the viscous term integrated
/// by parts to -mu (grad u, grad v). Returns a 2N block vector.
pub fn apply_momentum_rhs(
    space: &FiniteElementSpace,
    u: &[f64],
    p: &[f64],
    rho: f64,
    mu: f64,
    forcing: &dyn Fn(f64, f64) -> [f64; 2],
) -> Result<Vec<f64>> {
    let elem = space.element();
    let nd = space.ndofs();
    debug_assert_eq!(u.len(), 2 * nd);
    debug_assert_eq!(p.len(), nd);
    let rule = make_quadrature(convection_quadrature_degree(space.order()))?;
    let tab = tabulate(elem, &rule);
    let n = elem.node_count();
    let mut out = vec![0.0; 2 * nd];
    let mut grads = vec![[0.0; 2]; n];
    for t in 0..space.mesh().triangle_count() {
        let geom = tri_geom(space, t);
        let dofs = space.elem_dofs(t);
        for (q, w) in rule.weights.iter().enumerate() {
            let wj = w * geom.detj;
            let phi = &tab.phi[q];
            for (i, &gr) in tab.gref[q].iter().enumerate() {
                grads[i] = geom.push_grad(gr);
            }
            // Field values and gradients at the quadrature point.
            let mut uv = [0.0; 2];
            let mut gu = [[0.0; 2]; 2]; // gu[c] = grad of component c
            let mut gp = [0.0; 2];
            for i in 0..n {
                let d = dofs[i];
                uv[0] += u[d] * phi[i];
                uv[1] += u[nd + d] * phi[i];
                gu[0][0] += u[d] * grads[i][0];
                gu[0][1] += u[d] * grads[i][1];
                gu[1][0] += u[nd + d] * grads[i][0];
                gu[1][1] += u[nd + d] * grads[i][1];
                gp[0] += p[d] * grads[i][0];
                gp[1] += p[d] * grads[i][1];
            }
            let xy = geom.to_phys(rule.points[q][0], rule.points[q][1]);
            let f = forcing(xy[0], xy[1]);
            let conv = [
                uv[0] * gu[0][0] + uv[1] * gu[0][1],
                uv[0] * gu[1][0] + uv[1] * gu[1][1],
            ];
            for c in 0..2 {
                let strong = -rho * conv[c] - gp[c] + f[c];
                for i in 0..n {
                    out[c * nd + dofs[i]] += wj
                        * (strong * phi[i]
                            - mu * (gu[c][0] * grads[i][0] + gu[c][1] * grads[i][1]));
                }
            }
        }
    }
    Ok(out)
}

/// Interior right side of the pressure Poisson equation:
/// entry i = (-rho grad u : (grad u)^T + div F + alpha div u, phi_i).
pub fn assemble_ppe_rhs(
    space: &FiniteElementSpace,
    u: &[f64],
    rho: f64,
    alpha: f64,
    div_forcing: &dyn Fn(f64, f64) -> f64,
) -> Result<Vec<f64>> {
    let elem = space.element();
    let nd = space.ndofs();
    debug_assert_eq!(u.len(), 2 * nd);
    let rule = make_quadrature(convection_quadrature_degree(space.order()))?;
    let tab = tabulate(elem, &rule);
    let n = elem.node_count();
    let mut out = vec![0.0; nd];
    let mut grads = vec![[0.0; 2]; n];
    for t in 0..space.mesh().triangle_count() {
        let geom = tri_geom(space, t);
        let dofs = space.elem_dofs(t);
        for (q, w) in rule.weights.iter().enumerate() {
            let wj = w * geom.detj;
            let phi = &tab.phi[q];
            for (i, &gr) in tab.gref[q].iter().enumerate() {
                grads[i] = geom.push_grad(gr);
            }
            let mut gu = [[0.0; 2]; 2];
            for i in 0..n {
                let d = dofs[i];
                gu[0][0] += u[d] * grads[i][0];
                gu[0][1] += u[d] * grads[i][1];
                gu[1][0] += u[nd + d] * grads[i][0];
                gu[1][1] += u[nd + d] * grads[i][1];
            }
            // grad u : (grad u)^T = u1x^2 + 2 u1y u2x + u2y^2
            let gg = gu[0][0] * gu[0][0] + 2.0 * gu[0][1] * gu[1][0] + gu[1][1] * gu[1][1];
            let div = gu[0][0] + gu[1][1];
            let xy = geom.to_phys(rule.points[q][0], rule.points[q][1]);
            let val = -rho * gg + div_forcing(xy[0], xy[1]) + alpha * div;
            for i in 0..n {
                out[dofs[i]] += wj * val * phi[i];
            }
        }
    }
    Ok(out)
}

/// Natural (Neumann) boundary functional of the pressure Poisson equation:
/// <n . (-rho dg/dt - rho (g . grad) u + F), q> + mu <curl u, n x grad q>,
/// with the 2D scalar conventions curl u = du2/dx - du1/dy and
/// n x grad q = n1 dq/dy - n2 dq/dx. Returns the length-N functional.
#[allow(clippy::too_many_arguments)]
pub fn assemble_tn_boundary(
    space: &FiniteElementSpace,
    u: &[f64],
    rho: f64,
    mu: f64,
    g: &dyn Fn(f64, f64) -> [f64; 2],
    g_t: &dyn Fn(f64, f64) -> [f64; 2],
    forcing: &dyn Fn(f64, f64) -> [f64; 2],
) -> Result<Vec<f64>> {
    let elem = space.element();
    let nd = space.ndofs();
    let n = elem.node_count();
    let (qt, qw) = gauss_legendre_unit(space.order() + 2);
    let mut out = vec![0.0; nd];
    let mut phi = vec![0.0; n];
    let mut gref = vec![[0.0; 2]; n];
    for seg in space.boundary_segments() {
        let geom = tri_geom(space, seg.tri);
        let dofs = space.elem_dofs(seg.tri);
        let len = seg.length();
        let nrm = seg.normal;
        for (&t, &w) in qt.iter().zip(&qw) {
            let r = ReferenceElement::edge_point(seg.local_edge, t);
            elem.eval_basis(r[0], r[1], &mut phi);
            elem.eval_grad(r[0], r[1], &mut gref);
            let xy = geom.to_phys(r[0], r[1]);
            let mut gu = [[0.0; 2]; 2];
            for i in 0..n {
                let d = dofs[i];
                let gi = geom.push_grad(gref[i]);
                gu[0][0] += u[d] * gi[0];
                gu[0][1] += u[d] * gi[1];
                gu[1][0] += u[nd + d] * gi[0];
                gu[1][1] += u[nd + d] * gi[1];
            }
            let curl = gu[1][0] - gu[0][1];
            let gv = g(xy[0], xy[1]);
            let gt = g_t(xy[0], xy[1]);
            let f = forcing(xy[0], xy[1]);
            let conv = [
                gv[0] * gu[0][0] + gv[1] * gu[0][1],
                gv[0] * gu[1][0] + gv[1] * gu[1][1],
            ];
            let normal_part = nrm[0] * (-rho * gt[0] - rho * conv[0] + f[0])
                + nrm[1] * (-rho * gt[1] - rho * conv[1] + f[1]);
            let ws = w * len;
            for i in 0..n {
                let gi = geom.push_grad(gref[i]);
                let nxg = nrm[0] * gi[1] - nrm[1] * gi[0];
                out[dofs[i]] += ws * (normal_part * phi[i] + mu * curl * nxg);
            }
        }
    }
    Ok(out)
}

/// A replacement pressure row for one boundary dof: sparse coefficients of
/// the (n . grad p, phi_ib) functional and the matching right-hand side.
#[derive(Debug, Clone)]
pub struct WabeRow {
    pub dof: usize,
    pub cols: Vec<usize>,
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// Builds the replacement pressure rows of the weighted-average boundary
/// condition, one per boundary scalar dof. Each row realizes
/// (n . grad p, phi_ib) = -rho (n . (du/dt + (u . grad) u), phi_ib)
///                        + (n . F, phi_ib) + mu (curl u, n x grad phi_ib)
/// over the support of phi_ib, with du/dt = (u_new - u_old)/dt and
/// u = u_new in the convection and curl terms. Rows and right sides are
/// scaled by 2/h_local (average incident boundary-edge length) to balance
/// magnitudes against the interior Laplacian rows. The row coefficients are
/// time-independent; only the right side changes between calls.
#[allow(clippy::too_many_arguments)]
pub fn assemble_wabe_rows(
    space: &FiniteElementSpace,
    normals: &BTreeMap<usize, [f64; 2]>,
    u_new: &[f64],
    u_old: &[f64],
    dt: f64,
    rho: f64,
    mu: f64,
    forcing: &dyn Fn(f64, f64) -> [f64; 2],
) -> Result<Vec<WabeRow>> {
    let elem = space.element();
    let nd = space.ndofs();
    let nloc = elem.node_count();
    let rule = make_quadrature(convection_quadrature_degree(space.order()))?;
    let tab = tabulate(elem, &rule);

    // Support elements of each boundary dof.
    let mut support: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for t in 0..space.mesh().triangle_count() {
        for (loc, &d) in space.elem_dofs(t).iter().enumerate() {
            if normals.contains_key(&d) {
                support.entry(d).or_default().push((t, loc));
            }
        }
    }
    // Local boundary length scale: average incident segment length.
    let mut hloc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for seg in space.boundary_segments() {
        for loc in elem.edge_nodes(seg.local_edge) {
            let d = space.elem_dofs(seg.tri)[loc];
            let e = hloc.entry(d).or_insert((0.0, 0));
            e.0 += seg.length();
            e.1 += 1;
        }
    }

    let mut rows = Vec::with_capacity(support.len());
    let mut grads = vec![[0.0; 2]; nloc];
    for (&ib, elems) in &support {
        let nrm = normals[&ib];
        let (lsum, lcnt) = hloc.get(&ib).copied().unwrap_or((0.0, 0));
        let scale = if lcnt > 0 {
            2.0 / (lsum / lcnt as f64)
        } else {
            1.0
        };
        let mut coeffs: BTreeMap<usize, f64> = BTreeMap::new();
        let mut rhs = 0.0;
        for &(t, loc_ib) in elems {
            let geom = tri_geom(space, t);
            let dofs = space.elem_dofs(t);
            for (q, w) in rule.weights.iter().enumerate() {
                let wj = w * geom.detj;
                let phi = &tab.phi[q];
                let wphi = wj * phi[loc_ib];
                for (i, &gr) in tab.gref[q].iter().enumerate() {
                    grads[i] = geom.push_grad(gr);
                }
                let mut uv = [0.0; 2];
                let mut dudt = [0.0; 2];
                let mut gu = [[0.0; 2]; 2];
                for i in 0..nloc {
                    let d = dofs[i];
                    uv[0] += u_new[d] * phi[i];
                    uv[1] += u_new[nd + d] * phi[i];
                    dudt[0] += (u_new[d] - u_old[d]) / dt * phi[i];
                    dudt[1] += (u_new[nd + d] - u_old[nd + d]) / dt * phi[i];
                    gu[0][0] += u_new[d] * grads[i][0];
                    gu[0][1] += u_new[d] * grads[i][1];
                    gu[1][0] += u_new[nd + d] * grads[i][0];
                    gu[1][1] += u_new[nd + d] * grads[i][1];
                }
                let curl = gu[1][0] - gu[0][1];
                let xy = geom.to_phys(rule.points[q][0], rule.points[q][1]);
                let f = forcing(xy[0], xy[1]);
                let conv = [
                    uv[0] * gu[0][0] + uv[1] * gu[0][1],
                    uv[0] * gu[1][0] + uv[1] * gu[1][1],
                ];
                let strong = nrm[0] * (-rho * (dudt[0] + conv[0]) + f[0])
                    + nrm[1] * (-rho * (dudt[1] + conv[1]) + f[1]);
                let gib = grads[loc_ib];
                let nxg = nrm[0] * gib[1] - nrm[1] * gib[0];
                rhs += scale * (wphi * strong + wj * mu * curl * nxg);
                for i in 0..nloc {
                    let ndg = nrm[0] * grads[i][0] + nrm[1] * grads[i][1];
                    *coeffs.entry(dofs[i]).or_insert(0.0) += scale * wphi * ndg;
                }
            }
        }
        let (cols, vals): (Vec<usize>, Vec<f64>) = coeffs.into_iter().unzip();
        rows.push(WabeRow {
            dof: ib,
            cols,
            coeffs: vals,
            rhs,
        });
    }
    Ok(rows)
}

/// Elementwise divergence of a vector field: L-infinity over quadrature
/// points and the L2 norm by quadrature.
pub fn eval_divergence(space: &FiniteElementSpace, u: &[f64]) -> Result<(f64, f64)> {
    let elem = space.element();
    let nd = space.ndofs();
    let rule = make_quadrature(bilinear_quadrature_degree(space.order()))?;
    let tab = tabulate(elem, &rule);
    let n = elem.node_count();
    let mut linf: f64 = 0.0;
    let mut l2sq = 0.0;
    for t in 0..space.mesh().triangle_count() {
        let geom = tri_geom(space, t);
        let dofs = space.elem_dofs(t);
        for (q, w) in rule.weights.iter().enumerate() {
            let mut div = 0.0;
            for i in 0..n {
                let gi = geom.push_grad(tab.gref[q][i]);
                div += u[dofs[i]] * gi[0] + u[nd + dofs[i]] * gi[1];
            }
            linf = linf.max(div.abs());
            l2sq += w * geom.detj * div * div;
        }
    }
    Ok((linf, l2sq.sqrt()))
}

/// Dirichlet row replacement on a square operator. Construction rewrites the
/// marked rows to identity (and, when `symmetric`, also zeroes the matching
/// columns, remembering the removed entries so right-hand sides can be
/// corrected per solve).
#[derive(Debug, Clone)]
pub struct DirichletOp {
    dofs: Vec<usize>,
    /// (row, index into dofs, removed column value) for symmetric elimination.
    removed: Vec<(usize, usize, f64)>,
}

impl DirichletOp {
    pub fn new(a: &mut CsrMatrix, dofs: &[usize], symmetric: bool) -> Self {
        let n = a.nrows();
        let mut pos = vec![usize::MAX; n];
        for (k, &d) in dofs.iter().enumerate() {
            pos[d] = k;
        }
        let mut removed = Vec::new();
        for r in 0..n {
            let (rs, re) = (a.row_ptr()[r], a.row_ptr()[r + 1]);
            if pos[r] != usize::MAX {
                for k in rs..re {
                    let c = a.col_idx()[k];
                    a.values_mut()[k] = if c == r { 1.0 } else { 0.0 };
                }
            } else if symmetric {
                for k in rs..re {
                    let c = a.col_idx()[k];
                    if pos[c] != usize::MAX {
                        let v = a.values()[k];
                        if v != 0.0 {
                            removed.push((r, pos[c], v));
                            a.values_mut()[k] = 0.0;
                        }
                    }
                }
            }
        }
        DirichletOp {
            dofs: dofs.to_vec(),
            removed,
        }
    }

    /// Imposes boundary values on a right-hand side: boundary entries are set
    /// to the values, and eliminated column contributions are subtracted.
    pub fn apply_rhs(&self, rhs: &mut [f64], values: &[f64]) {
        debug_assert_eq!(values.len(), self.dofs.len());
        for &(r, k, v) in &self.removed {
            rhs[r] -= v * values[k];
        }
        for (&d, &v) in self.dofs.iter().zip(values) {
            rhs[d] = v;
        }
    }
}
