//! Equispaced Lagrange bases on the reference triangle with vertices
//! (0,0), (1,0), (0,1).

use crate::{Error, Result};

/// Classification of a reference node, used to build conforming global dof
/// maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Local vertex 0, 1 or 2.
    Vertex(usize),
    /// Node on local edge `edge` (edge e runs from vertex e to vertex
    /// (e+1)%3); `index` counts from 0 starting next to the first vertex.
    Edge { edge: usize, index: usize },
    /// Strictly interior node.
    Interior(usize),
}

/// Lagrange element of order n on the reference triangle with equispaced
/// nodes. Basis polynomials are stored as coefficient vectors in the monomial
/// basis x^a y^b, a+b <= n.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    order: usize,
    nodes: Vec<[f64; 2]>,
    kinds: Vec<NodeKind>,
    /// coeffs[i * nmono + j]: coefficient of monomial j in basis i.
    coeffs: Vec<f64>,
    monomials: Vec<(u32, u32)>,
}

/// Builds the reference element of the given order (1, 2 or 4).
pub fn make_reference_element(order: usize) -> Result<ReferenceElement> {
    ReferenceElement::new(order)
}

impl ReferenceElement {
    pub fn new(order: usize) -> Result<Self> {
        if !matches!(order, 1 | 2 | 4) {
            return Err(Error::invalid_argument(format!(
                "unsupported element order {order}; supported orders are 1, 2, 4"
            )));
        }
        let n = order;
        let mut nodes = Vec::new();
        let mut kinds = Vec::new();

        // Vertices in local order.
        let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for (v, p) in verts.iter().enumerate() {
            nodes.push(*p);
            kinds.push(NodeKind::Vertex(v));
        }
        // Edge nodes, per edge from its first vertex to its second.
        for e in 0..3 {
            let a = verts[e];
            let b = verts[(e + 1) % 3];
            for i in 1..n {
                let t = i as f64 / n as f64;
                nodes.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                kinds.push(NodeKind::Edge { edge: e, index: i - 1 });
            }
        }
        // Interior lattice nodes.
        let mut interior = 0;
        for j in 1..n {
            for i in 1..n - j {
                nodes.push([i as f64 / n as f64, j as f64 / n as f64]);
                kinds.push(NodeKind::Interior(interior));
                interior += 1;
            }
        }
        let count = (n + 1) * (n + 2) / 2;
        debug_assert_eq!(nodes.len(), count);

        let monomials: Vec<(u32, u32)> = (0..=n as u32)
            .flat_map(|d| (0..=d).map(move |b| (d - b, b)))
            .collect();
        debug_assert_eq!(monomials.len(), count);

        // Vandermonde V[k][j] = mono_j(node_k); basis coefficients are the
        // transposed inverse so that basis_i(node_k) = delta_ik.
        let mut v = vec![0.0; count * count];
        for (k, p) in nodes.iter().enumerate() {
            for (j, &(a, b)) in monomials.iter().enumerate() {
                v[k * count + j] = p[0].powi(a as i32) * p[1].powi(b as i32);
            }
        }
        let vinv = invert_dense(&mut v, count).ok_or_else(|| {
            Error::invalid_argument(format!("singular Vandermonde for order {order}"))
        })?;
        // coeffs[i][j] = vinv[j][i]
        let mut coeffs = vec![0.0; count * count];
        for i in 0..count {
            for j in 0..count {
                coeffs[i * count + j] = vinv[j * count + i];
            }
        }

        Ok(ReferenceElement {
            order,
            nodes,
            kinds,
            coeffs,
            monomials,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Reference coordinates of the Lagrange nodes.
    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node_kind(&self, i: usize) -> NodeKind {
        self.kinds[i]
    }

    /// Local node indices lying on local edge `e`, ordered from vertex `e` to
    /// vertex `(e+1)%3`.
    pub fn edge_nodes(&self, e: usize) -> Vec<usize> {
        let mut out = vec![e];
        for (i, k) in self.kinds.iter().enumerate() {
            if let NodeKind::Edge { edge, .. } = k {
                if *edge == e {
                    out.push(i);
                }
            }
        }
        out.push((e + 1) % 3);
        out
    }

    /// Reference coordinates of the point at parameter `t` in [0, 1] along
    /// local edge `e` (from vertex `e` to vertex `(e+1)%3`).
    pub fn edge_point(e: usize, t: f64) -> [f64; 2] {
        match e {
            0 => [t, 0.0],
            1 => [1.0 - t, t],
            2 => [0.0, 1.0 - t],
            _ => panic!("local edge index out of range"),
        }
    }

    /// Evaluates all basis functions at a reference point.
    pub fn eval_basis(&self, x: f64, y: f64, out: &mut [f64]) {
        let count = self.node_count();
        let monos: Vec<f64> = self
            .monomials
            .iter()
            .map(|&(a, b)| x.powi(a as i32) * y.powi(b as i32))
            .collect();
        for i in 0..count {
            out[i] = (0..count)
                .map(|j| self.coeffs[i * count + j] * monos[j])
                .sum();
        }
    }

    /// Evaluates all basis gradients at a reference point.
    pub fn eval_grad(&self, x: f64, y: f64, out: &mut [[f64; 2]]) {
        let count = self.node_count();
        let dx: Vec<f64> = self
            .monomials
            .iter()
            .map(|&(a, b)| {
                if a == 0 {
                    0.0
                } else {
                    a as f64 * x.powi(a as i32 - 1) * y.powi(b as i32)
                }
            })
            .collect();
        let dy: Vec<f64> = self
            .monomials
            .iter()
            .map(|&(a, b)| {
                if b == 0 {
                    0.0
                } else {
                    b as f64 * x.powi(a as i32) * y.powi(b as i32 - 1)
                }
            })
            .collect();
        for i in 0..count {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for j in 0..count {
                let c = self.coeffs[i * count + j];
                gx += c * dx[j];
                gy += c * dy[j];
            }
            out[i] = [gx, gy];
        }
    }
}

/// Plain Gauss-Jordan inverse with partial pivoting; fine for the small
/// Vandermonde systems here (at most 15x15).
fn invert_dense(a: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&r1, &r2| {
            a[r1 * n + col]
                .abs()
                .total_cmp(&a[r2 * n + col].abs())
        })?;
        if a[pivot * n + col].abs() < 1e-14 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
                inv.swap(col * n + j, pivot * n + j);
            }
        }
        let d = a[col * n + col];
        for j in 0..n {
            a[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r * n + col];
                if f != 0.0 {
                    for j in 0..n {
                        a[r * n + j] -= f * a[col * n + j];
                        inv[r * n + j] -= f * inv[col * n + j];
                    }
                }
            }
        }
    }
    Some(inv)
}
