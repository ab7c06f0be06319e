//! Structured mesh generators and the bundled cylinder-channel mesh.

use std::f64::consts::PI;

use super::{BoundaryEdge, Mesh};
use crate::{Error, Result};

/// Uniform triangulation of the unit square with `m` cells per side.
///
/// Produces `(m+1)^2` vertices on the lattice of spacing `1/m`, two triangles
/// per cell split along the same diagonal, and `4m` boundary edges tagged by
/// side (bottom=1, right=2, top=3, left=4).
pub fn gen_unit_square(m: usize) -> Result<Mesh> {
    gen_stretched_square(m, 0.0)
}

/// Unit-square triangulation with lattice coordinates graded by
/// `s(x) = x - beta * sin(2 pi x) / (2 pi)` in each direction, clustering
/// points towards the boundaries for `beta > 0`.
pub fn gen_stretched_square(m: usize, beta: f64) -> Result<Mesh> {
    if m == 0 {
        return Err(Error::invalid_argument("cells per side must be >= 1"));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::invalid_argument(format!(
            "stretching strength must be in [0, 1), got {beta}"
        )));
    }
    let map = |i: usize| -> f64 {
        let xi = i as f64 / m as f64;
        if beta == 0.0 {
            xi
        } else {
            xi - beta * (2.0 * PI * xi).sin() / (2.0 * PI)
        }
    };
    let np = m + 1;
    let idx = |i: usize, j: usize| j * np + i;
    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            vertices.push([map(i), map(j)]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            let v00 = idx(i, j);
            let v10 = idx(i + 1, j);
            let v01 = idx(i, j + 1);
            let v11 = idx(i + 1, j + 1);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mut boundary_edges = Vec::with_capacity(4 * m);
    for i in 0..m {
        boundary_edges.push(BoundaryEdge {
            vertices: [idx(i, 0), idx(i + 1, 0)],
            tag: 1,
        });
    }
    for j in 0..m {
        boundary_edges.push(BoundaryEdge {
            vertices: [idx(m, j), idx(m, j + 1)],
            tag: 2,
        });
    }
    for i in (0..m).rev() {
        boundary_edges.push(BoundaryEdge {
            vertices: [idx(i + 1, m), idx(i, m)],
            tag: 3,
        });
    }
    for j in (0..m).rev() {
        boundary_edges.push(BoundaryEdge {
            vertices: [idx(0, j + 1), idx(0, j)],
            tag: 4,
        });
    }
    Mesh::new(vertices, triangles, boundary_edges)
}

/// Boundary tags of the cylinder-channel mesh.
pub mod channel_tags {
    pub const INFLOW: u32 = 1;
    pub const OUTFLOW: u32 = 2;
    pub const WALL: u32 = 3;
    pub const CYLINDER: u32 = 4;
}

/// The bundled unstructured mesh of the channel `[0, 2.2] x [0, 0.41]` minus
/// a polygonal cylinder of radius 0.05 centered at (0.2, 0.2). Boundary tags
/// follow [`channel_tags`]. The cylinder stays a polygon under refinement.
pub fn gen_cylinder_channel() -> Result<Mesh> {
    static DATA: &str = include_str!("../../data/cylinder_g1.txt");
    super::fmt::parse_mesh(DATA)
}
