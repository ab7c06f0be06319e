//! Planar triangulations with tagged boundary edges and per-node outward
//! normals.

mod fmt;
mod gen;

pub use fmt::{format_mesh, load_mesh, parse_mesh, save_mesh};
pub use gen::{channel_tags, gen_cylinder_channel, gen_stretched_square, gen_unit_square};

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::{Error, Result};

/// A boundary edge: an ordered vertex pair plus an integer tag identifying the
/// boundary piece it belongs to. The pair is oriented so that the domain lies
/// to its left (counterclockwise traversal of the outer boundary, clockwise of
/// holes); the outward normal is the edge direction rotated by -90 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: u32,
}

/// Planar triangulation. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    /// Unit outward normals at boundary vertices, populated by
    /// [`Mesh::with_node_normals`].
    node_normals: BTreeMap<usize, [f64; 2]>,
}

impl Mesh {
    /// Builds a mesh from raw arrays and validates index consistency and
    /// triangle orientation.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            node_normals: BTreeMap::new(),
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn node_normals(&self) -> &BTreeMap<usize, [f64; 2]> {
        &self.node_normals
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Signed area of triangle `t` (positive for counterclockwise vertices).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    /// Set of undirected edges (vertex pairs with smaller index first).
    pub fn edge_set(&self) -> HashSet<(usize, usize)> {
        let mut edges = HashSet::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges
    }

    pub fn edge_count(&self) -> usize {
        self.edge_set().len()
    }

    /// V - E + T; 1 for a simply connected domain, 0 for one hole.
    pub fn euler_characteristic(&self) -> isize {
        self.vertex_count() as isize - self.edge_count() as isize + self.triangle_count() as isize
    }

    /// Minimum edge length over the mesh. Used for the divergence damping
    /// coefficient and the time-step bound.
    pub fn min_edge_length(&self) -> f64 {
        self.edge_set()
            .iter()
            .map(|&(a, b)| self.edge_length(a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edge_set()
            .iter()
            .map(|&(a, b)| self.edge_length(a, b))
            .fold(0.0, f64::max)
    }

    fn edge_length(&self, a: usize, b: usize) -> f64 {
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt()
    }

    /// For each boundary edge, the adjacent triangle index and the local edge
    /// (0, 1 or 2) within that triangle.
    pub fn boundary_edge_elements(&self) -> Result<Vec<(usize, usize)>> {
        let mut owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                owner.insert((a.min(b), a.max(b)), (t, e));
            }
        }
        self.boundary_edges
            .iter()
            .map(|be| {
                let [a, b] = be.vertices;
                owner
                    .get(&(a.min(b), a.max(b)))
                    .copied()
                    .ok_or_else(|| {
                        Error::MalformedMesh(format!(
                            "boundary edge ({a}, {b}) is not an edge of any triangle"
                        ))
                    })
            })
            .collect()
    }

    /// Outward unit normal of boundary edge `e`, derived from the adjacent
    /// triangle so it is correct regardless of the stored pair orientation.
    pub fn boundary_edge_normal(&self, e: usize, owner: (usize, usize)) -> [f64; 2] {
        let [a, b] = self.boundary_edges[e].vertices;
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let d = [pb[0] - pa[0], pb[1] - pa[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let mut n = [d[1] / len, -d[0] / len];
        // Flip if it points towards the opposite vertex of the owner triangle.
        let tri = self.triangles[owner.0];
        let opp = tri[(owner.1 + 2) % 3];
        let po = self.vertices[opp];
        let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        if n[0] * (po[0] - mid[0]) + n[1] * (po[1] - mid[1]) > 0.0 {
            n = [-n[0], -n[1]];
        }
        n
    }

    /// Returns a copy with unit outward normals populated at every boundary
    /// vertex. The normal at a vertex is the bisector of the two adjacent edge
    /// outward normals (exact for straight segments, radial to O(h^2) on a
    /// polygon inscribed in a circle).
    pub fn with_node_normals(&self) -> Result<Mesh> {
        let owners = self.boundary_edge_elements()?;
        // Adjacent boundary edges per boundary vertex.
        let mut adjacent: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (e, be) in self.boundary_edges.iter().enumerate() {
            for &v in &be.vertices {
                adjacent.entry(v).or_default().push(e);
            }
        }
        let mut normals = BTreeMap::new();
        for (&v, edges) in &adjacent {
            if edges.len() != 2 {
                return Err(Error::MalformedBoundary(format!(
                    "boundary vertex {v} has {} adjacent boundary edges, expected 2",
                    edges.len()
                )));
            }
            let n1 = self.boundary_edge_normal(edges[0], owners[edges[0]]);
            let n2 = self.boundary_edge_normal(edges[1], owners[edges[1]]);
            let sum = [n1[0] + n2[0], n1[1] + n2[1]];
            let len = (sum[0] * sum[0] + sum[1] * sum[1]).sqrt();
            if len < 1e-12 {
                return Err(Error::MalformedBoundary(format!(
                    "adjacent edge normals at vertex {v} cancel"
                )));
            }
            normals.insert(v, [sum[0] / len, sum[1] / len]);
        }
        let mut mesh = self.clone();
        mesh.node_normals = normals;
        Ok(mesh)
    }

    /// Splits every triangle into `n^2` similar subtriangles. Shared-edge
    /// nodes are deduplicated and boundary tags are inherited; new boundary
    /// nodes stay on the original polygonal boundary (no snapping to curved
    /// geometry).
    pub fn refine_uniform(&self, n: usize) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::invalid_argument("split factor must be >= 1"));
        }
        if n == 1 {
            return Ok(Mesh {
                vertices: self.vertices.clone(),
                triangles: self.triangles.clone(),
                boundary_edges: self.boundary_edges.clone(),
                node_normals: BTreeMap::new(),
            });
        }

        #[derive(Hash, PartialEq, Eq, Clone, Copy)]
        enum Key {
            Vertex(usize),
            // (min vertex, max vertex, step from min vertex along the edge)
            Edge(usize, usize, usize),
            Interior(usize, usize, usize), // (triangle, i, j)
        }

        let mut vertices: Vec<[f64; 2]> = Vec::new();
        let mut ids: HashMap<Key, usize> = HashMap::new();
        let mut get = |key: Key, p: [f64; 2], vertices: &mut Vec<[f64; 2]>| -> usize {
            *ids.entry(key).or_insert_with(|| {
                vertices.push(p);
                vertices.len() - 1
            })
        };

        let lattice_key = |t: usize, tri: &[usize; 3], i: usize, j: usize| -> Key {
            // Barycentric lattice point (n-i-j, i, j) on triangle t.
            let k = n - i - j;
            if k == n {
                Key::Vertex(tri[0])
            } else if i == n {
                Key::Vertex(tri[1])
            } else if j == n {
                Key::Vertex(tri[2])
            } else if j == 0 {
                let (a, b) = (tri[0], tri[1]);
                let step = if a < b { i } else { n - i };
                Key::Edge(a.min(b), a.max(b), step)
            } else if k == 0 {
                let (a, b) = (tri[1], tri[2]);
                let step = if a < b { j } else { n - j };
                Key::Edge(a.min(b), a.max(b), step)
            } else if i == 0 {
                let (a, b) = (tri[2], tri[0]);
                let step = if a < b { k } else { n - k };
                Key::Edge(a.min(b), a.max(b), step)
            } else {
                Key::Interior(t, i, j)
            }
        };

        let mut triangles = Vec::with_capacity(self.triangles.len() * n * n);
        for (t, tri) in self.triangles.iter().enumerate() {
            let p0 = self.vertices[tri[0]];
            let p1 = self.vertices[tri[1]];
            let p2 = self.vertices[tri[2]];
            let point = |i: usize, j: usize| -> [f64; 2] {
                let a = i as f64 / n as f64;
                let b = j as f64 / n as f64;
                [
                    p0[0] + a * (p1[0] - p0[0]) + b * (p2[0] - p0[0]),
                    p0[1] + a * (p1[1] - p0[1]) + b * (p2[1] - p0[1]),
                ]
            };
            let mut id = |i: usize, j: usize, vertices: &mut Vec<[f64; 2]>| {
                get(lattice_key(t, tri, i, j), point(i, j), vertices)
            };
            for i in 0..n {
                for j in 0..n - i {
                    let a = id(i, j, &mut vertices);
                    let b = id(i + 1, j, &mut vertices);
                    let c = id(i, j + 1, &mut vertices);
                    triangles.push([a, b, c]);
                    if i + j < n - 1 {
                        let d = id(i + 1, j + 1, &mut vertices);
                        triangles.push([b, d, c]);
                    }
                }
            }
        }

        let mut boundary_edges = Vec::with_capacity(self.boundary_edges.len() * n);
        for be in &self.boundary_edges {
            let [a, b] = be.vertices;
            let (lo, hi) = (a.min(b), a.max(b));
            let key_at = |step_from_a: usize| -> Key {
                if step_from_a == 0 {
                    Key::Vertex(a)
                } else if step_from_a == n {
                    Key::Vertex(b)
                } else {
                    let step = if a == lo { step_from_a } else { n - step_from_a };
                    Key::Edge(lo, hi, step)
                }
            };
            for s in 0..n {
                let va = *ids.get(&key_at(s)).ok_or_else(|| {
                    Error::MalformedMesh(format!(
                        "boundary edge ({a}, {b}) is not an edge of any triangle"
                    ))
                })?;
                let vb = *ids.get(&key_at(s + 1)).unwrap();
                boundary_edges.push(BoundaryEdge {
                    vertices: [va, vb],
                    tag: be.tag,
                });
            }
        }

        Mesh::new(vertices, triangles, boundary_edges)
    }

    /// Checks the structural invariants: index bounds, strictly positive
    /// signed areas, each boundary edge belonging to exactly one triangle, and
    /// boundary edges forming closed loops.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::MalformedMesh(format!(
                        "triangle {t} references vertex {v} beyond vertex count {nv}"
                    )));
                }
            }
            if self.signed_area(t) <= 0.0 {
                return Err(Error::MalformedMesh(format!(
                    "triangle {t} has non-positive signed area {}",
                    self.signed_area(t)
                )));
            }
        }
        // Edge incidence counts.
        let mut incidence: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                *incidence.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut degree: HashMap<usize, usize> = HashMap::new();
        for (i, be) in self.boundary_edges.iter().enumerate() {
            let [a, b] = be.vertices;
            if a >= nv || b >= nv {
                return Err(Error::MalformedMesh(format!(
                    "boundary edge {i} references vertex beyond vertex count {nv}"
                )));
            }
            match incidence.get(&(a.min(b), a.max(b))) {
                Some(1) => {}
                Some(c) => {
                    return Err(Error::MalformedMesh(format!(
                        "boundary edge ({a}, {b}) belongs to {c} triangles"
                    )))
                }
                None => {
                    return Err(Error::MalformedMesh(format!(
                        "boundary edge ({a}, {b}) is not a triangle edge"
                    )))
                }
            }
            *degree.entry(a).or_insert(0) += 1;
            *degree.entry(b).or_insert(0) += 1;
        }
        // Closed loops: every vertex on the boundary touches exactly two
        // boundary edges.
        for (&v, &d) in &degree {
            if d != 2 {
                return Err(Error::MalformedBoundary(format!(
                    "boundary vertex {v} has degree {d}"
                )));
            }
        }
        // Every edge with incidence 1 must be declared as a boundary edge.
        let declared: HashSet<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|be| {
                let [a, b] = be.vertices;
                (a.min(b), a.max(b))
            })
            .collect();
        for (&e, &c) in &incidence {
            if c == 1 && !declared.contains(&e) {
                return Err(Error::MalformedMesh(format!(
                    "edge ({}, {}) lies on the boundary but is not declared",
                    e.0, e.1
                )));
            }
            if c > 2 {
                return Err(Error::MalformedMesh(format!(
                    "edge ({}, {}) is shared by {c} triangles",
                    e.0, e.1
                )));
            }
        }
        Ok(())
    }
}
