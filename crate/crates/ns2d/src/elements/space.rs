//! Global degree-of-freedom maps over a mesh.

use std::collections::{BTreeMap, HashMap};

use super::reference::{NodeKind, ReferenceElement};
use crate::mesh::Mesh;
use crate::{Error, Result};

/// A boundary edge seen from the finite-element side: its owner triangle,
/// local edge id, tag, outward normal and physical endpoints in the owner
/// triangle's traversal order.
#[derive(Debug, Clone)]
pub struct BoundarySegment {
    pub mesh_edge: usize,
    pub tri: usize,
    pub local_edge: usize,
    pub tag: u32,
    pub normal: [f64; 2],
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl BoundarySegment {
    pub fn length(&self) -> f64 {
        ((self.b[0] - self.a[0]).powi(2) + (self.b[1] - self.a[1]).powi(2)).sqrt()
    }
}

/// Lagrange P_n dof layout over a mesh, scalar or 2-vector valued. Vector
/// fields store their coefficient arrays blockwise per component:
/// `[c0_dof0 .. c0_dofN, c1_dof0 .. c1_dofN]`.
#[derive(Debug, Clone)]
pub struct FiniteElementSpace {
    mesh: Mesh,
    element: ReferenceElement,
    components: usize,
    ndofs: usize,
    /// ntri x node_count scalar dof ids, flattened.
    elem_dofs: Vec<usize>,
    dof_coords: Vec<[f64; 2]>,
    boundary_dofs: BTreeMap<u32, Vec<usize>>,
    is_boundary_dof: Vec<bool>,
    segments: Vec<BoundarySegment>,
    periodic_x: bool,
}

/// Builds the dof map for order-n Lagrange elements with the given component
/// count (1 or 2).
pub fn build_dof_map(mesh: &Mesh, order: usize, components: usize) -> Result<FiniteElementSpace> {
    FiniteElementSpace::build(mesh, order, components, false)
}

/// Like [`build_dof_map`] but identifies dofs across x=0 and x=1 on
/// structured unit-square meshes. Tags 2 (right) and 4 (left) stop being
/// boundaries.
pub fn build_dof_map_periodic_x(
    mesh: &Mesh,
    order: usize,
    components: usize,
) -> Result<FiniteElementSpace> {
    FiniteElementSpace::build(mesh, order, components, true)
}

impl FiniteElementSpace {
    fn build(mesh: &Mesh, order: usize, components: usize, periodic_x: bool) -> Result<Self> {
        if components != 1 && components != 2 {
            return Err(Error::invalid_argument(format!(
                "component count must be 1 or 2, got {components}"
            )));
        }
        let element = ReferenceElement::new(order)?;
        let nloc = element.node_count();

        // Vertex representative map (identity unless periodic).
        let nv = mesh.vertex_count();
        let mut rep: Vec<usize> = (0..nv).collect();
        if periodic_x {
            // Match vertices at x ~ 1 to vertices at x ~ 0 with equal y.
            let mut left: Vec<(usize, f64)> = Vec::new();
            for (v, p) in mesh.vertices().iter().enumerate() {
                if p[0].abs() < 1e-12 {
                    left.push((v, p[1]));
                }
            }
            for (v, p) in mesh.vertices().iter().enumerate() {
                if (p[0] - 1.0).abs() < 1e-12 {
                    let m = left
                        .iter()
                        .find(|(_, y)| (y - p[1]).abs() < 1e-10)
                        .ok_or_else(|| {
                            Error::MalformedMesh(format!(
                                "no periodic partner for vertex {v} at y = {}",
                                p[1]
                            ))
                        })?;
                    rep[v] = m.0;
                }
            }
        }

        let mut vertex_dof: HashMap<usize, usize> = HashMap::new();
        let mut edge_dofs: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        let mut dof_coords: Vec<[f64; 2]> = Vec::new();
        let mut elem_dofs = vec![0usize; mesh.triangle_count() * nloc];

        for (t, tri) in mesh.triangles().iter().enumerate() {
            let ps: Vec<[f64; 2]> = tri.iter().map(|&v| mesh.vertices()[v]).collect();
            for (loc, node) in element.nodes().iter().enumerate() {
                let phys = [
                    ps[0][0] + node[0] * (ps[1][0] - ps[0][0]) + node[1] * (ps[2][0] - ps[0][0]),
                    ps[0][1] + node[0] * (ps[1][1] - ps[0][1]) + node[1] * (ps[2][1] - ps[0][1]),
                ];
                let dof = match element.node_kind(loc) {
                    NodeKind::Vertex(v) => {
                        let r = rep[tri[v]];
                        *vertex_dof.entry(r).or_insert_with(|| {
                            dof_coords.push(phys);
                            dof_coords.len() - 1
                        })
                    }
                    NodeKind::Edge { edge, index } => {
                        let a = rep[tri[edge]];
                        let b = rep[tri[(edge + 1) % 3]];
                        let key = (a.min(b), a.max(b));
                        let n_edge = order - 1;
                        let dofs = edge_dofs.entry(key).or_default();
                        if dofs.is_empty() {
                            // Coordinates are filled in as the nodes are
                            // visited; push placeholders for consecutive ids.
                            let start = dof_coords.len();
                            dof_coords.resize(start + n_edge, phys);
                            dofs.extend(start..start + n_edge);
                        }
                        // Orientation: stored from min(a,b) to max(a,b).
                        let idx = if a < b { index } else { order - 2 - index };
                        let d = dofs[idx];
                        dof_coords[d] = phys;
                        d
                    }
                    NodeKind::Interior(_) => {
                        dof_coords.push(phys);
                        dof_coords.len() - 1
                    }
                };
                elem_dofs[t * nloc + loc] = dof;
            }
        }
        let ndofs = dof_coords.len();

        // Renumber dofs with reverse Cuthill-McKee so the assembled
        // operators have small bandwidth (they are factored directly).
        {
            let nloc_all = nloc;
            let mut adj: Vec<std::collections::BTreeSet<usize>> =
                vec![std::collections::BTreeSet::new(); ndofs];
            for t in 0..mesh.triangle_count() {
                let dofs = &elem_dofs[t * nloc_all..(t + 1) * nloc_all];
                for &a in dofs {
                    for &b in dofs {
                        if a != b {
                            adj[a].insert(b);
                        }
                    }
                }
            }
            let adj: Vec<Vec<usize>> = adj
                .into_iter()
                .map(|s| s.into_iter().collect())
                .collect();
            let perm = crate::linsolve::rcm_order(&adj);
            for d in elem_dofs.iter_mut() {
                *d = perm[*d];
            }
            let mut coords = vec![[0.0; 2]; ndofs];
            for (old, &p) in dof_coords.iter().enumerate() {
                coords[perm[old]] = p;
            }
            dof_coords = coords;
        }

        // Boundary segments and per-tag dof lists.
        let owners = mesh.boundary_edge_elements()?;
        let mut segments = Vec::new();
        let mut boundary_dofs: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        let mut is_boundary_dof = vec![false; ndofs];
        for (e, be) in mesh.boundary_edges().iter().enumerate() {
            if periodic_x && (be.tag == 2 || be.tag == 4) {
                continue;
            }
            let (tri, local_edge) = owners[e];
            let normal = mesh.boundary_edge_normal(e, (tri, local_edge));
            let tv = mesh.triangles()[tri];
            let a = mesh.vertices()[tv[local_edge]];
            let b = mesh.vertices()[tv[(local_edge + 1) % 3]];
            segments.push(BoundarySegment {
                mesh_edge: e,
                tri,
                local_edge,
                tag: be.tag,
                normal,
                a,
                b,
            });
            let list = boundary_dofs.entry(be.tag).or_default();
            for loc in element.edge_nodes(local_edge) {
                let d = elem_dofs[tri * nloc + loc];
                if !list.contains(&d) {
                    list.push(d);
                }
                is_boundary_dof[d] = true;
            }
        }
        for list in boundary_dofs.values_mut() {
            list.sort_unstable();
        }

        Ok(FiniteElementSpace {
            mesh: mesh.clone(),
            element,
            components,
            ndofs,
            elem_dofs,
            dof_coords,
            boundary_dofs,
            is_boundary_dof,
            segments,
            periodic_x,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn order(&self) -> usize {
        self.element.order()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Number of scalar dofs (per component).
    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    /// Total coefficient-vector length (`ndofs * components`).
    pub fn total_dofs(&self) -> usize {
        self.ndofs * self.components
    }

    pub fn periodic_x(&self) -> bool {
        self.periodic_x
    }

    /// Scalar dof ids of triangle `t`, one per local node.
    pub fn elem_dofs(&self, t: usize) -> &[usize] {
        let n = self.element.node_count();
        &self.elem_dofs[t * n..(t + 1) * n]
    }

    pub fn dof_coords(&self) -> &[[f64; 2]] {
        &self.dof_coords
    }

    pub fn boundary_dofs(&self) -> &BTreeMap<u32, Vec<usize>> {
        &self.boundary_dofs
    }

    /// All boundary scalar dofs, sorted and deduplicated.
    pub fn all_boundary_dofs(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.ndofs)
            .filter(|&d| self.is_boundary_dof[d])
            .collect();
        out.sort_unstable();
        out
    }

    pub fn is_boundary_dof(&self, d: usize) -> bool {
        self.is_boundary_dof[d]
    }

    /// Boundary edges owned by this space (excludes periodically identified
    /// sides).
    pub fn boundary_segments(&self) -> &[BoundarySegment] {
        &self.segments
    }

    /// Unit outward normal per boundary scalar dof. Edge-interior dofs take
    /// their edge's normal; vertex dofs take the mesh node normal when
    /// present, otherwise the average of adjacent segment normals (periodic
    /// spaces always average, since corner vertices may have been removed
    /// from the boundary).
    pub fn boundary_dof_normals(&self) -> Result<BTreeMap<usize, [f64; 2]>> {
        let mut sums: BTreeMap<usize, [f64; 2]> = BTreeMap::new();
        let mesh_normals = self.mesh.node_normals();
        for seg in &self.segments {
            let locs = self.element.edge_nodes(seg.local_edge);
            for (k, &loc) in locs.iter().enumerate() {
                let d = self.elem_dofs(seg.tri)[loc];
                let endpoint = k == 0 || k == locs.len() - 1;
                if endpoint && !self.periodic_x {
                    // Vertex dof: use the precomputed node normal.
                    let tv = self.mesh.triangles()[seg.tri];
                    let v = if k == 0 {
                        tv[seg.local_edge]
                    } else {
                        tv[(seg.local_edge + 1) % 3]
                    };
                    let n = mesh_normals.get(&v).ok_or_else(|| {
                        Error::MalformedBoundary(format!(
                            "node normal missing at boundary vertex {v}; call with_node_normals first"
                        ))
                    })?;
                    sums.insert(d, *n);
                } else {
                    let s = sums.entry(d).or_insert([0.0, 0.0]);
                    s[0] += seg.normal[0];
                    s[1] += seg.normal[1];
                }
            }
        }
        for n in sums.values_mut() {
            let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
            n[0] /= len;
            n[1] /= len;
        }
        Ok(sums)
    }

    /// Nodal interpolation of a scalar function.
    pub fn interpolate_scalar(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.dof_coords.iter().map(|p| f(p[0], p[1])).collect()
    }

    /// Nodal interpolation of a 2-vector function (blockwise layout).
    pub fn interpolate_vector(&self, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.ndofs];
        for (i, p) in self.dof_coords.iter().enumerate() {
            let v = f(p[0], p[1]);
            out[i] = v[0];
            out[self.ndofs + i] = v[1];
        }
        out
    }

    /// Locates the triangle containing a physical point and returns its
    /// reference coordinates. Points on shared edges resolve to the lowest
    /// triangle index.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, f64, f64)> {
        const TOL: f64 = 1e-10;
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let p0 = self.mesh.vertices()[tri[0]];
            let p1 = self.mesh.vertices()[tri[1]];
            let p2 = self.mesh.vertices()[tri[2]];
            let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            let xr = ((x - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (y - p0[1])) / det;
            let yr = ((p1[0] - p0[0]) * (y - p0[1]) - (x - p0[0]) * (p1[1] - p0[1])) / det;
            if xr >= -TOL && yr >= -TOL && xr + yr <= 1.0 + TOL {
                return Some((t, xr, yr));
            }
        }
        None
    }

    /// Evaluates a scalar coefficient vector at a physical point.
    pub fn eval_scalar(&self, coeffs: &[f64], x: f64, y: f64) -> Result<f64> {
        let (t, xr, yr) = self
            .locate(x, y)
            .ok_or(Error::PointOutsideMesh { x, y })?;
        let n = self.element.node_count();
        let mut phi = vec![0.0; n];
        self.element.eval_basis(xr, yr, &mut phi);
        Ok(self
            .elem_dofs(t)
            .iter()
            .zip(&phi)
            .map(|(&d, &p)| coeffs[d] * p)
            .sum())
    }

    /// Evaluates a vector coefficient vector at a physical point.
    pub fn eval_vector(&self, coeffs: &[f64], x: f64, y: f64) -> Result<[f64; 2]> {
        let (t, xr, yr) = self
            .locate(x, y)
            .ok_or(Error::PointOutsideMesh { x, y })?;
        let n = self.element.node_count();
        let mut phi = vec![0.0; n];
        self.element.eval_basis(xr, yr, &mut phi);
        let mut out = [0.0, 0.0];
        for (&d, &p) in self.elem_dofs(t).iter().zip(&phi) {
            out[0] += coeffs[d] * p;
            out[1] += coeffs[self.ndofs + d] * p;
        }
        Ok(out)
    }
}
