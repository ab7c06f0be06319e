//! Line-oriented text format for meshes.
//!
//! ```text
//! mesh 2d triangle
//! vertices N
//! x y            (N lines)
//! triangles T
//! i j k          (T lines, 0-based)
//! boundary_edges B
//! i j tag        (B lines)
//! ```
//!
//! `#` starts a comment; blank lines are ignored.

use std::fs;
use std::path::Path;

use super::{BoundaryEdge, Mesh};
use crate::{Error, Result};

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_mesh(mesh)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_mesh(&text)
}

pub fn format_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("mesh 2d triangle\n");
    out.push_str(&format!("vertices {}\n", mesh.vertex_count()));
    for v in mesh.vertices() {
        out.push_str(&format!("{} {}\n", v[0], v[1]));
    }
    out.push_str(&format!("triangles {}\n", mesh.triangle_count()));
    for t in mesh.triangles() {
        out.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
    }
    out.push_str(&format!("boundary_edges {}\n", mesh.boundary_edges().len()));
    for be in mesh.boundary_edges() {
        out.push_str(&format!("{} {} {}\n", be.vertices[0], be.vertices[1], be.tag));
    }
    out
}

pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut next = |what: &str| -> Result<(usize, &str)> {
        lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("unexpected end of file, expected {what}"),
        })
    };

    let (line, header) = next("header")?;
    if header != "mesh 2d triangle" {
        return Err(Error::Parse {
            line,
            msg: format!("expected header 'mesh 2d triangle', got '{header}'"),
        });
    }

    fn section_count(line: usize, text: &str, keyword: &str) -> Result<usize> {
        let mut parts = text.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(n), None) if k == keyword => n.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid count '{n}'"),
            }),
            _ => Err(Error::Parse {
                line,
                msg: format!("expected '{keyword} N', got '{text}'"),
            }),
        }
    }

    let (line, l) = next("vertices")?;
    let nv = section_count(line, l, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = next("vertex coordinates")?;
        let nums: Vec<f64> = l
            .split_whitespace()
            .map(|s| s.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line,
                msg: format!("invalid vertex line '{l}'"),
            })?;
        if nums.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 2 coordinates, got {}", nums.len()),
            });
        }
        vertices.push([nums[0], nums[1]]);
    }

    let (line, l) = next("triangles")?;
    let nt = section_count(line, l, "triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, l) = next("triangle indices")?;
        let nums: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line,
                msg: format!("invalid triangle line '{l}'"),
            })?;
        if nums.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 indices, got {}", nums.len()),
            });
        }
        triangles.push([nums[0], nums[1], nums[2]]);
    }

    let (line, l) = next("boundary_edges")?;
    let nb = section_count(line, l, "boundary_edges")?;
    let mut boundary_edges = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (line, l) = next("boundary edge")?;
        let nums: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line,
                msg: format!("invalid boundary edge line '{l}'"),
            })?;
        if nums.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 'i j tag', got '{l}'"),
            });
        }
        boundary_edges.push(BoundaryEdge {
            vertices: [nums[0], nums[1]],
            tag: nums[2] as u32,
        });
    }

    Mesh::new(vertices, triangles, boundary_edges)
}
