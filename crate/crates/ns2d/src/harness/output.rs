//! CSV and legacy ASCII VTK writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::FunctionalSeries;
use crate::elements::FiniteElementSpace;
use crate::splitstep::FlowState;
use crate::{Error, Result};

/// Writes a functional series as CSV with a header row (CRLF line ends).
pub fn write_csv(series: &FunctionalSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push('t');
    for name in series.names() {
        out.push(',');
        out.push_str(name);
    }
    out.push_str("\r\n");
    for (t, row) in series.times().iter().zip(series.rows()) {
        let _ = write!(out, "{t}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push_str("\r\n");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads back a CSV written by [`write_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<FunctionalSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty csv".to_string(),
    })?;
    let mut cols = header.split(',');
    if cols.next() != Some("t") {
        return Err(Error::Parse {
            line: 1,
            msg: "expected a leading t column".to_string(),
        });
    }
    let names: Vec<&str> = cols.collect();
    let mut series = FunctionalSeries::new(&names);
    for (k, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut vals = line.split(',').map(|s| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line: k + 1,
                msg: format!("bad number {s:?}: {e}"),
            })
        });
        let t = vals.next().ok_or(Error::Parse {
            line: k + 1,
            msg: "empty row".to_string(),
        })??;
        let row: Vec<f64> = vals.collect::<Result<_>>()?;
        series.push(t, &row)?;
    }
    Ok(series)
}

/// Per-dof vorticity and divergence, averaged over the elements sharing
/// each dof.
fn derived_fields(space: &FiniteElementSpace, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let elem = space.element();
    let nd = space.ndofs();
    let n = elem.node_count();
    let mesh = space.mesh();
    let mut vort = vec![0.0; nd];
    let mut div = vec![0.0; nd];
    let mut count = vec![0usize; nd];
    let mut gref = vec![[0.0; 2]; n];
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let p0 = mesh.vertices()[tri[0]];
        let p1 = mesh.vertices()[tri[1]];
        let p2 = mesh.vertices()[tri[2]];
        let j = [
            [p1[0] - p0[0], p2[0] - p0[0]],
            [p1[1] - p0[1], p2[1] - p0[1]],
        ];
        let detj = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let invjt = [
            [j[1][1] / detj, -j[1][0] / detj],
            [-j[0][1] / detj, j[0][0] / detj],
        ];
        let dofs = space.elem_dofs(t);
        for (loc, node) in elem.nodes().iter().enumerate() {
            elem.eval_grad(node[0], node[1], &mut gref);
            let mut g = [[0.0; 2]; 2];
            for (k, &d) in dofs.iter().enumerate() {
                let gp = [
                    invjt[0][0] * gref[k][0] + invjt[0][1] * gref[k][1],
                    invjt[1][0] * gref[k][0] + invjt[1][1] * gref[k][1],
                ];
                g[0][0] += u[d] * gp[0];
                g[0][1] += u[d] * gp[1];
                g[1][0] += u[nd + d] * gp[0];
                g[1][1] += u[nd + d] * gp[1];
            }
            let d = dofs[loc];
            vort[d] += g[1][0] - g[0][1];
            div[d] += g[0][0] + g[1][1];
            count[d] += 1;
        }
    }
    for d in 0..nd {
        if count[d] > 0 {
            vort[d] /= count[d] as f64;
            div[d] /= count[d] as f64;
        }
    }
    (vort, div)
}

/// Writes the state as a legacy ASCII VTK unstructured grid. Points are all
/// scalar dofs; cells are the linear triangles, referencing the three vertex
/// dofs of each element. Point data: u, v, p, vorticity, divergence.
pub fn write_vtk(space: &FiniteElementSpace, state: &FlowState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let nd = space.ndofs();
    let ntri = space.mesh().triangle_count();
    let (vort, div) = derived_fields(space, &state.u_curr);

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "incompressible flow state at t = {}", state.t);
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {nd} double");
    for p in space.dof_coords() {
        let _ = writeln!(out, "{} {} 0", p[0], p[1]);
    }
    let _ = writeln!(out, "CELLS {ntri} {}", 4 * ntri);
    for t in 0..ntri {
        let dofs = space.elem_dofs(t);
        let _ = writeln!(out, "3 {} {} {}", dofs[0], dofs[1], dofs[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {ntri}");
    for _ in 0..ntri {
        out.push_str("5\n");
    }
    let _ = writeln!(out, "POINT_DATA {nd}");
    let scalars = |name: &str, vals: &dyn Fn(usize) -> f64, out: &mut String| {
        let _ = writeln!(out, "SCALARS {name} double 1");
        out.push_str("LOOKUP_TABLE default\n");
        for d in 0..nd {
            let _ = writeln!(out, "{}", vals(d));
        }
    };
    scalars("u", &|d| state.u_curr[d], &mut out);
    scalars("v", &|d| state.u_curr[nd + d], &mut out);
    scalars("p", &|d| state.p_curr[d], &mut out);
    scalars("vorticity", &|d| vort[d], &mut out);
    scalars("divergence", &|d| div[d], &mut out);

    fs::write(path, out).map_err(|e| Error::io(path, e))
}
