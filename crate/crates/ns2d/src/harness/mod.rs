//! Benchmarks and measurement: convergence studies against exact solutions,
//! the lid-driven cavity and cylinder channel runs, functional series, and
//! file output.

pub mod cavity;
pub mod cylinder;
pub mod manufactured;
pub mod output;

pub use cavity::{cavity_boundary_u0, run_cavity, CavityConfig, CavityResult};
pub use cylinder::{
    cylinder_inflow, cylinder_mesh, drag_lift_dp, run_cylinder, CylinderConfig, CylinderResult,
};
pub use manufactured::{CaseId, ManufacturedCase, ManufacturedProblem};
pub use output::{read_csv, write_csv, write_vtk};

use crate::assembly::eval_divergence;
use crate::elements::{
    bilinear_quadrature_degree, build_dof_map, build_dof_map_periodic_x, make_quadrature,
    FiniteElementSpace,
};
use crate::mesh::gen_unit_square;
use crate::splitstep::{select_dt, BcMode, FlowState, Integrator, SolverConfig};
use crate::{Error, Result};

/// Time-stamped sequences of named functionals.
#[derive(Debug, Clone)]
pub struct FunctionalSeries {
    names: Vec<String>,
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl FunctionalSeries {
    pub fn new(names: &[&str]) -> Self {
        FunctionalSeries {
            names: names.iter().map(|s| s.to_string()).collect(),
            times: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Appends a sample; timestamps must be strictly increasing.
    pub fn push(&mut self, t: f64, values: &[f64]) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::invalid_argument(format!(
                "expected {} values, got {}",
                self.names.len(),
                values.len()
            )));
        }
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::invalid_argument(format!(
                    "timestamps must be strictly increasing ({t} after {last})"
                )));
            }
        }
        self.times.push(t);
        self.rows.push(values.to_vec());
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Maximum of a column over time.
    pub fn max_of(&self, name: &str) -> Option<f64> {
        self.column(name)?.into_iter().reduce(f64::max)
    }

    /// Last value of a column.
    pub fn last_of(&self, name: &str) -> Option<f64> {
        self.column(name)?.last().copied()
    }
}

/// (L-infinity, L2) pair of a discrete error function.
#[derive(Debug, Clone, Copy, Default)]
pub struct ErrorNorms {
    pub linf: f64,
    pub l2: f64,
}

/// Norms of E = |v_h - I_h v_e| where I_h is nodal interpolation: the max
/// over coefficients and the quadrature L2 norm of the interpolated error.
pub fn error_norms_scalar(
    space: &FiniteElementSpace,
    v_h: &[f64],
    exact: impl Fn(f64, f64) -> f64,
) -> Result<ErrorNorms> {
    let e: Vec<f64> = space
        .dof_coords()
        .iter()
        .zip(v_h)
        .map(|(p, &v)| (v - exact(p[0], p[1])).abs())
        .collect();
    coefficient_norms(space, &e)
}

/// Norms of an error coefficient vector already in hand.
pub fn coefficient_norms(space: &FiniteElementSpace, e: &[f64]) -> Result<ErrorNorms> {
    let linf = e.iter().fold(0.0, |m: f64, &v| m.max(v.abs()));
    let elem = space.element();
    let rule = make_quadrature(bilinear_quadrature_degree(space.order()))?;
    let n = elem.node_count();
    let mut phi = vec![0.0; n];
    let mut sq = 0.0;
    for t in 0..space.mesh().triangle_count() {
        let detj = 2.0 * space.mesh().signed_area(t);
        let dofs = space.elem_dofs(t);
        for (p, &w) in rule.points.iter().zip(&rule.weights) {
            elem.eval_basis(p[0], p[1], &mut phi);
            let val: f64 = dofs.iter().zip(&phi).map(|(&d, &f)| e[d] * f).sum();
            sq += w * detj * val * val;
        }
    }
    Ok(ErrorNorms {
        linf,
        l2: sq.sqrt(),
    })
}

/// Least-squares slope of log(error) against log(h).
pub fn fit_rate(hs: &[f64], errors: &[f64]) -> f64 {
    assert_eq!(hs.len(), errors.len());
    let pairs: Vec<(f64, f64)> = hs
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&h, &e)| (h.ln(), e.ln()))
        .collect();
    let n = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Boundary treatment of a convergence study on the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Dofs identified across x=0 / x=1; Dirichlet top and bottom.
    PeriodicX,
    /// Dirichlet data from the exact solution on all four sides.
    NoSlip,
}

/// Errors of one run at the final time.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunNorms {
    pub u: ErrorNorms,
    pub v: ErrorNorms,
    pub p: ErrorNorms,
    pub div: ErrorNorms,
}

/// One refinement level of a study; `norms` is None for a diverged run.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub m: usize,
    pub h: f64,
    pub dt: f64,
    pub norms: Option<RunNorms>,
    pub failure: Option<String>,
}

/// Full study outcome plus fitted rates over the successful rows.
#[derive(Debug, Clone)]
pub struct StudyResult {
    pub rows: Vec<StudyRow>,
}

/// Fitted convergence rates (log-log least squares).
#[derive(Debug, Clone, Copy, Default)]
pub struct RateTable {
    pub u_l2: f64,
    pub u_linf: f64,
    pub v_l2: f64,
    pub v_linf: f64,
    pub p_l2: f64,
    pub p_linf: f64,
    pub div_l2: f64,
}

impl StudyResult {
    /// Rates over the rows that completed; None with fewer than two.
    pub fn rates(&self) -> Option<RateTable> {
        let ok: Vec<(&StudyRow, &RunNorms)> = self
            .rows
            .iter()
            .filter_map(|r| r.norms.as_ref().map(|n| (r, n)))
            .collect();
        if ok.len() < 2 {
            return None;
        }
        let hs: Vec<f64> = ok.iter().map(|(r, _)| r.h).collect();
        let pick = |f: &dyn Fn(&RunNorms) -> f64| -> f64 {
            let es: Vec<f64> = ok.iter().map(|(_, n)| f(n)).collect();
            fit_rate(&hs, &es)
        };
        Some(RateTable {
            u_l2: pick(&|n| n.u.l2),
            u_linf: pick(&|n| n.u.linf),
            v_l2: pick(&|n| n.v.l2),
            v_linf: pick(&|n| n.v.linf),
            p_l2: pick(&|n| n.p.l2),
            p_linf: pick(&|n| n.p.linf),
            div_l2: pick(&|n| n.div.l2),
        })
    }

    pub fn to_series(&self) -> FunctionalSeries {
        let mut s = FunctionalSeries::new(&[
            "h", "u_linf", "u_l2", "v_linf", "v_l2", "p_linf", "p_l2", "div_linf", "div_l2",
        ]);
        for (k, row) in self.rows.iter().enumerate() {
            let n = row.norms.unwrap_or_default();
            // Use the row index as the "time" to keep timestamps increasing.
            let _ = s.push(
                k as f64,
                &[
                    row.h, n.u.linf, n.u.l2, n.v.linf, n.v.l2, n.p.linf, n.p.l2, n.div.linf,
                    n.div.l2,
                ],
            );
        }
        s
    }
}

/// Parameters of a manufactured-solution convergence study.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub case: ManufacturedCase,
    pub order: usize,
    /// Unit-square subdivisions, e.g. [10, 20, 40] for h = 1/10, 1/20, 1/40.
    pub meshes: Vec<usize>,
    pub boundary: BoundaryMode,
    pub rho: f64,
    pub mu: f64,
    pub dt_safety: f64,
    pub t_final: f64,
    /// Overrides the boundary treatment implied by the case id.
    pub bc_override: Option<BcMode>,
    /// Overrides the damping constant implied by the case id.
    pub cd_override: Option<f64>,
}

impl StudyConfig {
    pub fn new(case: ManufacturedCase, order: usize, meshes: Vec<usize>) -> Self {
        StudyConfig {
            case,
            order,
            meshes,
            boundary: BoundaryMode::NoSlip,
            rho: 1.0,
            mu: 0.1,
            dt_safety: 0.25,
            t_final: 0.1,
            bc_override: None,
            cd_override: None,
        }
    }
}

/// Runs one case of `study` on one mesh; returns the step size used and the
/// final-time norms.
pub fn run_manufactured_once(cfg: &StudyConfig, m: usize) -> Result<(f64, RunNorms)> {
    let mesh = gen_unit_square(m)?.with_node_normals()?;
    let space = match cfg.boundary {
        BoundaryMode::PeriodicX => build_dof_map_periodic_x(&mesh, cfg.order, 2)?,
        BoundaryMode::NoSlip => build_dof_map(&mesh, cfg.order, 2)?,
    };
    let problem = ManufacturedProblem {
        case: cfg.case,
        rho: cfg.rho,
        mu: cfg.mu,
    };
    let solver = SolverConfig {
        rho: cfg.rho,
        mu: cfg.mu,
        cd: cfg.cd_override.unwrap_or_else(|| cfg.case.cd()),
        bc_mode: cfg.bc_override.unwrap_or_else(|| cfg.case.bc_mode()),
        dt_safety: cfg.dt_safety,
    };
    // Land exactly on t_final with a uniform step no larger than the bound.
    let dt0 = select_dt(&mesh, &solver, cfg.case.a);
    let n_steps = (cfg.t_final / dt0).ceil().max(1.0) as usize;
    let dt = cfg.t_final / n_steps as f64;

    let mut integrator = Integrator::new(&space, solver, &problem, dt)?;
    let state = integrator.initialize()?;
    let state = integrator.run(state, cfg.t_final, usize::MAX, |_| {})?;
    let norms = measure_state(&space, &state, &cfg.case, cfg.t_final)?;
    Ok((dt, norms))
}

/// Norms of a finished state against the exact fields at time t.
pub fn measure_state(
    space: &FiniteElementSpace,
    state: &FlowState,
    case: &ManufacturedCase,
    t: f64,
) -> Result<RunNorms> {
    let nd = space.ndofs();
    let u = error_norms_scalar(space, &state.u_curr[..nd], |x, y| {
        case.exact_velocity(x, y, t)[0]
    })?;
    let v = error_norms_scalar(space, &state.u_curr[nd..], |x, y| {
        case.exact_velocity(x, y, t)[1]
    })?;
    // The computed pressure is normalized to zero weighted mean; align the
    // exact interpolant the same way before comparing.
    let p_e = space.interpolate_scalar(|x, y| case.exact_pressure(x, y, t));
    let diff: Vec<f64> = state
        .p_curr
        .iter()
        .zip(&p_e)
        .map(|(a, b)| a - b)
        .collect();
    let (shift, area) = weighted_mean(space, &diff)?;
    let e_p: Vec<f64> = diff.iter().map(|d| (d - shift / area).abs()).collect();
    let p = coefficient_norms(space, &e_p)?;
    let (div_linf, div_l2) = eval_divergence(space, &state.u_curr)?;
    Ok(RunNorms {
        u,
        v,
        p,
        div: ErrorNorms {
            linf: div_linf,
            l2: div_l2,
        },
    })
}

/// Returns (integral of the interpolant, domain area).
fn weighted_mean(space: &FiniteElementSpace, coeffs: &[f64]) -> Result<(f64, f64)> {
    let elem = space.element();
    let rule = make_quadrature(bilinear_quadrature_degree(space.order()))?;
    let n = elem.node_count();
    let mut phi = vec![0.0; n];
    let mut int = 0.0;
    let mut area = 0.0;
    for t in 0..space.mesh().triangle_count() {
        let detj = 2.0 * space.mesh().signed_area(t);
        let dofs = space.elem_dofs(t);
        for (p, &w) in rule.points.iter().zip(&rule.weights) {
            elem.eval_basis(p[0], p[1], &mut phi);
            let val: f64 = dofs.iter().zip(&phi).map(|(&d, &f)| coeffs[d] * f).sum();
            int += w * detj * val;
            area += w * detj;
        }
    }
    Ok((int, area))
}

/// Runs the whole refinement sequence; diverged runs are recorded, not fatal.
pub fn convergence_study(cfg: &StudyConfig) -> Result<StudyResult> {
    if cfg.meshes.len() < 2 {
        return Err(Error::invalid_argument(
            "a convergence study needs at least two meshes".to_string(),
        ));
    }
    let mut rows = Vec::new();
    for &m in &cfg.meshes {
        let h = 1.0 / m as f64;
        match run_manufactured_once(cfg, m) {
            Ok((dt, norms)) => rows.push(StudyRow {
                m,
                h,
                dt,
                norms: Some(norms),
                failure: None,
            }),
            Err(e @ Error::NanDetected { .. }) => rows.push(StudyRow {
                m,
                h,
                dt: 0.0,
                norms: None,
                failure: Some(e.to_string()),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(StudyResult { rows })
}

/// Helper shared by the cavity and cylinder drivers: pick a step size from
/// the stability bound, shrunk so an integer number of steps reaches t_final.
pub(crate) fn steps_to(
    mesh: &crate::mesh::Mesh,
    solver: &SolverConfig,
    u_max: f64,
    t_final: f64,
) -> (f64, usize) {
    let dt0 = select_dt(mesh, solver, u_max);
    let n = (t_final / dt0).ceil().max(1.0) as usize;
    (t_final / n as f64, n)
}

/// Convenience constructor used by drivers and the CLI.
pub fn solver_config(rho: f64, mu: f64, cd: f64, bc: BcMode, dt_safety: f64) -> SolverConfig {
    SolverConfig {
        rho,
        mu,
        cd,
        bc_mode: bc,
        dt_safety,
    }
}
