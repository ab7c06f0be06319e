//! Lid-driven cavity with a smoothed lid profile on a stretched mesh.

use crate::elements::{build_dof_map, FiniteElementSpace};
use crate::mesh::gen_stretched_square;
use crate::splitstep::{BcMode, FlowState, Integrator, ProblemData, SolverConfig};
use crate::{Error, Result};

/// Lid velocity profile: 1 over most of the lid, smoothly dropping toward
/// the corners (value ~0.269 at x=0 and x=1).
pub fn cavity_boundary_u0(x: f64) -> f64 {
    0.5 * (-(((x - 0.5).abs() - 0.495) / 0.01).tanh() + 1.0)
}

/// Cavity problem data: fluid at rest, moving lid on the top side.
#[derive(Debug, Clone, Copy)]
pub struct CavityProblem;

impl ProblemData for CavityProblem {
    fn initial_velocity(&self, _x: f64, _y: f64) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn boundary_velocity(&self, x: f64, y: f64, _t: f64) -> [f64; 2] {
        if y > 1.0 - 1e-9 {
            [cavity_boundary_u0(x), 0.0]
        } else {
            [0.0, 0.0]
        }
    }

    fn boundary_velocity_dt(&self, _x: f64, _y: f64, _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
}

#[derive(Debug, Clone)]
pub struct CavityConfig {
    /// Subdivisions per side of the stretched square.
    pub m: usize,
    /// Grading strength of the stretched mesh.
    pub beta: f64,
    pub order: usize,
    pub bc_mode: BcMode,
    pub nu: f64,
    /// Damping constant; alpha = cd / h_min^2.
    pub cd: f64,
    pub dt_safety: f64,
    pub t_final: f64,
}

impl CavityConfig {
    pub fn new(m: usize, bc_mode: BcMode) -> Self {
        CavityConfig {
            m,
            beta: 0.2604,
            order: 1,
            bc_mode,
            nu: 1.0 / 1000.0,
            cd: 1.0,
            dt_safety: 0.25,
            t_final: 50.0,
        }
    }
}

/// Centerline profiles, quasi-steadiness measure, and the final fields.
#[derive(Debug)]
pub struct CavityResult {
    pub space: FiniteElementSpace,
    pub state: FlowState,
    /// (y, u(0.5, y)) at the final time.
    pub u_centerline: Vec<(f64, f64)>,
    /// (x, v(x, 0.5)) at the final time.
    pub v_centerline: Vec<(f64, f64)>,
    /// u(0.5, y) profile ten time units before the end.
    pub u_centerline_earlier: Vec<(f64, f64)>,
    /// max |u_final - u_earlier| / max |u_final| over the u centerline.
    pub rel_change: f64,
    /// Minimum of u(0.5, y) and its location.
    pub min_u: f64,
    pub min_u_y: f64,
    pub dt: f64,
    pub alpha: f64,
}

const N_SAMPLES: usize = 401;

fn sample_u_centerline(space: &FiniteElementSpace, state: &FlowState) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(N_SAMPLES);
    for j in 0..N_SAMPLES {
        let y = j as f64 / (N_SAMPLES - 1) as f64;
        let v = space.eval_vector(&state.u_curr, 0.5, y)?;
        out.push((y, v[0]));
    }
    Ok(out)
}

fn sample_v_centerline(space: &FiniteElementSpace, state: &FlowState) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(N_SAMPLES);
    for j in 0..N_SAMPLES {
        let x = j as f64 / (N_SAMPLES - 1) as f64;
        let v = space.eval_vector(&state.u_curr, x, 0.5)?;
        out.push((x, v[1]));
    }
    Ok(out)
}

/// Runs the cavity to t_final, capturing the u(0.5, y) profile ten time
/// units before the end to measure how settled the flow is.
pub fn run_cavity(cfg: &CavityConfig) -> Result<CavityResult> {
    let mesh = gen_stretched_square(cfg.m, cfg.beta)?.with_node_normals()?;
    let space = build_dof_map(&mesh, cfg.order, 2)?;
    let solver = SolverConfig {
        rho: 1.0,
        mu: cfg.nu,
        cd: cfg.cd,
        bc_mode: cfg.bc_mode,
        dt_safety: cfg.dt_safety,
    };
    let (dt, _) = super::steps_to(&mesh, &solver, 1.0, cfg.t_final);
    let problem = CavityProblem;
    let mut integrator = Integrator::new(&space, solver, &problem, dt)?;
    let alpha = integrator.alpha();

    let state = integrator.initialize()?;
    let t_mid = (cfg.t_final - 10.0).max(0.0);
    let state = integrator.run(state, t_mid, usize::MAX, |_| {})?;
    let u_centerline_earlier = sample_u_centerline(&space, &state)?;
    let state = integrator.run(state, cfg.t_final, usize::MAX, |_| {})?;

    let u_centerline = sample_u_centerline(&space, &state)?;
    let v_centerline = sample_v_centerline(&space, &state)?;

    let scale = u_centerline
        .iter()
        .fold(0.0f64, |m, &(_, u)| m.max(u.abs()));
    if scale == 0.0 {
        return Err(Error::Domain("cavity flow never started".to_string()));
    }
    let rel_change = u_centerline
        .iter()
        .zip(&u_centerline_earlier)
        .fold(0.0f64, |m, (&(_, a), &(_, b))| m.max((a - b).abs()))
        / scale;

    let (min_u_y, min_u) = u_centerline
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();

    Ok(CavityResult {
        space,
        state,
        u_centerline,
        v_centerline,
        u_centerline_earlier,
        rel_change,
        min_u,
        min_u_y,
        dt,
        alpha,
    })
}
