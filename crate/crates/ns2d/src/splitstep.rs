//! Split-step time integrator: second-order Adams-Bashforth predictor,
//! modified Adams-Moulton corrector, and a pressure Poisson solve after each
//! velocity update (four stages per step).

use std::collections::BTreeMap;

use crate::assembly::{
    assemble_mass, assemble_ppe_rhs, assemble_stiffness, assemble_tn_boundary, assemble_wabe_rows,
    apply_momentum_rhs, mass_row_sums, DirichletOp,
};
use crate::elements::FiniteElementSpace;
use crate::linsolve::{dot, BandedLu, CooMatrix, CsrMatrix};
use crate::mesh::Mesh;
use crate::{Error, Result};

/// Pressure boundary treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcMode {
    /// Curl-curl Neumann condition imposed as a natural boundary functional.
    Tn,
    /// Replacement pressure rows from node-normal-projected momentum
    /// equations tested with boundary basis functions.
    Wabe,
}

/// Physical and numerical parameters of a run. The divergence damping
/// coefficient is alpha = cd / h_min^2.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub rho: f64,
    pub mu: f64,
    pub cd: f64,
    pub bc_mode: BcMode,
    pub dt_safety: f64,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rho <= 0.0 || self.mu < 0.0 || self.cd < 0.0 || self.dt_safety <= 0.0 {
            return Err(Error::invalid_argument(
                "require rho > 0, mu >= 0, cd >= 0, dt_safety > 0".to_string(),
            ));
        }
        Ok(())
    }
}

/// Problem data supplied as closed-form callables.
pub trait ProblemData {
    fn initial_velocity(&self, x: f64, y: f64) -> [f64; 2];
    fn boundary_velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2];
    /// Time derivative of the boundary velocity; default central difference.
    fn boundary_velocity_dt(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let eps = 1e-6;
        let a = self.boundary_velocity(x, y, t + eps);
        let b = self.boundary_velocity(x, y, t - eps);
        [(a[0] - b[0]) / (2.0 * eps), (a[1] - b[1]) / (2.0 * eps)]
    }
    fn forcing(&self, _x: f64, _y: f64, _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn div_forcing(&self, _x: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }
}

/// Discrete solution at one time level plus the previous velocity.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    pub p_curr: Vec<f64>,
    pub t: f64,
    pub step_index: usize,
}

/// Fixed step size from the diffusive, convective and damping stability
/// bounds: dt = min(safety * rho h^2 / (4 mu), safety * h / u_max,
/// 0.8 * 2 h^2 / cd). The last term reflects that divergence damping makes
/// the divergence decay at rate alpha = cd / h^2, and the explicit
/// predictor-corrector is stable on the negative real axis only down to -2.
/// The damping mode carries no solution content -- it only needs to decay --
/// so it gets a fixed 0.8 margin rather than the accuracy-driven safety
/// factor.
pub fn select_dt(mesh: &Mesh, config: &SolverConfig, u_max_estimate: f64) -> f64 {
    let h = mesh.min_edge_length();
    let conv = h / u_max_estimate.max(1e-12);
    let diff = if config.mu > 0.0 {
        config.rho * h * h / (4.0 * config.mu)
    } else {
        f64::INFINITY
    };
    let damp = if config.cd > 0.0 {
        0.8 * 2.0 * h * h / config.cd
    } else {
        f64::INFINITY
    };
    (config.dt_safety * conv.min(diff)).min(damp)
}

/// Copy of `a` with row `pin` replaced by `diag * e_pin^T`, plus the
/// original contents of that row.
fn pin_row(a: &CsrMatrix, pin: usize, diag: f64) -> (CsrMatrix, (Vec<usize>, Vec<f64>)) {
    let n = a.nrows();
    let mut coo = CooMatrix::new(n, a.ncols());
    for r in 0..n {
        if r == pin {
            coo.push(r, pin, diag);
            continue;
        }
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            coo.push(r, c, v);
        }
    }
    let (cols, vals) = a.row(pin);
    (coo.to_csr(), (cols.to_vec(), vals.to_vec()))
}

enum PressureSolver {
    /// Mean-constrained Neumann Laplacian: lambda recovered from the
    /// compatibility condition, then a direct solve of the pinned (and
    /// therefore nonsingular) stiffness system.
    Tn,
    /// Replacement boundary rows with a mean-constraint multiplier,
    /// eliminated through the pinned factorization (see `solve_pinned`).
    Wabe {
        blu: BandedLu,
        /// Solution of the pinned system for minus the multiplier column.
        y1: Vec<f64>,
        /// The original matrix row that was overwritten by the pin.
        pin_row: (Vec<usize>, Vec<f64>),
        pin: usize,
        /// Multiplier column (zero on the replacement rows).
        col: Vec<f64>,
        normals: BTreeMap<usize, [f64; 2]>,
    },
}

/// One integrator instance advances one [`FlowState`] over one space. The
/// constant operators (mass with Dirichlet rows, pinned pressure Laplacian,
/// replacement-row pressure system) are factored once up front.
pub struct Integrator<'a> {
    space: &'a FiniteElementSpace,
    data: &'a dyn ProblemData,
    config: SolverConfig,
    dt: f64,
    alpha: f64,
    mass: CsrMatrix,
    mass_lu: BandedLu,
    dir_op: DirichletOp,
    bdofs: Vec<usize>,
    /// Stiffness with row `pin` replaced by an identity row; any solution of
    /// the consistent singular Neumann system with that dof set to zero.
    stiff_lu: BandedLu,
    ones_load: Vec<f64>,
    area: f64,
    pressure: PressureSolver,
    /// Momentum residual at the previous time level (AB2 history).
    r_prev: Vec<f64>,
}

impl<'a> Integrator<'a> {
    pub fn new(
        space: &'a FiniteElementSpace,
        config: SolverConfig,
        data: &'a dyn ProblemData,
        dt: f64,
    ) -> Result<Self> {
        config.validate()?;
        if dt <= 0.0 {
            return Err(Error::invalid_argument("dt must be positive".to_string()));
        }
        let h_min = space.mesh().min_edge_length();
        let alpha = config.cd / (h_min * h_min);

        let nd = space.ndofs();
        let mass = assemble_mass(space)?;
        let stiffness = assemble_stiffness(space)?;
        let ones_load = mass_row_sums(&mass);
        let area: f64 = ones_load.iter().sum();
        let bdofs = space.all_boundary_dofs();
        let mut mass_dir = mass.clone();
        let dir_op = DirichletOp::new(&mut mass_dir, &bdofs, true);
        let mass_lu = BandedLu::new(&mass_dir)?;

        // Pin dof 0: the Neumann stiffness system is singular with a
        // constant nullspace, and its right-hand sides are constructed
        // compatible, so fixing one value picks a particular solution.
        let stiff_lu = BandedLu::new(&pin_row(&stiffness, 0, 1.0).0)?;

        let pressure = match config.bc_mode {
            BcMode::Tn => PressureSolver::Tn,
            BcMode::Wabe => {
                let normals = space.boundary_dof_normals()?;
                let zero = vec![0.0; 2 * nd];
                let rows = assemble_wabe_rows(
                    space,
                    &normals,
                    &zero,
                    &zero,
                    1.0,
                    config.rho,
                    config.mu,
                    &|_, _| [0.0, 0.0],
                )?;
                let mut is_b = vec![false; nd];
                for r in &rows {
                    is_b[r.dof] = true;
                }
                let mut coo = CooMatrix::new(nd, nd);
                for r in 0..nd {
                    if is_b[r] {
                        continue;
                    }
                    let (cols, vals) = stiffness.row(r);
                    for (&c, &v) in cols.iter().zip(vals) {
                        coo.push(r, c, -v);
                    }
                }
                for row in &rows {
                    for (&c, &v) in row.cols.iter().zip(&row.coeffs) {
                        coo.push(row.dof, c, v);
                    }
                }
                let b = coo.to_csr();
                // Pin an interior (non-replacement) dof; the multiplier
                // column vanishes on the replacement rows.
                let pin = (0..nd)
                    .find(|&d| !is_b[d])
                    .ok_or_else(|| Error::InvalidSystem("no interior dof to pin".into()))?;
                let (b_pinned, pin_row) = pin_row(&b, pin, 1.0);
                let blu = BandedLu::new(&b_pinned)?;
                let col: Vec<f64> = ones_load
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if is_b[i] { 0.0 } else { v })
                    .collect();
                let mut y1: Vec<f64> = col.iter().map(|&v| -v).collect();
                y1[pin] = 0.0;
                blu.solve(&mut y1);
                PressureSolver::Wabe {
                    blu,
                    y1,
                    pin_row,
                    pin,
                    col,
                    normals,
                }
            }
        };

        Ok(Integrator {
            space,
            data,
            config,
            dt,
            alpha,
            mass,
            mass_lu,
            dir_op,
            bdofs,
            stiff_lu,
            ones_load,
            area,
            pressure,
            r_prev: vec![0.0; 2 * nd],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn space(&self) -> &FiniteElementSpace {
        self.space
    }

    fn boundary_values(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let coords = self.space.dof_coords();
        let mut gx = Vec::with_capacity(self.bdofs.len());
        let mut gy = Vec::with_capacity(self.bdofs.len());
        for &d in &self.bdofs {
            let g = self.data.boundary_velocity(coords[d][0], coords[d][1], t);
            gx.push(g[0]);
            gy.push(g[1]);
        }
        (gx, gy)
    }

    fn momentum_residual(&self, u: &[f64], p: &[f64], t: f64) -> Result<Vec<f64>> {
        apply_momentum_rhs(
            self.space,
            u,
            p,
            self.config.rho,
            self.config.mu,
            &|x, y| self.data.forcing(x, y, t),
        )
    }

    /// Solves M u_new = M u_base + (dt_eff / rho) r with Dirichlet data at
    /// time `t_bc`.
    fn velocity_solve(
        &self,
        u_base: &[f64],
        r: &[f64],
        dt_eff: f64,
        t_bc: f64,
    ) -> Result<Vec<f64>> {
        let nd = self.space.ndofs();
        let (gx, gy) = self.boundary_values(t_bc);
        let mut out = vec![0.0; 2 * nd];
        {
            let (rx, ry) = out.split_at_mut(nd);
            for (c, (rhs, gvals)) in [(0usize, (&mut *rx, &gx)), (1, (&mut *ry, &gy))] {
                let block = &u_base[c * nd..(c + 1) * nd];
                self.mass.mul_vec(block, rhs);
                for i in 0..nd {
                    rhs[i] += dt_eff / self.config.rho * r[c * nd + i];
                }
                self.dir_op.apply_rhs(rhs, gvals);
            }
            self.mass_lu.solve2(rx, ry);
        }
        // Enforce the boundary data exactly.
        for (k, &d) in self.bdofs.iter().enumerate() {
            out[d] = gx[k];
            out[nd + d] = gy[k];
        }
        Ok(out)
    }

    /// Stage II / Stage IV pressure solve from a velocity field. `u_old` and
    /// `dt` feed the discrete du/dt of the replacement boundary rows.
    fn pressure_solve(&mut self, u: &[f64], u_old: &[f64], dt: f64, t: f64) -> Result<Vec<f64>> {
        let nd = self.space.ndofs();
        let rho = self.config.rho;
        let mu = self.config.mu;
        let interior = assemble_ppe_rhs(self.space, u, rho, self.alpha, &|x, y| {
            self.data.div_forcing(x, y, t)
        })?;
        let mut p = match &self.pressure {
            PressureSolver::Tn => {
                let tn = assemble_tn_boundary(
                    self.space,
                    u,
                    rho,
                    mu,
                    &|x, y| self.data.boundary_velocity(x, y, t),
                    &|x, y| self.data.boundary_velocity_dt(x, y, t),
                    &|x, y| self.data.forcing(x, y, t),
                )?;
                self.solve_neumann(&interior, &tn)
            }
            PressureSolver::Wabe {
                blu,
                y1,
                pin_row,
                pin,
                col,
                normals,
            } => {
                let rows = assemble_wabe_rows(
                    self.space,
                    normals,
                    u,
                    u_old,
                    dt,
                    rho,
                    mu,
                    &|x, y| self.data.forcing(x, y, t),
                )?;
                let mut f = interior;
                for row in &rows {
                    f[row.dof] = row.rhs;
                }
                // Solve B p + lambda col = f with mean(p) = 0 through the
                // pinned factorization: B annihilates constants, so the
                // general solution of the unpinned rows is
                // y0 + lambda*y1 + gamma*1, with lambda fixed by the pinned
                // row and gamma by the mean constraint.
                let f_pin = f[*pin];
                let mut y0 = f;
                y0[*pin] = 0.0;
                blu.solve(&mut y0);
                let row_dot = |v: &[f64]| -> f64 {
                    pin_row
                        .0
                        .iter()
                        .zip(&pin_row.1)
                        .map(|(&c, &a)| a * v[c])
                        .sum()
                };
                let lambda = (f_pin - row_dot(&y0)) / (row_dot(y1) + col[*pin]);
                for i in 0..nd {
                    y0[i] += lambda * y1[i];
                }
                y0
            }
        };
        // Project onto zero mean.
        let mean = dot(&self.ones_load, &p) / self.area;
        for v in &mut p {
            *v -= mean;
        }
        Ok(p)
    }

    /// Direct solve of the mean-constrained Neumann pressure system
    /// -K p + lambda (1, q) = f with f = interior - boundary: summing all
    /// rows fixes lambda, then K p = lambda (1, q) - f is consistent and the
    /// pinned factorization picks the solution with p[0] = 0; the caller
    /// shifts to zero mean.
    fn solve_neumann(&self, interior: &[f64], boundary: &[f64]) -> Vec<f64> {
        let f: Vec<f64> = interior.iter().zip(boundary).map(|(a, b)| a - b).collect();
        let lambda = f.iter().sum::<f64>() / self.area;
        let mut rhs: Vec<f64> = self
            .ones_load
            .iter()
            .zip(&f)
            .map(|(b, fi)| lambda * b - fi)
            .collect();
        rhs[0] = 0.0;
        self.stiff_lu.solve(&mut rhs);
        rhs
    }

    /// Builds the initial state: interpolated initial velocity with boundary
    /// override, an initial pressure solve, and one predictor-corrector
    /// substep backward in time to seed the multistep history.
    pub fn initialize(&mut self) -> Result<FlowState> {
        let nd = self.space.ndofs();
        let mut u0 = self
            .space
            .interpolate_vector(|x, y| self.data.initial_velocity(x, y));
        let coords = self.space.dof_coords();
        for &d in &self.bdofs {
            let g = self.data.boundary_velocity(coords[d][0], coords[d][1], 0.0);
            u0[d] = g[0];
            u0[nd + d] = g[1];
        }
        let p0 = self
            .startup_pressure(&u0, 0.0)
            .map_err(|e| e.in_stage("startup pressure"))?;

        // One Euler predictor + trapezoidal corrector step to t = -dt.
        let dt = self.dt;
        let r0 = self.momentum_residual(&u0, &p0, 0.0)?;
        let up = self
            .velocity_solve(&u0, &r0, -dt, -dt)
            .map_err(|e| e.in_stage("startup predictor"))?;
        let pp = self.startup_pressure(&up, -dt)?;
        let rp = self.momentum_residual(&up, &pp, -dt)?;
        let mut r_avg = vec![0.0; 2 * nd];
        for i in 0..2 * nd {
            r_avg[i] = 0.5 * (r0[i] + rp[i]);
        }
        let um = self
            .velocity_solve(&u0, &r_avg, -dt, -dt)
            .map_err(|e| e.in_stage("startup corrector"))?;
        let pm = self.startup_pressure(&um, -dt)?;
        self.r_prev = self.momentum_residual(&um, &pm, -dt)?;

        Ok(FlowState {
            u_prev: um,
            u_curr: u0,
            p_curr: p0,
            t: 0.0,
            step_index: 0,
        })
    }

    /// Pressure from the curl-curl Neumann machinery regardless of bc_mode:
    /// the replacement-row condition needs a du/dt history that does not
    /// exist yet at startup.
    fn startup_pressure(&self, u: &[f64], t: f64) -> Result<Vec<f64>> {
        let rho = self.config.rho;
        let mu = self.config.mu;
        let interior = assemble_ppe_rhs(self.space, u, rho, self.alpha, &|x, y| {
            self.data.div_forcing(x, y, t)
        })?;
        let tn = assemble_tn_boundary(
            self.space,
            u,
            rho,
            mu,
            &|x, y| self.data.boundary_velocity(x, y, t),
            &|x, y| self.data.boundary_velocity_dt(x, y, t),
            &|x, y| self.data.forcing(x, y, t),
        )?;
        let mut p = self.solve_neumann(&interior, &tn);
        let mean = dot(&self.ones_load, &p) / self.area;
        for v in &mut p {
            *v -= mean;
        }
        Ok(p)
    }

    /// Advances one step of size dt through the four stages.
    pub fn step(&mut self, state: &FlowState) -> Result<FlowState> {
        let dt = self.dt;
        let t_n = state.t;
        let t_new = t_n + dt;

        let r_n = self
            .momentum_residual(&state.u_curr, &state.p_curr, t_n)
            .map_err(|e| e.in_stage("stage I"))?;

        // Stage I: AB2 predictor.
        let n2 = r_n.len();
        let mut r_ab2 = vec![0.0; n2];
        for i in 0..n2 {
            r_ab2[i] = 1.5 * r_n[i] - 0.5 * self.r_prev[i];
        }
        let u_p = self
            .velocity_solve(&state.u_curr, &r_ab2, dt, t_new)
            .map_err(|e| e.in_stage("stage I"))?;

        // Stage II: predicted pressure.
        let p_p = self
            .pressure_solve(&u_p, &state.u_curr, dt, t_new)
            .map_err(|e| e.in_stage("stage II"))?;

        // Stage III: modified AM2 corrector.
        let r_p = self
            .momentum_residual(&u_p, &p_p, t_new)
            .map_err(|e| e.in_stage("stage III"))?;
        let mut r_am2 = vec![0.0; n2];
        for i in 0..n2 {
            r_am2[i] = 0.5 * (r_n[i] + r_p[i]);
        }
        let u_new = self
            .velocity_solve(&state.u_curr, &r_am2, dt, t_new)
            .map_err(|e| e.in_stage("stage III"))?;

        // Stage IV: corrected pressure.
        let p_new = self
            .pressure_solve(&u_new, &state.u_curr, dt, t_new)
            .map_err(|e| e.in_stage("stage IV"))?;

        self.r_prev = r_n;
        Ok(FlowState {
            u_prev: state.u_curr.clone(),
            u_curr: u_new,
            p_curr: p_new,
            t: t_new,
            step_index: state.step_index + 1,
        })
    }

    /// Fixed-dt loop to t_final with an observer invoked every `stride`
    /// steps (and on the final step). Aborts on non-finite values.
    pub fn run(
        &mut self,
        state: FlowState,
        t_final: f64,
        stride: usize,
        mut observer: impl FnMut(&FlowState),
    ) -> Result<FlowState> {
        if t_final < state.t {
            return Err(Error::invalid_argument(
                "t_final must not precede the current time".to_string(),
            ));
        }
        let n_steps = ((t_final - state.t) / self.dt).round() as usize;
        let stride = stride.max(1);
        let mut s = state;
        for k in 0..n_steps {
            s = self.step(&s)?;
            if !s.u_curr.iter().chain(&s.p_curr).all(|v| v.is_finite()) {
                return Err(Error::NanDetected { step: s.step_index });
            }
            if (k + 1) % stride == 0 || k + 1 == n_steps {
                observer(&s);
            }
        }
        Ok(s)
    }
}
