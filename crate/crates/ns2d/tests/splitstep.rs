//! Time integrator behavior that does not depend on convergence studies:
//! step-size selection, fixed points, boundary handling, and determinism.

use ns2d::assembly::{assemble_mass, mass_row_sums};
use ns2d::elements::build_dof_map;
use ns2d::harness::{CaseId, ManufacturedCase, ManufacturedProblem};
use ns2d::linsolve::dot;
use ns2d::mesh::gen_unit_square;
use ns2d::splitstep::{select_dt, BcMode, Integrator, ProblemData, SolverConfig};

struct RestingFluid;

impl ProblemData for RestingFluid {
    fn initial_velocity(&self, _x: f64, _y: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn boundary_velocity(&self, _x: f64, _y: f64, _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
}

fn config(mu: f64, cd: f64, bc_mode: BcMode) -> SolverConfig {
    SolverConfig {
        rho: 1.0,
        mu,
        cd,
        bc_mode,
        dt_safety: 0.25,
    }
}

#[test]
fn step_size_bounds() {
    let mesh = gen_unit_square(10).unwrap(); // h = 0.1
    // Diffusive bound: 0.25 * h^2 / 4 = 0.000625.
    let dt = select_dt(&mesh, &config(1.0, 0.0, BcMode::Tn), 1.0);
    assert!((dt - 0.000625).abs() < 1e-15);
    // Inviscid: convective bound 0.25 * h / u_max.
    let dt = select_dt(&mesh, &config(0.0, 0.0, BcMode::Tn), 1.0);
    assert!((dt - 0.025).abs() < 1e-15);
    let dt = select_dt(&mesh, &config(0.0, 0.0, BcMode::Tn), 4.0);
    assert!((dt - 0.00625).abs() < 1e-15);
    // Strong damping: 0.8 * 2 h^2 / cd with a fixed margin, not dt_safety.
    let dt = select_dt(&mesh, &config(1.0, 100.0, BcMode::Tn), 1.0);
    assert!((dt - 1.6e-4).abs() < 1e-15);
    // The diffusive bound scales like h^2.
    let fine = gen_unit_square(20).unwrap();
    let dt_fine = select_dt(&fine, &config(1.0, 0.0, BcMode::Tn), 1.0);
    assert!((dt_fine - 0.000625 / 4.0).abs() < 1e-15);
}

#[test]
fn config_validation() {
    assert!(config(0.1, 0.0, BcMode::Tn).validate().is_ok());
    let mut c = config(0.1, 0.0, BcMode::Tn);
    c.rho = 0.0;
    assert!(c.validate().is_err());
    let mut c = config(0.1, 0.0, BcMode::Tn);
    c.mu = -1.0;
    assert!(c.validate().is_err());
    let mut c = config(0.1, 0.0, BcMode::Tn);
    c.cd = -0.5;
    assert!(c.validate().is_err());
    let mut c = config(0.1, 0.0, BcMode::Tn);
    c.dt_safety = 0.0;
    assert!(c.validate().is_err());

    let mesh = gen_unit_square(4).unwrap().with_node_normals().unwrap();
    let space = build_dof_map(&mesh, 1, 2).unwrap();
    assert!(Integrator::new(&space, config(0.1, 0.0, BcMode::Tn), &RestingFluid, 0.0).is_err());
}

#[test]
fn rest_is_a_fixed_point() {
    let mesh = gen_unit_square(4).unwrap().with_node_normals().unwrap();
    let space = build_dof_map(&mesh, 1, 2).unwrap();
    for bc in [BcMode::Tn, BcMode::Wabe] {
        let cfg = config(0.1, 1.0, bc);
        let dt = select_dt(space.mesh(), &cfg, 1.0);
        let mut integ = Integrator::new(&space, cfg, &RestingFluid, dt).unwrap();
        let mut state = integ.initialize().unwrap();
        for _ in 0..5 {
            state = integ.step(&state).unwrap();
        }
        let umax = state.u_curr.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let pmax = state.p_curr.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(umax < 1e-13 && pmax < 1e-12, "bc {bc:?}: u {umax} p {pmax}");
    }
}

#[test]
fn boundary_values_are_imposed_exactly() {
    let case = ManufacturedCase::new(CaseId::I);
    let problem = ManufacturedProblem {
        case,
        rho: 1.0,
        mu: 0.1,
    };
    let mesh = gen_unit_square(5).unwrap().with_node_normals().unwrap();
    let space = build_dof_map(&mesh, 1, 2).unwrap();
    let cfg = config(0.1, 0.0, BcMode::Tn);
    let mut integ = Integrator::new(&space, cfg, &problem, 0.001).unwrap();
    let mut state = integ.initialize().unwrap();
    for _ in 0..3 {
        state = integ.step(&state).unwrap();
    }
    let nd = space.ndofs();
    for &d in &space.all_boundary_dofs() {
        let p = space.dof_coords()[d];
        let g = problem.boundary_velocity(p[0], p[1], state.t);
        assert_eq!(state.u_curr[d], g[0], "dof {d}");
        assert_eq!(state.u_curr[nd + d], g[1], "dof {d}");
    }
}

#[test]
fn pressure_has_zero_weighted_mean() {
    let case = ManufacturedCase::new(CaseId::IV);
    let problem = ManufacturedProblem {
        case,
        rho: 1.0,
        mu: 0.1,
    };
    let mesh = gen_unit_square(5).unwrap().with_node_normals().unwrap();
    let space = build_dof_map(&mesh, 1, 2).unwrap();
    let weights = mass_row_sums(&assemble_mass(&space).unwrap());
    for bc in [BcMode::Tn, BcMode::Wabe] {
        let cfg = config(0.1, 1.0, bc);
        let mut integ = Integrator::new(&space, cfg, &problem, 0.001).unwrap();
        let mut state = integ.initialize().unwrap();
        for _ in 0..3 {
            state = integ.step(&state).unwrap();
        }
        let mean = dot(&weights, &state.p_curr);
        assert!(mean.abs() < 1e-10, "bc {bc:?}: weighted mean {mean}");
    }
}

#[test]
fn stepping_is_deterministic() {
    let case = ManufacturedCase::new(CaseId::II);
    let problem = ManufacturedProblem {
        case,
        rho: 1.0,
        mu: 0.1,
    };
    let mesh = gen_unit_square(4).unwrap().with_node_normals().unwrap();
    let space = build_dof_map(&mesh, 1, 2).unwrap();
    let cfg = config(0.1, 1.0, BcMode::Tn);
    let run = || {
        let mut integ = Integrator::new(&space, cfg, &problem, 0.001).unwrap();
        let mut state = integ.initialize().unwrap();
        for _ in 0..3 {
            state = integ.step(&state).unwrap();
        }
        state
    };
    let a = run();
    let b = run();
    assert_eq!(a.u_curr, b.u_curr);
    assert_eq!(a.p_curr, b.p_curr);
    assert_eq!(a.t, b.t);
}

#[test]
fn run_checks_the_time_interval_and_reports_at_the_stride() {
    let mesh = gen_unit_square(4).unwrap().with_node_normals().unwrap();
    let space = build_dof_map(&mesh, 1, 2).unwrap();
    let cfg = config(0.1, 0.0, BcMode::Tn);
    let mut integ = Integrator::new(&space, cfg, &RestingFluid, 0.01).unwrap();
    let state = integ.initialize().unwrap();
    assert!(integ.run(state.clone(), -1.0, 1, |_| {}).is_err());

    // Five steps at stride 2 report after steps 2, 4, and 5.
    let mut seen = Vec::new();
    integ.run(state, 0.05, 2, |s| seen.push(s.step_index)).unwrap();
    assert_eq!(seen.len(), 3);
}
