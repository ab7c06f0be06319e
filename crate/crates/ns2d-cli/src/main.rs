//! Command-line driver: convergence studies, cavity and cylinder benchmarks,
//! mode-analysis evaluations, and mesh utilities.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use ns2d::harness::{
    self, cavity::CavityConfig, cylinder::CylinderConfig, BoundaryMode, CaseId, FunctionalSeries,
    ManufacturedCase, StudyConfig,
};
use ns2d::mesh;
use ns2d::modal;
use ns2d::splitstep::BcMode;

#[derive(Parser)]
#[command(name = "ns2d", version, about = "Incompressible Navier-Stokes split-step solver")]
struct Cli {
    /// Plain-text `key = value` file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Manufactured-solution convergence study on the unit square.
    Converge(ConvergeArgs),
    /// Lid-driven cavity with a smoothed lid on a stretched mesh.
    Cavity(CavityArgs),
    /// Channel flow past a cylinder with pulsed inflow.
    Cylinder(CylinderArgs),
    /// Normal-mode analysis evaluations.
    Modal {
        #[command(subcommand)]
        cmd: ModalCmd,
    },
    /// Mesh generation and inspection.
    Mesh {
        #[command(subcommand)]
        cmd: MeshCmd,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BcFlag {
    /// Curl-curl Neumann pressure condition.
    Tn,
    /// Weighted replacement pressure rows on the boundary.
    Wabe,
}

impl From<BcFlag> for BcMode {
    fn from(b: BcFlag) -> BcMode {
        match b {
            BcFlag::Tn => BcMode::Tn,
            BcFlag::Wabe => BcMode::Wabe,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundaryFlag {
    /// Dirichlet data on all four sides.
    Noslip,
    /// Dofs identified across x=0 / x=1.
    Periodic,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Benchmark case: i, ii, iii or iv.
    #[arg(long, default_value = "iv")]
    case: String,
    /// Comma-separated element orders to run (1, 2 or 4).
    #[arg(long, default_value = "1")]
    orders: String,
    /// Comma-separated unit-square subdivisions, e.g. 10,20,40.
    #[arg(long, default_value = "10,20,40")]
    meshes: String,
    #[arg(long, value_enum, default_value = "noslip")]
    boundary: BoundaryFlag,
    /// Overrides the boundary treatment implied by the case.
    #[arg(long, value_enum)]
    bc: Option<BcFlag>,
    /// Overrides the damping constant implied by the case (alpha = cd/h_min^2).
    #[arg(long)]
    cd: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    dt_safety: f64,
    #[arg(long, default_value_t = 0.1)]
    tfinal: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0.1)]
    mu: f64,
    /// Output directory for per-order error CSVs.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CavityArgs {
    /// Subdivisions per side of the stretched square.
    #[arg(long, default_value_t = 64)]
    m: usize,
    /// Grading strength of the stretched mesh.
    #[arg(long, default_value_t = 0.2604)]
    beta: f64,
    #[arg(long, default_value_t = 1)]
    order: usize,
    #[arg(long, value_enum, default_value = "tn")]
    bc: BcFlag,
    #[arg(long, default_value_t = 1.0)]
    cd: f64,
    #[arg(long, default_value_t = 0.25)]
    dt_safety: f64,
    #[arg(long, default_value_t = 50.0)]
    tfinal: f64,
    #[arg(long, default_value_t = 1e-3)]
    nu: f64,
    /// Output directory for profile CSVs and the final-state VTK.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CylinderArgs {
    /// Uniform refinements of the base channel mesh.
    #[arg(long, default_value_t = 4)]
    refine: usize,
    #[arg(long, default_value_t = 1)]
    order: usize,
    #[arg(long, value_enum, default_value = "tn")]
    bc: BcFlag,
    /// Damping constant (alpha = cd/h_min^2); omitted picks the benchmark
    /// damping level alpha = 5521.08.
    #[arg(long)]
    cd: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    dt_safety: f64,
    #[arg(long, default_value_t = 8.0)]
    tfinal: f64,
    #[arg(long, default_value_t = 1e-3)]
    nu: f64,
    /// Time between functional samples.
    #[arg(long, default_value_t = 0.05)]
    sample_every: f64,
    /// Output directory for the functional CSV and the final-state VTK.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ModalCmd {
    /// Checks the sign/monotonicity lemmas of q(s) on the positive real axis.
    Qscan {
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        /// Wave numbers 1..=kmax.
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[arg(long, default_value_t = 100.0)]
        smax: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Output directory for per-k q(s) CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scans det(Z) over a complex-s grid and reports contour intersections.
    Detz {
        /// Comma-separated wave numbers.
        #[arg(long, default_value = "1,5,10,100")]
        k: String,
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        /// Damping coefficient, or `auto` for 1/h^2.
        #[arg(long, default_value = "auto")]
        alpha: String,
        /// Output directory for value and contour CSVs per k.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compares det(Z)(h) against its closed-form h->0 limit.
    Limit {
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long, default_value_t = 100.0)]
        alpha: f64,
        /// Laplace parameter, e.g. `1+2i`.
        #[arg(long, default_value = "1")]
        s: String,
        /// Comma-separated mesh sizes.
        #[arg(long, default_value = "1e-1,1e-2,1e-3")]
        hs: String,
    },
    /// Leading-order boundary-error amplitudes.
    Sigma {
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long, default_value_t = 100.0)]
        alpha: f64,
        /// Laplace parameter, e.g. `1+2i`.
        #[arg(long, default_value = "1")]
        s: String,
        /// Truncation-error order of the forcing term.
        #[arg(long, default_value_t = 2)]
        r: u32,
        /// Truncation-error amplitude.
        #[arg(long, default_value_t = 1.0)]
        g0: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeshKind {
    Square,
    Stretched,
    Cylinder,
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Generates a built-in mesh and writes it in the text format.
    Gen {
        #[arg(long, value_enum, default_value = "square")]
        kind: MeshKind,
        /// Subdivisions per side (square and stretched kinds).
        #[arg(long, default_value_t = 10)]
        m: usize,
        /// Grading strength (stretched kind).
        #[arg(long, default_value_t = 0.25)]
        beta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Uniformly refines a mesh file.
    Refine {
        #[arg(long)]
        input: PathBuf,
        /// Segments per original edge.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prints mesh statistics.
    Info {
        #[arg(long)]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = match config::inject_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> ns2d::Result<()> {
    match cli.cmd {
        Cmd::Converge(a) => cmd_converge(a),
        Cmd::Cavity(a) => cmd_cavity(a),
        Cmd::Cylinder(a) => cmd_cylinder(a),
        Cmd::Modal { cmd } => cmd_modal(cmd),
        Cmd::Mesh { cmd } => cmd_mesh(cmd),
    }
}

fn bad(msg: String) -> ns2d::Error {
    ns2d::Error::InvalidArgument(msg)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> ns2d::Result<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| bad(format!("bad {what} entry {p:?}")))
        })
        .collect()
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
fn parse_complex(s: &str) -> ns2d::Result<Complex64> {
    let s = s.trim().replace(' ', "");
    let fail = || bad(format!("bad complex number {s:?}"));
    if let Some(imag) = s.strip_suffix(['i', 'j']) {
        // Split the real part off at the last +/- that is not an exponent
        // sign and not leading.
        let bytes = imag.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-')
                && bytes[i - 1] != b'e'
                && bytes[i - 1] != b'E'
            {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let re: f64 = imag[..i].parse().map_err(|_| fail())?;
                let im_str = &imag[i..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().map_err(|_| fail())?
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if imag.is_empty() {
                    1.0
                } else if imag == "-" {
                    -1.0
                } else {
                    imag.parse().map_err(|_| fail())?
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = s.parse().map_err(|_| fail())?;
        Ok(Complex64::new(re, 0.0))
    }
}

fn ensure_dir(dir: &Path) -> ns2d::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| ns2d::Error::io(dir, e))
}

fn cmd_converge(a: ConvergeArgs) -> ns2d::Result<()> {
    let case_id =
        CaseId::parse(&a.case).ok_or_else(|| bad(format!("unknown case {:?}", a.case)))?;
    let orders: Vec<usize> = parse_list(&a.orders, "order")?;
    let meshes: Vec<usize> = parse_list(&a.meshes, "mesh")?;
    for &order in &orders {
        let mut cfg = StudyConfig::new(ManufacturedCase::new(case_id), order, meshes.clone());
        cfg.boundary = match a.boundary {
            BoundaryFlag::Noslip => BoundaryMode::NoSlip,
            BoundaryFlag::Periodic => BoundaryMode::PeriodicX,
        };
        cfg.bc_override = a.bc.map(Into::into);
        cfg.cd_override = a.cd;
        cfg.dt_safety = a.dt_safety;
        cfg.t_final = a.tfinal;
        cfg.rho = a.rho;
        cfg.mu = a.mu;

        println!("case {:?}, order {order}:", case_id);
        let result = harness::convergence_study(&cfg)?;
        println!(
            "  {:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            "h", "u_L2", "u_Linf", "v_L2", "v_Linf", "p_L2", "p_Linf", "div_L2"
        );
        for row in &result.rows {
            match &row.norms {
                Some(n) => println!(
                    "  {:>6.4} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
                    row.h, n.u.l2, n.u.linf, n.v.l2, n.v.linf, n.p.l2, n.p.linf, n.div.l2
                ),
                None => println!(
                    "  {:>6.4} diverged: {}",
                    row.h,
                    row.failure.as_deref().unwrap_or("unknown")
                ),
            }
        }
        if let Some(r) = result.rates() {
            println!(
                "  rates: u_L2={:.2} u_Linf={:.2} v_L2={:.2} v_Linf={:.2} p_L2={:.2} p_Linf={:.2} div_L2={:.2}",
                r.u_l2, r.u_linf, r.v_l2, r.v_linf, r.p_l2, r.p_linf, r.div_l2
            );
        }
        if let Some(dir) = &a.out {
            ensure_dir(dir)?;
            let path = dir.join(format!("converge_case_{:?}_p{order}.csv", case_id));
            harness::write_csv(&result.to_series(), &path)?;
            println!("  wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_cavity(a: CavityArgs) -> ns2d::Result<()> {
    let mut cfg = CavityConfig::new(a.m, a.bc.into());
    cfg.beta = a.beta;
    cfg.order = a.order;
    cfg.nu = a.nu;
    cfg.cd = a.cd;
    cfg.dt_safety = a.dt_safety;
    cfg.t_final = a.tfinal;
    let r = harness::run_cavity(&cfg)?;
    println!(
        "cavity m={} order={} dt={:.4e} alpha={:.4}",
        a.m, a.order, r.dt, r.alpha
    );
    println!(
        "min u(0.5,y) = {:.4} at y = {:.4}; profile change over last 10 units = {:.3}%",
        r.min_u,
        r.min_u_y,
        100.0 * r.rel_change
    );
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        let mut series = FunctionalSeries::new(&["u_mid_x", "v_mid_y"]);
        for (&(y, u), &(_, v)) in r.u_centerline.iter().zip(&r.v_centerline) {
            series.push(y, &[u, v])?;
        }
        let csv = dir.join("cavity_centerlines.csv");
        harness::write_csv(&series, &csv)?;
        let vtk = dir.join("cavity_final.vtk");
        harness::write_vtk(&r.space, &r.state, &vtk)?;
        println!("wrote {} and {}", csv.display(), vtk.display());
    }
    Ok(())
}

fn cmd_cylinder(a: CylinderArgs) -> ns2d::Result<()> {
    let mut cfg = CylinderConfig::new(a.refine, a.bc.into());
    cfg.order = a.order;
    cfg.nu = a.nu;
    cfg.cd = a.cd;
    cfg.dt_safety = a.dt_safety;
    cfg.t_final = a.tfinal;
    cfg.sample_every = a.sample_every;
    let r = harness::run_cylinder(&cfg)?;
    println!(
        "cylinder refine={} order={} dofs={} h_min={:.5} cd={:.5} alpha={:.2} dt={:.4e}",
        a.refine,
        a.order,
        r.space.ndofs(),
        r.h_min,
        r.cd,
        r.alpha,
        r.dt
    );
    let cd_max = r.series.max_of("cd").unwrap_or(f64::NAN);
    let cl_max = r.series.max_of("cl").unwrap_or(f64::NAN);
    let dp_end = r.series.last_of("dp").unwrap_or(f64::NAN);
    println!("cd_max={cd_max:.4} cl_max={cl_max:.4} dp(t_final)={dp_end:.4}");
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        let csv = dir.join("cylinder_functionals.csv");
        harness::write_csv(&r.series, &csv)?;
        let vtk = dir.join("cylinder_final.vtk");
        harness::write_vtk(&r.space, &r.state, &vtk)?;
        println!("wrote {} and {}", csv.display(), vtk.display());
    }
    Ok(())
}

fn cmd_modal(cmd: ModalCmd) -> ns2d::Result<()> {
    match cmd {
        ModalCmd::Qscan {
            h,
            nu,
            kmax,
            smax,
            samples,
            out,
        } => {
            let ks: Vec<f64> = (1..=kmax).map(|k| k as f64).collect();
            let ss: Vec<f64> = (1..=samples)
                .map(|j| smax * j as f64 / samples as f64)
                .collect();
            let report = modal::verify_q_lemmas(h, nu, &ks, &ss)?;
            println!(
                "checked {} samples; max q = {:.6e}; violations: {}",
                report.samples,
                report.max_q,
                report.violations.len()
            );
            for v in report.violations.iter().take(10) {
                println!("  {v}");
            }
            if let Some(dir) = &out {
                ensure_dir(dir)?;
                for &k in &ks {
                    let mut series = FunctionalSeries::new(&["q_re", "q_im", "q1_re"]);
                    for &s in &ss {
                        let case = modal::ModalCase {
                            h,
                            k,
                            nu,
                            alpha: 0.0,
                            s: Complex64::new(s, 0.0),
                        };
                        let q = modal::q(&case)?;
                        let q1 = modal::q1(&case)?;
                        series.push(s, &[q.re, q.im, q1.re])?;
                    }
                    let path = dir.join(format!("qscan_k{k}.csv"));
                    harness::write_csv(&series, &path)?;
                }
                println!("wrote q(s) tables to {}", dir.display());
            }
            if !report.ok() {
                return Err(ns2d::Error::Domain(
                    "q-lemma verification failed".to_string(),
                ));
            }
        }
        ModalCmd::Detz { k, h, nu, alpha, out } => {
            let ks: Vec<f64> = parse_list(&k, "k")?;
            let alpha = if alpha.trim() == "auto" {
                1.0 / (h * h)
            } else {
                alpha
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("bad alpha {alpha:?}")))?
            };
            for &kv in &ks {
                let scan = modal::detz_scan(h, kv, nu, alpha, modal::ScanGrid::default())?;
                println!(
                    "k={kv}: {} zero crossings with Re(s) > 0",
                    scan.right_half_intersections()
                );
                if let Some(dir) = &out {
                    ensure_dir(dir)?;
                    scan.write_values_csv(&dir.join(format!("detz_values_k{kv}.csv")))?;
                    scan.write_contours_csv(&dir.join(format!("detz_contours_k{kv}.csv")))?;
                }
            }
            if out.is_some() {
                println!("wrote scan tables");
            }
        }
        ModalCmd::Limit { k, nu, alpha, s, hs } => {
            let s = parse_complex(&s)?;
            let hs: Vec<f64> = parse_list(&hs, "h")?;
            let lim = modal::limit_detz(k, nu, alpha, s);
            for &h in &hs {
                let case = modal::ModalCase { h, k, nu, alpha, s };
                let det = modal::det_z_lenient(&case)?;
                println!(
                    "h={h:>8}: det(Z) = {:.6} + {:.6}i  |det - limit| = {:.3e}",
                    det.re,
                    det.im,
                    (det - lim).norm()
                );
            }
            println!("limit: {:.6} + {:.6}i", lim.re, lim.im);
        }
        ModalCmd::Sigma {
            h,
            k,
            nu,
            alpha,
            s,
            r,
            g0,
        } => {
            let s = parse_complex(&s)?;
            let sig = modal::leading_sigma(h, k, nu, alpha, s, r, g0);
            for (name, v) in ["sigma1", "sigma2", "sigma3"].iter().zip(sig) {
                println!("{name} = {:.6e} + {:.6e}i  (|{name}| = {:.6e})", v.re, v.im, v.norm());
            }
        }
    }
    Ok(())
}

fn cmd_mesh(cmd: MeshCmd) -> ns2d::Result<()> {
    match cmd {
        MeshCmd::Gen { kind, m, beta, out } => {
            let mesh = match kind {
                MeshKind::Square => mesh::gen_unit_square(m)?,
                MeshKind::Stretched => mesh::gen_stretched_square(m, beta)?,
                MeshKind::Cylinder => mesh::gen_cylinder_channel()?,
            };
            mesh::save_mesh(&mesh, &out)?;
            println!(
                "wrote {} ({} vertices, {} triangles)",
                out.display(),
                mesh.vertex_count(),
                mesh.triangle_count()
            );
        }
        MeshCmd::Refine { input, n, out } => {
            let mesh = mesh::load_mesh(&input)?.refine_uniform(n)?;
            mesh::save_mesh(&mesh, &out)?;
            println!(
                "wrote {} ({} vertices, {} triangles)",
                out.display(),
                mesh.vertex_count(),
                mesh.triangle_count()
            );
        }
        MeshCmd::Info { input } => {
            let mesh = mesh::load_mesh(&input)?;
            println!("vertices:       {}", mesh.vertex_count());
            println!("triangles:      {}", mesh.triangle_count());
            println!("boundary edges: {}", mesh.boundary_edges().len());
            println!("edge length:    [{:.6}, {:.6}]", mesh.min_edge_length(), mesh.max_edge_length());
            println!("euler char:     {}", mesh.euler_characteristic());
            let mut tags: Vec<u32> = mesh.boundary_edges().iter().map(|b| b.tag).collect();
            tags.sort_unstable();
            tags.dedup();
            println!("boundary tags:  {tags:?}");
        }
    }
    Ok(())
}
