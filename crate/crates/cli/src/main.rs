//! Command-line driver: problem ingestion, mesh generation, solver
//! dispatch, verification suites, convergence studies, and field export.
//!
//! Exit codes: 0 success, 1 failed checks, 2 configuration problems,
//! 3 ill-posed problems, 4 solver non-convergence.

mod config;
mod vtk;

use clap::{Parser, Subcommand};
use config::ConfigError;
use mefem::constitutive::{CouplingMode, IsotropicElastic};
use mefem::solve::{
    equilibrium_residual, solve_coupled_model_a, solve_coupled_model_b, solve_elastic,
    solve_magnetic, SolveReport,
};
use mefem::verify::{run_fast_checks, run_full_checks, SlabCase};
use mefem::Error as CoreError;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "mefem", version, about = "Magneto-elastic finite-element solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a configuration file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for fields.vtk, report.json, and log.txt.
        #[arg(long)]
        out: PathBuf,
        /// Mesh file overriding the configuration's mesh section.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Coupling override: none, model_a, model_b, model_b_linearized.
        #[arg(long)]
        coupling: Option<String>,
        /// Linear solver tolerance override.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the identity and convergence check suites.
    Verify {
        /// fast: algebraic and small-mesh checks; full: adds convergence
        /// studies and the coupled comparisons.
        #[arg(long, default_value = "fast")]
        level: String,
        /// Seed of the randomized suites.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Re-solve a study on uniformly refined boxes and report errors.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated division counts, e.g. 8,16,32.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
    },
    /// Generate a structured box mesh file.
    Genmesh {
        /// Box extent, e.g. 1,1,1.
        #[arg(long, value_delimiter = ',')]
        extent: Vec<f64>,
        /// Cells per axis, e.g. 8,8,8.
        #[arg(long, value_delimiter = ',')]
        divisions: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Optional slab region bounds zmin,zmax.
        #[arg(long, value_delimiter = ',')]
        slab_z: Option<Vec<f64>>,
        /// Region tag of the slab.
        #[arg(long, default_value_t = 2)]
        slab_region: i32,
    },
}

fn exit_code_of(err: &CoreError) -> i32 {
    match err {
        CoreError::Spec(_)
        | CoreError::MeshFormat { .. }
        | CoreError::MeshInvalid(_)
        | CoreError::InvalidMetric => 2,
        CoreError::IllPosedLoad(_) | CoreError::NonSolenoidalCurrent(_) => 3,
        CoreError::NoConvergence { .. } => 4,
        _ => 1,
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve { config, out, mesh, coupling, tol } => {
            cmd_solve(&config, &out, mesh.as_deref(), coupling.as_deref(), tol)
        }
        Command::Verify { level, seed } => cmd_verify(&level, seed),
        Command::Convergence { config, levels } => cmd_convergence(&config, &levels),
        Command::Genmesh { extent, divisions, out, slab_z, slab_region } => {
            cmd_genmesh(&extent, &divisions, &out, slab_z.as_deref(), slab_region)
        }
    };
    std::process::exit(code);
}

struct RunLog {
    start: Instant,
    lines: Vec<String>,
}

impl RunLog {
    fn new() -> Self {
        Self { start: Instant::now(), lines: Vec::new() }
    }

    fn push(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        let line = format!("[{:9.3}s] {}", self.start.elapsed().as_secs_f64(), msg);
        eprintln!("{line}");
        self.lines.push(line);
    }

    fn text(&self) -> String {
        self.lines.join("\n") + "\n"
    }
}

fn config_fail(log: Option<&mut RunLog>, msg: &str) -> i32 {
    if let Some(log) = log {
        log.push(format!("error: {msg}"));
    }
    eprintln!("error: {msg}");
    2
}

fn cmd_solve(
    config_path: &Path,
    out_dir: &Path,
    mesh_override: Option<&Path>,
    coupling_override: Option<&str>,
    tol: Option<f64>,
) -> i32 {
    let mut log = RunLog::new();
    let cfg = match config::load_config(config_path) {
        Ok(c) => c,
        Err(ConfigError(msg)) => return config_fail(Some(&mut log), &msg),
    };
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return config_fail(Some(&mut log), &format!("cannot create {}: {e}", out_dir.display()));
    }
    let mesh = match config::build_mesh(&cfg, mesh_override) {
        Ok(m) => m,
        Err(ConfigError(msg)) => return config_fail(Some(&mut log), &msg),
    };
    log.push(format!(
        "mesh: {} vertices, {} edges, {} faces, {} tets",
        mesh.vertex_count(),
        mesh.edge_count(),
        mesh.face_count(),
        mesh.tet_count()
    ));
    let (model, coupling) = match config::build_material(&cfg, coupling_override) {
        Ok(v) => v,
        Err(ConfigError(msg)) => return config_fail(Some(&mut log), &msg),
    };
    let magnetic_requested = config::wants_magnetics(&cfg) || coupling.is_some();
    if magnetic_requested {
        if let Err(ConfigError(msg)) = config::require_reluctivity(&mesh, &model) {
            return config_fail(Some(&mut log), &msg);
        }
    }
    let spec = match config::build_spec(&cfg, &mesh, model, tol) {
        Ok(s) => s,
        Err(ConfigError(msg)) => return config_fail(Some(&mut log), &msg),
    };

    let coupling_name = match coupling {
        None => "none",
        Some(CouplingMode::ModelA) => "model_a",
        Some(CouplingMode::ModelB) => "model_b",
        Some(CouplingMode::ModelBLinearized) => "model_b_linearized",
    };
    log.push(format!("coupling: {coupling_name}"));

    let solved: Result<SolveReport, CoreError> = match coupling {
        Some(CouplingMode::ModelA) => solve_coupled_model_a(&spec),
        Some(CouplingMode::ModelB) | Some(CouplingMode::ModelBLinearized) => {
            solve_coupled_model_b(&spec)
        }
        None => {
            // decoupled: run each single-physics solve the data asks for
            let want_elastic = config::wants_elasticity(&cfg, &spec.material);
            let want_magnetic = config::wants_magnetics(&cfg);
            if !want_elastic && !want_magnetic {
                return config_fail(
                    Some(&mut log),
                    "configuration drives neither an elastic nor a magnetic solve",
                );
            }
            let mut merged = SolveReport::default();
            let mut result: Result<(), CoreError> = Ok(());
            if want_elastic {
                log.push("decoupled elastic solve");
                match solve_elastic(&spec) {
                    Ok(r) => {
                        merged.displacement = r.displacement;
                        merged.strain = r.strain;
                        merged.stress = r.stress;
                        merged.elastic_energy = r.elastic_energy;
                        merged.linear_solves.extend(r.linear_solves);
                    }
                    Err(e) => result = Err(e),
                }
            }
            if result.is_ok() && want_magnetic {
                log.push("decoupled magnetic solve");
                match solve_magnetic(&spec) {
                    Ok(r) => {
                        merged.potential = r.potential;
                        merged.induction = r.induction;
                        merged.field_intensity = r.field_intensity;
                        merged.magnetic_energy = r.magnetic_energy;
                        merged.linear_solves.extend(r.linear_solves);
                    }
                    Err(e) => result = Err(e),
                }
            }
            result.map(|_| merged)
        }
    };

    let report = match solved {
        Ok(r) => r,
        Err(e) => {
            let code = exit_code_of(&e);
            log.push(format!("solver error: {e}"));
            let _ = std::fs::write(out_dir.join("log.txt"), log.text());
            return code;
        }
    };
    for s in &report.linear_solves {
        log.push(format!(
            "{}: {} unknowns, {} iterations, residual {:.3e}",
            s.label, s.unknowns, s.iterations, s.residual
        ));
    }
    for (k, o) in report.outer_iterations.iter().enumerate() {
        log.push(format!(
            "outer {:2}: increment {:.3e}, damping {}",
            k + 1,
            o.delta,
            o.damping
        ));
    }
    log.push(format!(
        "energies: elastic {:.6e}, magnetic {:.6e}, coupling {:.6e}",
        report.elastic_energy, report.magnetic_energy, report.coupling_energy
    ));

    let residuals = match equilibrium_residual(&spec, &report) {
        Ok(r) => r,
        Err(e) => {
            log.push(format!("residual evaluation failed: {e}"));
            let _ = std::fs::write(out_dir.join("log.txt"), log.text());
            return exit_code_of(&e);
        }
    };
    log.push(format!(
        "weak residuals: elastic l2 {:.3e} (load {:.3e}), magnetic l2 {:.3e} (load {:.3e})",
        residuals.elastic_l2, residuals.elastic_load, residuals.magnetic_l2, residuals.magnetic_load
    ));

    // artifacts
    let vtk_text = vtk::render_vtk(&mesh, &spec.material.metric, &report);
    if let Err(e) = std::fs::write(out_dir.join("fields.vtk"), vtk_text) {
        return config_fail(Some(&mut log), &format!("cannot write fields.vtk: {e}"));
    }
    let report_json = json!({
        "command": "solve",
        "config": config_path.display().to_string(),
        "coupling": coupling_name,
        "mesh": {
            "vertices": mesh.vertex_count(),
            "edges": mesh.edge_count(),
            "faces": mesh.face_count(),
            "tets": mesh.tet_count(),
        },
        "energies": {
            "elastic": report.elastic_energy,
            "magnetic": report.magnetic_energy,
            "coupling": report.coupling_energy,
            "total": report.total_energy(),
        },
        "residuals": {
            "elastic_l2": residuals.elastic_l2,
            "elastic_max": residuals.elastic_max,
            "elastic_load": residuals.elastic_load,
            "magnetic_l2": residuals.magnetic_l2,
            "magnetic_max": residuals.magnetic_max,
            "magnetic_load": residuals.magnetic_load,
        },
        "linear_solves": report.linear_solves.iter().map(|s| json!({
            "label": s.label,
            "unknowns": s.unknowns,
            "iterations": s.iterations,
            "residual": s.residual,
        })).collect::<Vec<_>>(),
        "outer_iterations": report.outer_iterations.iter().map(|o| json!({
            "delta": o.delta,
            "energy": if o.energy.is_finite() { Some(o.energy) } else { None },
            "damping": o.damping,
        })).collect::<Vec<_>>(),
    });
    if let Err(e) = std::fs::write(
        out_dir.join("report.json"),
        serde_json::to_string_pretty(&report_json).expect("serializable report"),
    ) {
        return config_fail(Some(&mut log), &format!("cannot write report.json: {e}"));
    }
    log.push("wrote fields.vtk, report.json, log.txt");
    if std::fs::write(out_dir.join("log.txt"), log.text()).is_err() {
        return 2;
    }
    0
}

fn cmd_verify(level: &str, seed: u64) -> i32 {
    let start = Instant::now();
    let checks = match level {
        "fast" => run_fast_checks(seed),
        "full" => run_full_checks(seed),
        other => {
            eprintln!("error: unknown level '{other}' (expected fast or full)");
            return 2;
        }
    };
    let mut failures = 0;
    println!("{:-^72}", "");
    for c in &checks {
        println!("[{}] {:26} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        if !c.passed {
            failures += 1;
        }
    }
    println!("{:-^72}", "");
    println!(
        "{} checks, {} failed, {:.2}s (seed {seed})",
        checks.len(),
        failures,
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        1
    } else {
        0
    }
}

fn cmd_convergence(config_path: &Path, levels: &[usize]) -> i32 {
    if levels.len() < 2 {
        eprintln!("error: convergence needs at least two levels");
        return 2;
    }
    let cfg = match config::load_config(config_path) {
        Ok(c) => c,
        Err(ConfigError(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let study = cfg.study.clone().unwrap_or_else(|| "elastic_mms".into());
    match study.as_str() {
        "elastic_mms" => convergence_elastic(&cfg, levels),
        "magnetic_uniform" => convergence_magnetic(&cfg, levels),
        "coupled_slab" => convergence_slab(levels),
        other => {
            eprintln!(
                "error: unknown study '{other}' (expected elastic_mms, magnetic_uniform, \
                 coupled_slab)"
            );
            2
        }
    }
}

fn print_table(title: &str, levels: &[usize], errors: &[f64]) {
    println!("{title}");
    println!("{:>8} {:>12} {:>14} {:>10}", "level", "h", "error", "order");
    for (k, (&n, &e)) in levels.iter().zip(errors).enumerate() {
        let order = if k > 0 {
            format!("{:.2}", (errors[k - 1] / e).log2() / ((n as f64) / (levels[k - 1] as f64)).log2())
        } else {
            "-".into()
        };
        println!("{:>8} {:>12.5} {:>14.6e} {:>10}", n, 1.0 / n as f64, e, order);
    }
}

fn convergence_elastic(cfg: &config::Config, levels: &[usize]) -> i32 {
    // use the first elastic region's parameters when given
    let mat = cfg
        .materials
        .regions
        .values()
        .find_map(|m| match (m.lambda, m.mu) {
            (Some(l), Some(mu)) => IsotropicElastic::new(l, mu).ok(),
            _ => None,
        })
        .unwrap_or_else(|| IsotropicElastic::new(100.0, 80.0).unwrap());
    let mms = mefem::solve::ManufacturedElastic { amplitude: [0.1, -0.07, 0.04], material: mat };
    let metric = mefem::algebra::Metric::euclidean();
    let mut errors = Vec::new();
    for &n in levels {
        let mesh = match mefem::mesh::generate_box_mesh([1.0, 1.0, 1.0], [n, n, n]) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_of(&e);
            }
        };
        let mut spec = mms.problem(&mesh, metric);
        spec.settings.linear_tol = 1e-11;
        let report = match solve_elastic(&spec) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_of(&e);
            }
        };
        let err = mefem::solve::l2_displacement_error(&mesh, &report, |x| mms.displacement(x))
            .expect("report carries displacement");
        errors.push(err);
    }
    print_table("manufactured elastic solution, L2 displacement error", levels, &errors);
    0
}

fn convergence_magnetic(cfg: &config::Config, levels: &[usize]) -> i32 {
    let b = cfg
        .boundary
        .vector_potential
        .iter()
        .find_map(|p| p.uniform_b)
        .unwrap_or([0.0, 0.0, 1.0]);
    let mut errors = Vec::new();
    for &n in levels {
        let mesh = match mefem::mesh::generate_box_mesh([1.0, 1.0, 1.0], [n, n, n]) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_of(&e);
            }
        };
        let model = mefem::constitutive::MagnetoElasticEnergy::new(
            CouplingMode::ModelA,
            mefem::algebra::Metric::euclidean(),
        )
        .with_reluctivity(1, 1.0);
        let mut spec = mefem::solve::ProblemSpec::new(&mesh, model);
        for tag in 1..=6 {
            spec.potential_bc
                .insert(tag, mefem::solve::PotentialBc::UniformB([b[2], -b[1], b[0]]));
        }
        spec.settings.linear_tol = 1e-11;
        let report = match solve_magnetic(&spec) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_of(&e);
            }
        };
        let mut worst = 0.0f64;
        let expect = [b[2], -b[1], b[0]];
        for form in report.induction.unwrap().values() {
            for c in 0..3 {
                worst = worst.max((form.components()[c] - expect[c]).abs());
            }
        }
        errors.push(worst);
    }
    println!("uniform-induction boundary drive: the discrete solution is exact,");
    println!("errors sit at the linear-solver tolerance on every level");
    print_table("max induction deviation", levels, &errors);
    0
}

fn convergence_slab(levels: &[usize]) -> i32 {
    let mut errors = Vec::new();
    for &n in levels {
        let case = SlabCase { divisions: n, ..Default::default() };
        let mesh = match case.mesh() {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_of(&e);
            }
        };
        let spec = case.spec(&mesh, CouplingMode::ModelA);
        let report = match solve_coupled_model_a(&spec) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_of(&e);
            }
        };
        let force = case.interface_force(&mesh, report.magnetic_stress.as_ref().unwrap());
        let expected = 0.5 * (case.r_air - case.r_slab) * case.b_magnitude * case.b_magnitude;
        errors.push((force[2] - expected).abs() / expected.abs() + 1e-16);
    }
    print_table("slab interface force, relative deviation from the plane-interface value", levels, &errors);
    let monotone = errors.windows(2).all(|w| w[1] <= w[0] * 1.5);
    if !monotone {
        eprintln!("warning: interface-force error did not decrease monotonically");
    }
    0
}

fn cmd_genmesh(
    extent: &[f64],
    divisions: &[usize],
    out: &Path,
    slab_z: Option<&[f64]>,
    slab_region: i32,
) -> i32 {
    if extent.len() != 3 || divisions.len() != 3 {
        eprintln!("error: --extent and --divisions need three comma-separated values");
        return 2;
    }
    let slab = match slab_z {
        Some([zmin, zmax]) => Some((*zmin, *zmax)),
        Some(_) => {
            eprintln!("error: --slab-z needs zmin,zmax");
            return 2;
        }
        None => None,
    };
    let mesh = match mefem::mesh::generate_box_mesh_with(
        [extent[0], extent[1], extent[2]],
        [divisions[0], divisions[1], divisions[2]],
        move |c| match slab {
            Some((zmin, zmax)) if c[2] > zmin && c[2] < zmax => slab_region,
            _ => 1,
        },
        None,
    ) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_of(&e);
        }
    };
    if let Err(e) = mefem::mesh::write_mesh(&mesh, out) {
        eprintln!("error: {e}");
        return 2;
    }
    println!(
        "wrote {} ({} vertices, {} tets, {} tagged boundary faces)",
        out.display(),
        mesh.vertex_count(),
        mesh.tet_count(),
        mesh.boundary_faces().filter(|&f| mesh.boundary_tag(f) != 0).count()
    );
    0
}
