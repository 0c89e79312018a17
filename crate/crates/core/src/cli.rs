//! Command-line front end: `solve`, `contraction` and `check-config`.

use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{compute_boundary_budget, load_config, BoundaryBudget, InflowTable, RunConfig};
use crate::diagnostics::{check_global_and_equilibrium_bounds, check_species_bounds, BoundReport};
use crate::equilibrium::{Model, NodeParams};
use crate::error::{Error, Result};
use crate::fields::{omega_membership, read_dump, write_dump, DistributionField, MomentSet};
use crate::grid::PhaseGrid;
use crate::solver::{
    contraction_law, estimate_contraction, fit_contraction_law, initial_guess, solve, Problem, SolveReport,
    SweepRecord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_BREAKDOWN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "reactive-slab", version, about = "Stationary reactive BGK slab solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the fixed-point iteration and write profiles, logs and reports.
    Solve(SolveArgs),
    /// Measure the contraction factor over a list of Knudsen numbers.
    Contraction(ContractionArgs),
    /// Validate a config and print the boundary budget.
    CheckConfig(CheckArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Config file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `solver.threads`.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Start from a field dump instead of the inflow patchwork.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Write the converged field to `fields/final.dump`.
    #[arg(long)]
    pub dump_field: bool,
    /// Also dump the iterate every N sweeps.
    #[arg(long)]
    pub dump_every: Option<usize>,
    /// Overrides `interaction.knudsen`.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ContractionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated Knudsen numbers.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200,400")]
    pub tau_list: Vec<f64>,
    /// Overrides `solver.probes`.
    #[arg(long)]
    pub probes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub config: PathBuf,
}

fn parse_model(s: &str) -> std::result::Result<Model, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit code for an error raised before (`solving == false`) or during the iteration.
pub fn exit_code(err: &Error, solving: bool) -> i32 {
    match err {
        Error::Breakdown { .. } | Error::RootSolve { .. } => EXIT_BREAKDOWN,
        Error::Divergence { .. } | Error::MaxIterations { .. } => EXIT_NO_CONVERGENCE,
        Error::NonFinite(_) | Error::Degenerate(_) if solving => EXIT_NO_CONVERGENCE,
        _ => EXIT_INVALID,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Solve(a) => run_solve(&a),
        Command::Contraction(a) => run_contraction(&a),
        Command::CheckConfig(a) => run_check(&a),
    }
}

/// Validated inputs of a run.
struct Setup {
    run: RunConfig,
    grid: PhaseGrid<f64>,
    table: InflowTable<f64>,
    budget: BoundaryBudget<f64>,
}

fn setup(path: &Path, tau: Option<f64>, threads: Option<usize>) -> Result<Setup> {
    let mut run = load_config(path)?;
    if let Some(tau) = tau {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid("tau", format!("must be positive and finite, got {tau}")));
        }
        run.physical = run.physical.with_knudsen(tau);
    }
    if let Some(t) = threads {
        run.solver.threads = t;
    }
    let grid = run.build_grid()?;
    let table = run.boundary.tabulate(&grid, &run.physical)?;
    let budget = compute_boundary_budget(&table, &run.physical, &grid)?;
    Ok(Setup {
        run,
        grid,
        table,
        budget,
    })
}

fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("solver.threads", e.to_string()))?;
    Ok(pool.install(f))
}

fn report_error(err: &Error, solving: bool) -> i32 {
    eprintln!("error: {err}");
    exit_code(err, solving)
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn run_check(a: &CheckArgs) -> i32 {
    match setup(&a.config, None, None) {
        Ok(s) => {
            print!("{}", budget_text(&s));
            EXIT_OK
        }
        Err(e) => report_error(&e, false),
    }
}

fn budget_text(s: &Setup) -> String {
    let b = &s.budget;
    let c = &s.run.physical;
    let mut t = String::new();
    let _ = writeln!(t, "config ok");
    let _ = writeln!(
        t,
        "grid: nx = {}, nv1 = {}, nv23 = {}, vmax = {}",
        s.grid.nx(),
        s.grid.nv1(),
        s.grid.nv23(),
        s.grid.vmax()
    );
    let _ = writeln!(
        t,
        "total mass = {}, mu12 = {}, mu34 = {}, delta_e = {}, knudsen = {}",
        c.total_mass,
        c.mu12(),
        c.mu34(),
        c.delta_e,
        c.knudsen
    );
    let _ = writeln!(t, "species      a_u          a_s          a_l          c_u          c_s          c_l        gamma");
    for i in 0..4 {
        let _ = writeln!(
            t,
            "{:>7} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e}",
            i + 1,
            b.a_u[i],
            b.a_s[i],
            b.a_l[i],
            b.c_u[i],
            b.c_s[i],
            b.c_l[i],
            b.gamma[i]
        );
    }
    let _ = writeln!(
        t,
        "a_u = {:e}, a_l = {:e}, c_u = {:e}, c_l = {:e}, gamma_l = {:e}",
        b.a_max, b.a_min, b.c_max, b.c_min, b.gamma_min
    );
    let _ = writeln!(t, "temperature bracket: T_l = {:e}, T_u = {:e}", b.t_lower, b.t_upper);
    t
}

fn log_line(r: &SweepRecord) -> String {
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
    format!(
        "{:>6} {:>13.6e} {:>13} {:>+13.6e} {:>13.6e} {:>13}\n",
        r.sweep,
        r.distance,
        opt(r.residual),
        r.omega_worst,
        r.min_temperature,
        opt(r.root_worst_residual)
    )
}

const LOG_HEADER: &str = "# sweep distance mild_residual omega_worst min_reactive_T root_residual\n";

fn fmt_row(values: &[f64]) -> String {
    let mut line = values.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

/// Per-species and global profile tables.
pub fn profile_tables(
    grid: &PhaseGrid<f64>,
    moments: &[MomentSet<f64>],
    params: &[NodeParams<f64>],
) -> ([String; 4], String) {
    let species = std::array::from_fn(|i| {
        let mut t = String::from("x,n,u1,u2,u3,T,nu,n_eq,u1_eq,u2_eq,u3_eq,T_eq\n");
        for (j, (m, p)) in moments.iter().zip(params).enumerate() {
            let s = &m.species[i];
            let (n, u, temp) = p.maxwellian_params(i);
            t.push_str(&fmt_row(&[
                grid.x()[j],
                s.n,
                s.u[0],
                s.u[1],
                s.u[2],
                s.t,
                p.frequencies()[i],
                n,
                u[0],
                u[1],
                u[2],
                temp,
            ]));
        }
        t
    });
    let mut global = String::from("x,n,rho,u1,u2,u3,T,reaction_source,root_residual,root_iterations\n");
    for (j, (m, p)) in moments.iter().zip(params).enumerate() {
        let g = &m.global;
        let (source, res, it) = match p {
            NodeParams::Slow(e) => (e.source, f64::NAN, f64::NAN),
            NodeParams::Fast(e) => (f64::NAN, e.root.residual, e.root.iterations as f64),
        };
        global.push_str(&fmt_row(&[grid.x()[j], g.n, g.rho, g.u[0], g.u[1], g.u[2], g.t, source, res, it]));
    }
    (species, global)
}

fn solve_summary(r: &SolveReport, threads: usize) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "model = {}", r.model.name());
    let _ = writeln!(t, "converged = {}", r.converged);
    let _ = writeln!(t, "iterations = {}", r.iterations);
    let _ = writeln!(t, "final_distance = {:.6e}", r.distances.last().copied().unwrap_or(f64::NAN));
    let _ = writeln!(t, "final_mild_residual = {:.6e}", r.final_residual);
    let _ = writeln!(t, "omega_all_pass = {}", r.omega_all_pass);
    let worst = r.omega_history.iter().copied().fold(f64::INFINITY, f64::min);
    let _ = writeln!(t, "omega_worst_margin = {worst:.6e}");
    match r.tail_ratio {
        Some(a) => writeln!(t, "tail_contraction = {a:.6e}"),
        None => writeln!(t, "tail_contraction = -"),
    }
    .ok();
    let _ = writeln!(t, "threads = {threads}");
    let _ = writeln!(t, "wall_time_s = {:.3}", r.wall_time.as_secs_f64());
    t
}

fn dump_text(f: &DistributionField<f64>, grid: &PhaseGrid<f64>, moments: &[MomentSet<f64>]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_dump(&mut buf, f, grid, moments, true).map_err(|source| Error::Io {
        path: "field dump".into(),
        source,
    })?;
    Ok(buf)
}

fn run_solve(a: &SolveArgs) -> i32 {
    let s = match setup(&a.common.config, a.tau, a.common.threads) {
        Ok(s) => s,
        Err(e) => return report_error(&e, false),
    };
    let init = match &a.resume {
        Some(path) => {
            let file = match fs::File::open(path) {
                Ok(f) => f,
                Err(source) => {
                    let e = Error::Io {
                        path: path.display().to_string(),
                        source,
                    };
                    return report_error(&e, false);
                }
            };
            match read_dump(BufReader::new(file), &s.grid) {
                Ok(f) => f,
                Err(e) => return report_error(&e, false),
            }
        }
        None => initial_guess(&s.table, &s.grid),
    };
    let threads = s.run.solver.threads;
    match with_pool(threads, || solve_and_write(a, &s, init)) {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(e)) => report_error(&e, true),
        Err(e) => report_error(&e, false),
    }
}

fn solve_and_write(a: &SolveArgs, s: &Setup, init: DistributionField<f64>) -> Result<()> {
    let out = &a.out;
    let problem = Problem {
        model: a.model,
        cfg: &s.run.physical,
        grid: &s.grid,
        table: &s.table,
        budget: &s.budget,
    };
    let mut log = String::from(LOG_HEADER);
    let result = solve(&problem, &s.run.solver, init, &mut |rec, f| {
        log.push_str(&log_line(rec));
        if let Some(every) = a.dump_every.filter(|&n| n > 0) {
            if rec.sweep % every == 0 {
                let moments = crate::fields::moment_profile(f, &s.grid, &s.run.physical)?;
                let path = out.join("fields").join(format!("sweep_{:05}.dump", rec.sweep));
                write_atomic(&path, &dump_text(f, &s.grid, &moments)?)?;
            }
        }
        Ok(())
    });
    write_atomic(&out.join("logs").join("iterations.log"), log.as_bytes())?;
    let sol = match result {
        Ok(sol) => sol,
        Err(e) => {
            let mut note = format!("model = {}\nstatus = failed\nerror = {e}\n", a.model.name());
            if matches!(e, Error::Breakdown { .. } | Error::RootSolve { .. }) {
                note.push_str(&BoundReport::breakdown(&e.to_string()).to_string());
            }
            write_atomic(&out.join("reports").join("solve.txt"), note.as_bytes())?;
            return Err(e);
        }
    };

    let (species, global) = profile_tables(&s.grid, &sol.moments, &sol.params);
    for (i, table) in species.iter().enumerate() {
        write_atomic(&out.join("profiles").join(format!("species_{}.csv", i + 1)), table.as_bytes())?;
    }
    write_atomic(&out.join("profiles").join("global.csv"), global.as_bytes())?;

    let cfg = &s.run.physical;
    let mut bounds = check_species_bounds(&sol.moments, &s.budget, cfg);
    bounds.extend(check_global_and_equilibrium_bounds(
        &sol.moments,
        &sol.params,
        &s.budget,
        cfg,
        a.model,
        s.run.solver.root_tol,
    ));
    let omega = omega_membership(&sol.field, &s.grid, &s.budget)?;
    let mut text = bounds.to_string();
    let _ = writeln!(
        text,
        "\nsolution set membership: {} (worst relative margin {:.6e})",
        if omega.passes() { "PASS" } else { "FAIL" },
        omega.worst_relative
    );
    write_atomic(&out.join("reports").join("bounds.txt"), text.as_bytes())?;
    let used = rayon::current_num_threads();
    write_atomic(
        &out.join("reports").join("solve.txt"),
        solve_summary(&sol.report, used).as_bytes(),
    )?;
    if a.dump_field {
        write_atomic(
            &out.join("fields").join("final.dump"),
            &dump_text(&sol.field, &s.grid, &sol.moments)?,
        )?;
    }
    eprintln!(
        "{} model converged in {} sweeps, mild residual {:.3e}, bounds {}",
        a.model.name(),
        sol.report.iterations,
        sol.report.final_residual,
        if bounds.passes() { "pass" } else { "FAIL" }
    );
    Ok(())
}

fn run_contraction(a: &ContractionArgs) -> i32 {
    let s = match setup(&a.common.config, None, a.common.threads) {
        Ok(s) => s,
        Err(e) => return report_error(&e, false),
    };
    let mut settings = s.run.solver;
    if let Some(p) = a.probes {
        settings.probes = p;
    }
    let problem = Problem {
        model: a.model,
        cfg: &s.run.physical,
        grid: &s.grid,
        table: &s.table,
        budget: &s.budget,
    };
    let points = match with_pool(settings.threads, || estimate_contraction(&problem, &settings, &a.tau_list)) {
        Ok(Ok(p)) => p,
        Ok(Err(e)) => return report_error(&e, true),
        Err(e) => return report_error(&e, false),
    };
    let fit = fit_contraction_law(&points);
    let mut csv = String::from("tau,alpha,law,probes,rejected,sweeps\n");
    for p in &points {
        let _ = writeln!(
            csv,
            "{:.17e},{:.17e},{:.17e},{},{},{}",
            p.tau,
            p.alpha,
            contraction_law(p.tau),
            p.probes,
            p.rejected,
            p.sweeps
        );
    }
    let mut summary = format!(
        "model = {}\nfit_slope = {:.6e}\nfit_max_factor = {:.6e}\n",
        a.model.name(),
        fit.slope,
        fit.max_factor
    );
    let monotone = points.windows(2).all(|w| w[1].alpha <= w[0].alpha);
    let _ = writeln!(summary, "monotone_nonincreasing = {monotone}");
    let _ = writeln!(summary, "all_below_one = {}", points.iter().all(|p| p.alpha < 1.0));
    let written = write_atomic(&a.out.join("reports").join("contraction.csv"), csv.as_bytes())
        .and_then(|_| write_atomic(&a.out.join("reports").join("contraction.txt"), summary.as_bytes()));
    if let Err(e) = written {
        return report_error(&e, false);
    }
    print!("{csv}{summary}");
    EXIT_OK
}
