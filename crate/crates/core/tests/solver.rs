mod common;

use common::*;
use reactive_slab::fields::metric;
use reactive_slab::solver::{initial_guess, Problem, Solution};
use reactive_slab::{
    compute_boundary_budget, load_config, solve, BoundaryData, DistributionField, Model, PhaseGrid, PhysicalConfig,
    Real, SolverSettings,
};

fn solve_config(name: &str, model: Model, settings: Option<SolverSettings>) -> (Solution<f64>, reactive_slab::Grid) {
    let run = load_config(&config_path(name)).unwrap();
    let grid = run.build_grid().unwrap();
    let table = run.boundary.tabulate(&grid, &run.physical).unwrap();
    let budget = compute_boundary_budget(&table, &run.physical, &grid).unwrap();
    let p = Problem {
        model,
        cfg: &run.physical,
        grid: &grid,
        table: &table,
        budget: &budget,
    };
    let settings = settings.unwrap_or(run.solver);
    let sol = solve(&p, &settings, initial_guess(&table, &grid), &mut |_, _| Ok(())).unwrap();
    (sol, grid)
}

#[test]
fn mirror_symmetric_inflow_gives_mirror_symmetric_solution() {
    let (sol, grid) = solve_config("symmetric.toml", Model::Fast, None);
    let f = &sol.field;
    let (nv1, nx) = (grid.nv1(), grid.nx());
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for s in 0..4 {
        for i1 in 0..nv1 {
            for j in 0..=nx {
                let a = f.row(s, i1, j);
                let b = f.row(s, nv1 - 1 - i1, nx - j);
                for (x, y) in a.iter().zip(b) {
                    worst = worst.max((x - y).abs());
                    peak = peak.max(x.abs());
                }
            }
        }
    }
    assert!(worst <= 1e-12 * peak, "mirror defect {worst:e}");
    // identical species pairs stay identical
    for j in 0..=nx {
        let m = &sol.moments[j];
        assert!((m.species[0].n - m.species[1].n).abs() < 1e-13);
        assert!((m.species[2].t - m.species[3].t).abs() < 1e-13);
        // the discrete mass flux balances to quadrature accuracy only
        assert!(m.global.u[0].abs() < 1e-8, "node {j}: U = {:e}", m.global.u[0]);
    }
}

#[test]
fn resting_equilibrium_inflow_is_a_slow_fixed_point() {
    let run = load_config(&config_path("symmetric.toml")).unwrap();
    let grid = run.build_grid().unwrap();
    let table = run.boundary.tabulate(&grid, &run.physical).unwrap();
    let (sol, _) = solve_config("symmetric.toml", Model::Slow, None);
    let d = metric(&sol.field, &initial_guess(&table, &grid), &grid).unwrap();
    assert!(d < 1e-9, "moved by {d:e}");
    assert!(sol.report.iterations <= 3);
}

#[test]
fn under_relaxation_reaches_the_same_fixed_point() {
    let run = load_config(&config_path("generic.toml")).unwrap();
    let (plain, grid) = solve_config("generic.toml", Model::Slow, None);
    let damped_settings = SolverSettings {
        relaxation: 0.6,
        ..run.solver
    };
    let (damped, _) = solve_config("generic.toml", Model::Slow, Some(damped_settings));
    assert!(damped.report.iterations > plain.report.iterations);
    let d = metric(&plain.field, &damped.field, &grid).unwrap();
    assert!(d < 1e-8, "relaxed solution differs by {d:e}");
}

#[test]
fn distances_decrease_geometrically_at_large_knudsen() {
    let (sol, _) = solve_config("generic.toml", Model::Fast, None);
    let d = &sol.report.distances;
    assert!(d.windows(2).all(|w| w[1] < w[0]));
    assert!(sol.report.tail_ratio.is_some_and(|r| r < 0.2), "tail ratio {:?}", sol.report.tail_ratio);
}

fn single_precision_run<T: Real>() -> (Solution<T>, PhaseGrid<T>) {
    let cfg = PhysicalConfig::<T>::new(&params([1.0, 2.0, 1.5, 1.5], 1.0, 0.05, 0.05)).unwrap();
    let grid = PhaseGrid::<T>::new(16, 16, 8, T::lit(7.0)).unwrap();
    let bd = BoundaryData::uniform_maxwellian(T::one(), T::one());
    let table = bd.tabulate(&grid, &cfg).unwrap();
    let budget = compute_boundary_budget(&table, &cfg, &grid).unwrap();
    let p = Problem {
        model: Model::Fast,
        cfg: &cfg,
        grid: &grid,
        table: &table,
        budget: &budget,
    };
    let settings = SolverSettings {
        tol: 1e-5,
        root_tol: 1e-5,
        ..SolverSettings::default()
    };
    let init: DistributionField<T> = initial_guess(&table, &grid);
    (solve(&p, &settings, init, &mut |_, _| Ok(())).map_err(|e| e.to_string()).unwrap(), grid)
}

#[test]
fn single_and_double_precision_agree() {
    let (s32, _) = single_precision_run::<f32>();
    let (s64, _) = single_precision_run::<f64>();
    assert!(s32.report.converged);
    for (a, b) in s32.moments.iter().zip(&s64.moments) {
        for i in 0..4 {
            assert!(rel(a.species[i].n as f64, b.species[i].n, b.species[i].n) < 1e-4);
            assert!(rel(a.species[i].t as f64, b.species[i].t, b.species[i].t) < 1e-4);
        }
    }
}

fn solve_run(run: &reactive_slab::RunConfig, model: Model) -> (Solution<f64>, reactive_slab::Grid) {
    let grid = run.build_grid().unwrap();
    let table = run.boundary.tabulate(&grid, &run.physical).unwrap();
    let budget = compute_boundary_budget(&table, &run.physical, &grid).unwrap();
    let p = Problem {
        model,
        cfg: &run.physical,
        grid: &grid,
        table: &table,
        budget: &budget,
    };
    let sol = solve(&p, &run.solver, initial_guess(&table, &grid), &mut |_, _| Ok(())).unwrap();
    (sol, grid)
}

#[test]
fn models_agree_without_reaction_for_balanced_common_inflow() {
    let mut run = load_config(&config_path("symmetric.toml")).unwrap();
    // identical masses, T = 1, dE = 1: n1 n2 = e n3 n4 is the mass-action balance
    let n12 = 0.5f64.exp();
    let spec = |n| reactive_slab::InflowSpec::HalfMaxwellian {
        density: n,
        drift: 0.0,
        temperature: 1.0,
    };
    let side = [spec(n12), spec(n12), spec(1.0), spec(1.0)];
    run.boundary = BoundaryData {
        left: side.clone(),
        right: side,
    };
    let (slow, grid) = solve_run(&run, Model::Slow);
    let (fast, _) = solve_run(&run, Model::Fast);
    let d = metric(&slow.field, &fast.field, &grid).unwrap();
    assert!(d < 10.0 * run.solver.tol, "models differ by {d:e}");
}

#[test]
fn models_differ_without_reaction_when_inflow_is_out_of_balance() {
    // the fast closure imposes mass-action balance whatever the rates
    let (slow, grid) = solve_config("symmetric.toml", Model::Slow, None);
    let (fast, _) = solve_config("symmetric.toml", Model::Fast, None);
    let d = metric(&slow.field, &fast.field, &grid).unwrap();
    assert!(d > 1e-4, "unexpectedly close: {d:e}");
}
