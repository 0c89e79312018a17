//! Fixed-point iteration `f <- Phi(f)`, its bookkeeping, and the empirical
//! contraction estimate.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{BoundaryBudget, InflowTable, PhysicalConfig};
use crate::equilibrium::{Model, NodeParams};
use crate::error::{Error, Result};
use crate::fields::{metric, omega_membership, DistributionField, MomentSet};
use crate::grid::PhaseGrid;
use crate::scalar::Real;
use crate::transport::{apply_solution_operator, mild_residual};

/// Iteration controls, mirrored by the `[solver]` config section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Stop once `d(f^{k+1}, f^k)` drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Under-relaxation factor in `(0, 1]`; 1 is plain Picard iteration.
    pub relaxation: f64,
    /// Residual tolerance of the fast-model root solve.
    pub root_tol: f64,
    /// Seed of the contraction probes.
    pub seed: u64,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
    /// Probe pairs per Knudsen number in the contraction estimate.
    pub probes: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-10,
            max_iter: 500,
            relaxation: 1.0,
            root_tol: 1e-12,
            seed: 0,
            threads: 0,
            probes: 8,
        }
    }
}

/// Consecutive increases of the sweep distance that count as divergence.
pub const DIVERGENCE_STREAK: usize = 5;

/// Inputs shared by every sweep.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a, T> {
    pub model: Model,
    pub cfg: &'a PhysicalConfig<T>,
    pub grid: &'a PhaseGrid<T>,
    pub table: &'a InflowTable<T>,
    pub budget: &'a BoundaryBudget<T>,
}

/// One line of the iteration log.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub sweep: usize,
    pub distance: f64,
    /// `d(f, Phi f)` of the new iterate, computed every tenth sweep.
    pub residual: Option<f64>,
    pub omega_worst: f64,
    pub omega_pass: bool,
    /// Smallest reactive temperature of the equilibria used in this sweep.
    pub min_temperature: f64,
    pub root_worst_residual: Option<f64>,
    pub root_max_iterations: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub model: Model,
    pub iterations: usize,
    pub distances: Vec<f64>,
    pub final_residual: f64,
    /// Worst relative Omega margin of every iterate, starting with the initial one.
    pub omega_history: Vec<f64>,
    pub omega_all_pass: bool,
    pub min_temperatures: Vec<f64>,
    /// Largest ratio of successive distances over the tail of the iteration.
    pub tail_ratio: Option<f64>,
    pub converged: bool,
    pub wall_time: Duration,
}

pub struct Solution<T> {
    pub field: DistributionField<T>,
    pub report: SolveReport,
    /// Moments of the final field.
    pub moments: Vec<MomentSet<T>>,
    /// Equilibria built from those moments.
    pub params: Vec<NodeParams<T>>,
}

/// Pure transport of the inflow: `f_L` for `v1 > 0` and `f_R` for `v1 < 0` at every node.
pub fn initial_guess<T: Real>(table: &InflowTable<T>, grid: &PhaseGrid<T>) -> DistributionField<T> {
    let mut f = DistributionField::zeros(grid);
    let nt = grid.n_transverse();
    let half = grid.first_positive();
    for s in 0..4 {
        for i1 in 0..grid.nv1() {
            let src = if i1 >= half {
                &table.left[s][(i1 - half) * nt..(i1 - half + 1) * nt]
            } else {
                &table.right[s][i1 * nt..(i1 + 1) * nt]
            };
            for j in 0..grid.n_nodes_x() {
                f.row_mut(s, i1, j).copy_from_slice(src);
            }
        }
    }
    f
}

/// Resting Maxwellian per species with density `a_{i,u}/2` and energy `c_{i,u}/2`.
pub fn budget_maxwellian_guess<T: Real>(
    budget: &BoundaryBudget<T>,
    cfg: &PhysicalConfig<T>,
    grid: &PhaseGrid<T>,
) -> DistributionField<T> {
    let half = T::lit(0.5);
    let params: [(T, T); 4] = std::array::from_fn(|s| {
        let n = half * budget.a_u[s];
        let t = cfg.masses[s] * budget.c_u[s] / (T::lit(3.0) * cfg.boltzmann * budget.a_u[s]);
        (n, t)
    });
    DistributionField::from_fn(grid, |s, _, v| {
        let (n, t) = params[s];
        crate::config::maxwellian_value(n, &[T::zero(); 3], t, cfg.masses[s], cfg.boltzmann, &v)
    })
}

fn min_temperature<T: Real>(params: &[NodeParams<T>]) -> f64 {
    params
        .iter()
        .flat_map(|p| (0..4).map(move |i| p.maxwellian_params(i).2.as_f64()))
        .fold(f64::INFINITY, f64::min)
}

fn root_stats<T: Real>(params: &[NodeParams<T>]) -> (Option<f64>, Option<usize>) {
    let roots: Vec<_> = params.iter().filter_map(|p| p.root()).collect();
    if roots.is_empty() {
        return (None, None);
    }
    let res = roots.iter().map(|r| r.residual.as_f64().abs()).fold(0.0, f64::max);
    let it = roots.iter().map(|r| r.iterations).max();
    (Some(res), it)
}

/// Runs the fixed-point iteration from `init`; `observer` sees every sweep and
/// the iterate it produced, and may abort the run by returning an error.
pub fn solve<T: Real>(
    problem: &Problem<'_, T>,
    settings: &SolverSettings,
    init: DistributionField<T>,
    observer: &mut dyn FnMut(&SweepRecord, &DistributionField<T>) -> Result<()>,
) -> Result<Solution<T>> {
    let start = Instant::now();
    let Problem {
        model,
        cfg,
        grid,
        table,
        budget,
    } = *problem;
    init.check_grid(grid)?;
    if !(settings.relaxation > 0.0 && settings.relaxation <= 1.0) {
        return Err(Error::invalid("solver.relaxation", "must lie in (0, 1]"));
    }
    let root_tol = T::lit(settings.root_tol);
    let omega = T::lit(settings.relaxation);

    let mut f = init;
    let om0 = omega_membership(&f, grid, budget)?;
    let mut omega_history = vec![om0.worst_relative.as_f64()];
    let mut omega_all_pass = om0.passes();
    let mut distances = Vec::new();
    let mut min_temperatures = Vec::new();
    let mut increases = 0usize;
    let mut converged = false;

    for sweep in 1..=settings.max_iter {
        let out = apply_solution_operator(&f, table, model, grid, cfg, root_tol).map_err(|e| e.at_sweep(sweep))?;
        let mut next = out.field;
        if settings.relaxation < 1.0 {
            let mut blended = f.clone();
            blended.blend(&next, omega)?;
            next = blended;
        }
        let d = metric(&next, &f, grid)?.as_f64();
        let om = omega_membership(&next, grid, budget)?;
        let t_min = min_temperature(&out.params);
        let (root_res, root_it) = root_stats(&out.params);
        f = next;

        let residual = if sweep % 10 == 0 {
            Some(
                mild_residual(&f, table, model, grid, cfg, root_tol)
                    .map_err(|e| e.at_sweep(sweep))?
                    .as_f64(),
            )
        } else {
            None
        };
        omega_history.push(om.worst_relative.as_f64());
        omega_all_pass &= om.passes();
        min_temperatures.push(t_min);
        let record = SweepRecord {
            sweep,
            distance: d,
            residual,
            omega_worst: om.worst_relative.as_f64(),
            omega_pass: om.passes(),
            min_temperature: t_min,
            root_worst_residual: root_res,
            root_max_iterations: root_it,
        };
        observer(&record, &f)?;

        if !d.is_finite() {
            return Err(Error::Divergence { sweep, distance: d });
        }
        match distances.last() {
            Some(&prev) if d > prev => increases += 1,
            _ => increases = 0,
        }
        distances.push(d);
        if d < settings.tol {
            converged = true;
            break;
        }
        if increases >= DIVERGENCE_STREAK {
            return Err(Error::Divergence { sweep, distance: d });
        }
    }
    if !converged {
        return Err(Error::MaxIterations {
            sweeps: distances.len(),
            distance: distances.last().copied().unwrap_or(f64::NAN),
        });
    }

    let last = apply_solution_operator(&f, table, model, grid, cfg, root_tol)?;
    let final_residual = metric(&f, &last.field, grid)?.as_f64();
    let tail_ratio = distances
        .windows(2)
        .rev()
        .take(5)
        .filter(|w| w[0] > 1e3 * f64::EPSILON)
        .map(|w| w[1] / w[0])
        .reduce(f64::max);
    Ok(Solution {
        field: f,
        report: SolveReport {
            model,
            iterations: distances.len(),
            distances,
            final_residual,
            omega_history,
            omega_all_pass,
            min_temperatures,
            tail_ratio,
            converged,
            wall_time: start.elapsed(),
        },
        moments: last.moments,
        params: last.params,
    })
}

/// Measured Lipschitz ratio at one Knudsen number.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPoint {
    pub tau: f64,
    pub alpha: f64,
    pub probes: usize,
    /// Probe candidates that left Omega and were regenerated.
    pub rejected: usize,
    pub sweeps: usize,
}

/// Smooth positive perturbation `f (1 + delta cos(pi x) exp(-|v|^2 / sigma))`.
fn perturb<T: Real>(f: &DistributionField<T>, grid: &PhaseGrid<T>, delta: f64, sigma: f64) -> DistributionField<T> {
    let mut out = f.clone();
    let nt = grid.n_transverse();
    let (delta, sigma) = (T::lit(delta), T::lit(sigma));
    for s in 0..4 {
        for i1 in 0..grid.nv1() {
            for j in 0..grid.n_nodes_x() {
                let c = delta * (T::PI() * grid.x()[j]).cos();
                let row = out.row_mut(s, i1, j);
                for (k, val) in row.iter_mut().enumerate().take(nt) {
                    let v2 = grid.speed_sq(i1 * nt + k);
                    *val *= T::one() + c * (-v2 / sigma).exp();
                }
            }
        }
    }
    out
}

const MAX_REJECTIONS: usize = 64;

/// `max d(Phi f, Phi g) / d(f, g)` over random probe pairs around the solution
/// for each Knudsen number in `taus`.
pub fn estimate_contraction<T: Real>(
    problem: &Problem<'_, T>,
    settings: &SolverSettings,
    taus: &[f64],
) -> Result<Vec<ContractionPoint>> {
    let mut points = Vec::with_capacity(taus.len());
    let root_tol = T::lit(settings.root_tol);
    for &tau in taus {
        if !(tau > 0.0) {
            return Err(Error::invalid("tau", format!("Knudsen number must be > 0, got {tau}")));
        }
        let cfg = problem.cfg.with_knudsen(T::lit(tau));
        let p = Problem { cfg: &cfg, ..*problem };
        let sol = solve(&p, settings, initial_guess(p.table, p.grid), &mut |_, _| Ok(()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        let mut alpha: f64 = 0.0;
        let mut rejected = 0usize;
        let mut used = 0usize;
        while used < settings.probes {
            let mut draw = || {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (sign * rng.random_range(0.01..0.1), rng.random_range(0.5..4.0))
            };
            let (df, sf) = draw();
            let (dg, sg) = draw();
            let f = perturb(&sol.field, p.grid, df, sf);
            let g = perturb(&sol.field, p.grid, dg, sg);
            let inside = omega_membership(&f, p.grid, p.budget)?.passes() && omega_membership(&g, p.grid, p.budget)?.passes();
            let dist = metric(&f, &g, p.grid)?.as_f64();
            if !inside || dist == 0.0 {
                rejected += 1;
                if rejected > MAX_REJECTIONS {
                    return Err(Error::Degenerate(format!(
                        "could not place contraction probes inside the solution set at tau = {tau}"
                    )));
                }
                continue;
            }
            let pf = apply_solution_operator(&f, p.table, p.model, p.grid, &cfg, root_tol)?.field;
            let pg = apply_solution_operator(&g, p.table, p.model, p.grid, &cfg, root_tol)?.field;
            let ratio = metric(&pf, &pg, p.grid)?.as_f64() / dist;
            alpha = alpha.max(ratio);
            used += 1;
        }
        points.push(ContractionPoint {
            tau,
            alpha,
            probes: used,
            rejected,
            sweeps: sol.report.iterations,
        });
    }
    Ok(points)
}

/// `(ln tau + 1) / tau`.
pub fn contraction_law(tau: f64) -> f64 {
    (tau.ln() + 1.0) / tau
}

/// Least-squares fit `alpha ~ C (ln tau + 1) / tau` through the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawFit {
    pub slope: f64,
    /// Largest factor by which a measurement and the fitted law disagree.
    pub max_factor: f64,
}

pub fn fit_contraction_law(points: &[ContractionPoint]) -> LawFit {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for p in points {
        let s = contraction_law(p.tau);
        sxy += s * p.alpha;
        sxx += s * s;
    }
    let slope = sxy / sxx;
    let max_factor = points
        .iter()
        .map(|p| {
            let pred = slope * contraction_law(p.tau);
            (p.alpha / pred).max(pred / p.alpha)
        })
        .fold(1.0, f64::max);
    LawFit { slope, max_factor }
}
