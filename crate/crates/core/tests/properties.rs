mod common;

use proptest::prelude::*;

use common::*;
use reactive_slab::diagnostics::fast_density_sandwich;
use reactive_slab::equilibrium::fast::{functional_domain, log_functional, root_target, solve_log_functional, LogArgs};
use reactive_slab::equilibrium::slow::{slow_equilibrium, SlowEquilibrium};
use reactive_slab::equilibrium::NodeParams;
use reactive_slab::fields::{metric, GlobalMoments};
use reactive_slab::transport::{apply_mild_operator, FrequencyProfile};
use reactive_slab::{compute_boundary_budget, BoundaryData, DistributionField, Grid, InflowSpec};

fn small_grid() -> Grid {
    Grid::new(6, 8, 4, 5.0).unwrap()
}

fn field_from(grid: &Grid, seed: &[f64]) -> DistributionField<f64> {
    DistributionField::from_fn(grid, |s, j, v| {
        let a = seed[(s + j) % seed.len()];
        a * (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / (1.0 + s as f64)).exp()
    })
}

fn inflow(density: f64, drift: f64, temperature: f64) -> InflowSpec<f64> {
    InflowSpec::HalfMaxwellian {
        density,
        drift,
        temperature,
    }
}

fn args_strategy() -> impl Strategy<Value = LogArgs<f64>> {
    let arr = |lo: f64, hi: f64| prop::array::uniform4(lo..hi);
    (arr(0.3, 2.0), arr(0.3, 2.0), arr(0.5, 2.0), arr(0.5, 2.0), arr(0.5, 2.0), arr(0.0, 0.5)).prop_map(
        |(x, y, mu, eta, alpha, beta)| LogArgs {
            x,
            y,
            mu,
            eta,
            alpha,
            beta,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metric_is_a_pseudo_metric(
        a in prop::collection::vec(0.0f64..3.0, 5),
        b in prop::collection::vec(0.0f64..3.0, 5),
        c in prop::collection::vec(0.0f64..3.0, 5),
    ) {
        let grid = small_grid();
        let (f, g, h) = (field_from(&grid, &a), field_from(&grid, &b), field_from(&grid, &c));
        let d = |p: &DistributionField<f64>, q: &DistributionField<f64>| metric(p, q, &grid).unwrap();
        prop_assert_eq!(d(&f, &f), 0.0);
        prop_assert!(d(&f, &g) >= 0.0);
        prop_assert!((d(&f, &g) - d(&g, &f)).abs() <= 1e-14 * d(&f, &g).max(1e-300));
        prop_assert!(d(&f, &h) <= (d(&f, &g) + d(&g, &h)) * (1.0 + 1e-13));
    }

    #[test]
    fn slow_exchange_and_mass_balance(
        seed in any::<u64>(),
        delta_e in 0.2f64..2.0,
        nu_f in 0.0f64..0.2,
    ) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cfg = config(random_masses(&mut rng), delta_e, nu_f, 0.0);
        let m = random_state(&mut rng, &cfg, (0.3, 2.0));
        let eq = slow_equilibrium(&m, &cfg).unwrap();
        for i in 0..4 {
            let lhs = eq.nu[i] * (eq.density[i] - m.species[i].n);
            prop_assert!(rel(lhs, cfg.lambda[i] * eq.source, eq.nu[i] * m.species[i].n) < 1e-12);
            prop_assert!(eq.nu[i] > 0.0);
        }
        // total mass is unchanged by the reaction
        let mass_shift: f64 = (0..4).map(|i| cfg.masses[i] * eq.nu[i] * (eq.density[i] - m.species[i].n)).sum();
        let scale: f64 = (0..4).map(|i| cfg.masses[i] * eq.nu[i] * m.species[i].n).sum();
        prop_assert!(mass_shift.abs() <= 1e-12 * scale);
    }

    #[test]
    fn log_functional_increases_in_the_root_variable(args in args_strategy(), delta_e in 0.2f64..3.0) {
        let cfg = config([1.0, 2.0, 1.5, 1.5], delta_e, 0.0, 0.0);
        let (lo, hi) = functional_domain(&args, &cfg);
        prop_assume!(hi > lo);
        let mut prev = f64::NEG_INFINITY;
        for s in 1..40 {
            let z = lo + (hi - lo) * s as f64 / 40.0;
            let v = log_functional(z, &args, &cfg);
            prop_assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn root_moves_in_the_expected_direction(
        args in args_strategy(),
        delta_e in 0.2f64..3.0,
        which in 0usize..4,
        bump in 1.05f64..1.5,
    ) {
        let cfg = config([1.0, 2.0, 1.5, 1.5], delta_e, 0.0, 0.0);
        let target = root_target(&cfg);
        let (z0, _) = solve_log_functional(&args, target, &cfg, 1e-13).unwrap();
        let mut checks = Vec::new();
        // larger x, alpha or beta raise the functional, so the root falls
        let mut a = args;
        a.x[which] *= bump;
        checks.push((a, -1.0));
        let mut a = args;
        a.alpha[which] *= bump;
        checks.push((a, -1.0));
        let mut a = args;
        a.beta[which] += 0.1;
        checks.push((a, -1.0));
        // larger y lowers it, so the root rises
        let mut a = args;
        a.y[which] *= bump;
        checks.push((a, 1.0));
        for (a, sign) in checks {
            let (z1, _) = solve_log_functional(&a, target, &cfg, 1e-13).unwrap();
            prop_assert!(sign * (z1 - z0) >= -1e-12 * z0, "z0 = {}, z1 = {}, sign = {}", z0, z1, sign);
        }
    }

    #[test]
    fn budget_scales_with_inflow_density(scale in 0.1f64..10.0, t in 0.5f64..2.0, drift in -0.3f64..0.3) {
        let cfg = config([1.0, 2.0, 1.5, 1.5], 1.0, 0.05, 0.05);
        let grid = Grid::new(4, 24, 12, 8.0).unwrap();
        let make = |c: f64| BoundaryData {
            left: [inflow(c, drift, t), inflow(0.5 * c, 0.0, 1.0), inflow(c, 0.1, t), inflow(0.8 * c, 0.0, 1.2)],
            right: [inflow(0.7 * c, -drift, t), inflow(c, 0.0, 1.0), inflow(0.6 * c, 0.0, t), inflow(c, -0.1, 0.9)],
        };
        let b1 = compute_boundary_budget(&make(1.0).tabulate(&grid, &cfg).unwrap(), &cfg, &grid).unwrap();
        let bc = compute_boundary_budget(&make(scale).tabulate(&grid, &cfg).unwrap(), &cfg, &grid).unwrap();
        for i in 0..4 {
            prop_assert!(rel(bc.a_u[i], scale * b1.a_u[i], bc.a_u[i]) < 1e-12);
            prop_assert!(rel(bc.c_u[i], scale * b1.c_u[i], bc.c_u[i]) < 1e-12);
            prop_assert!(rel(bc.gamma[i], scale * scale * b1.gamma[i], bc.gamma[i]) < 1e-12);
        }
        prop_assert!(rel(bc.t_lower, b1.t_lower, b1.t_lower) < 1e-12);
        prop_assert!(rel(bc.t_upper, b1.t_upper, b1.t_upper) < 1e-12);

        let (lo, hi) = fast_density_sandwich(&bc, &cfg, 1e-12).unwrap();
        prop_assert!(lo > 0.0 && lo <= hi, "sandwich ({}, {})", lo, hi);
    }

    #[test]
    fn transport_preserves_positivity(
        nu in prop::array::uniform4(0.01f64..20.0),
        n in 0.1f64..3.0,
        u in -0.5f64..0.5,
        t in 0.3f64..3.0,
        dens in prop::array::uniform4(0.01f64..3.0),
        tau in 0.1f64..1e4,
    ) {
        let cfg = config([1.0; 4], 1.0, 0.0, 0.0).with_knudsen(tau);
        let grid = Grid::new(8, 16, 8, 6.0).unwrap();
        let bd = BoundaryData {
            left: dens.map(|d| inflow(d, 0.1, 1.0)),
            right: dens.map(|d| inflow(0.5 * d, -0.1, 0.8)),
        };
        let table = bd.tabulate(&grid, &cfg).unwrap();
        let node = NodeParams::Slow(SlowEquilibrium {
            nu,
            source: 0.0,
            density: [n; 4],
            velocity: [[u, 0.0, 0.0]; 4],
            temperature: [t; 4],
            global: GlobalMoments { n: 4.0 * n, rho: 4.0 * n, u: [u, 0.0, 0.0], t },
        });
        let params = vec![node; grid.n_nodes_x()];
        let freq = FrequencyProfile::from_params(&params, &grid).unwrap();
        let f = apply_mild_operator(&table, &params, &freq, &grid, &cfg).unwrap();
        prop_assert!(f.as_slice().iter().all(|&x| x > 0.0 && x.is_finite()));
    }
}
