//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use reactive_slab::fields::{global_moments, SpeciesMoments};
use reactive_slab::{MomentSet, PhysicalConfig, PhysicalParams};

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn params(masses: [f64; 4], delta_e: f64, nu_f: f64, nu_b: f64) -> PhysicalParams {
    PhysicalParams {
        masses,
        bond_energies: [0.0, 0.0, 0.5 * delta_e, 0.5 * delta_e],
        chi: [[0.5; 4]; 4],
        nu: [[1.0; 4]; 4],
        nu_forward: nu_f,
        nu_backward: nu_b,
        knudsen: 100.0,
        boltzmann: 1.0,
    }
}

pub fn config(masses: [f64; 4], delta_e: f64, nu_f: f64, nu_b: f64) -> PhysicalConfig<f64> {
    PhysicalConfig::new(&params(masses, delta_e, nu_f, nu_b)).unwrap()
}

/// Moment set from per-species `(n, U, T)`.
pub fn moment_set(cfg: &PhysicalConfig<f64>, n: [f64; 4], u: [[f64; 3]; 4], t: [f64; 4]) -> MomentSet<f64> {
    let species: [SpeciesMoments<f64>; 4] = std::array::from_fn(|i| SpeciesMoments {
        n: n[i],
        rho: cfg.masses[i] * n[i],
        u: u[i],
        t: t[i],
    });
    let global = global_moments(&species, cfg);
    MomentSet { species, global }
}

/// Masses with `m1 + m2 = m3 + m4`.
pub fn random_masses<R: Rng>(rng: &mut R) -> [f64; 4] {
    let m1 = rng.random_range(0.5..4.0);
    let m2 = rng.random_range(0.5..4.0);
    let m3 = rng.random_range(0.2..0.8) * (m1 + m2);
    [m1, m2, m3, m1 + m2 - m3]
}

/// A random physical state of the kind produced by moments of solution-set members.
pub fn random_state<R: Rng>(rng: &mut R, cfg: &PhysicalConfig<f64>, n_range: (f64, f64)) -> MomentSet<f64> {
    let n = std::array::from_fn(|_| rng.random_range(n_range.0..n_range.1));
    let u = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-0.5..0.5)));
    let t = std::array::from_fn(|_| rng.random_range(0.5..2.0));
    moment_set(cfg, n, u, t)
}

pub fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

/// Adaptive Simpson quadrature of `sqrt(t) e^{-t}` on `[x, inf)`.
///
/// The substitution `t = x + s^2` removes the square-root endpoint behaviour;
/// the integrand is negligible beyond `s = 9`.
pub fn gamma_32_oracle(x: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let (l, r) = (simpson(f, a, c), simpson(f, c, b));
        if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
            return l + r + (l + r - whole) / 15.0;
        }
        adapt(f, a, c, l, tol / 2.0, depth - 1) + adapt(f, c, b, r, tol / 2.0, depth - 1)
    }
    let f = |s: f64| 2.0 * s * (x + s * s).sqrt() * (-(x + s * s)).exp();
    adapt(&f, 0.0, 9.0, simpson(&f, 0.0, 9.0), 1e-16, 50)
}

/// Independent transcription of the slow-model frequencies and source.
pub fn slow_reference(m: &MomentSet<f64>, cfg: &PhysicalConfig<f64>) -> ([f64; 4], f64) {
    let x = cfg.delta_e / (cfg.boltzmann * m.global.t);
    let g = 2.0 / std::f64::consts::PI.sqrt() * gamma_32_closed(x);
    let n: Vec<f64> = m.species.iter().map(|s| s.n).collect();
    let mu12 = cfg.masses[0] * cfg.masses[1] / (cfg.masses[0] + cfg.masses[1]);
    let mu34 = cfg.masses[2] * cfg.masses[3] / (cfg.masses[2] + cfg.masses[3]);
    let r = (mu12 / mu34).powf(1.5) * x.exp();
    let el = |i: usize| (0..4).map(|j| cfg.nu[i][j] * n[j]).sum::<f64>();
    let k = cfg.nu_forward;
    let nu = [el(0) + g * k * n[1], el(1) + g * k * n[0], el(2) + g * r * k * n[3], el(3) + g * r * k * n[2]];
    let mass = (cfg.masses[0] * cfg.masses[1] / (cfg.masses[2] * cfg.masses[3])).powf(1.5);
    let s = k * g * (n[2] * n[3] * mass * x.exp() - n[0] * n[1]);
    (nu, s)
}

/// `Gamma(3/2, x)` from its erfc form, evaluated with the `libm` erfc.
pub fn gamma_32_closed(x: f64) -> f64 {
    std::f64::consts::PI.sqrt() / 2.0 * libm::erfc(x.sqrt()) + x.sqrt() * (-x).exp()
}
