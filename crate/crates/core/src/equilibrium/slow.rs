//! Slow-reaction model: collision frequencies, reaction source and the
//! per-species reactive Maxwellian parameters.

use crate::config::PhysicalConfig;
use crate::error::{Error, Result};
use crate::fields::{GlobalMoments, MomentSet};
use crate::scalar::{norm2, Real};

use super::{gamma_ratio, incomplete_gamma_32, scaled_gamma_32};

#[derive(Debug, Clone, PartialEq)]
pub struct SlowEquilibrium<T> {
    pub nu: [T; 4],
    pub source: T,
    pub density: [T; 4],
    pub velocity: [[T; 3]; 4],
    pub temperature: [T; 4],
    /// Mixture moments the parameters were built from.
    pub global: GlobalMoments<T>,
}

fn check_inputs<T: Real>(m: &MomentSet<T>) -> Result<()> {
    for (i, s) in m.species.iter().enumerate() {
        if !(s.n > T::zero()) {
            return Err(Error::Degenerate(format!("species {} density {} is not positive", i + 1, s.n)));
        }
    }
    if !(m.global.t > T::zero()) || !m.global.t.is_finite() {
        return Err(Error::Degenerate(format!("mixture temperature {} is not positive", m.global.t)));
    }
    Ok(())
}

/// `(2/sqrt(pi)) Gamma(3/2, x)` and `(2/sqrt(pi)) e^x Gamma(3/2, x)` at `x = dE / kT`.
fn gamma_factors<T: Real>(m: &MomentSet<T>, cfg: &PhysicalConfig<T>) -> (T, T, T) {
    let x = cfg.delta_e / (cfg.boltzmann * m.global.t);
    let c = T::lit(2.0) / T::PI().sqrt();
    let g = c * incomplete_gamma_32(x).unwrap_or_else(|_| T::nan());
    (x, g, c * scaled_gamma_32(x))
}

fn elastic<T: Real>(m: &MomentSet<T>, cfg: &PhysicalConfig<T>, i: usize) -> T {
    (0..4).map(|j| cfg.nu[i][j] * m.species[j].n).sum()
}

/// Collision frequencies `nu_1 .. nu_4`.
pub fn slow_frequencies<T: Real>(m: &MomentSet<T>, cfg: &PhysicalConfig<T>) -> Result<[T; 4]> {
    check_inputs(m)?;
    let (_, g, gs) = gamma_factors(m, cfg);
    let r = (cfg.mu12() / cfg.mu34()).powf(T::lit(1.5));
    let n = |j: usize| m.species[j].n;
    let k = cfg.nu_forward;
    Ok([
        elastic(m, cfg, 0) + g * k * n(1),
        elastic(m, cfg, 1) + g * k * n(0),
        elastic(m, cfg, 2) + r * gs * k * n(3),
        elastic(m, cfg, 3) + r * gs * k * n(2),
    ])
}

/// Net production rate of species 1 and 2 by the reaction.
pub fn reaction_source<T: Real>(m: &MomentSet<T>, cfg: &PhysicalConfig<T>) -> T {
    let (_, g, gs) = gamma_factors(m, cfg);
    let [m1, m2, m3, m4] = cfg.masses;
    let mass_factor = (m1 * m2 / (m3 * m4)).powf(T::lit(1.5));
    let n = |j: usize| m.species[j].n;
    cfg.nu_forward * (n(2) * n(3) * mass_factor * gs - n(0) * n(1) * g)
}

/// Reactive densities, velocities and temperatures from the moments.
pub fn slow_parameters<T: Real>(
    m: &MomentSet<T>,
    nu: &[T; 4],
    source: T,
    cfg: &PhysicalConfig<T>,
) -> Result<SlowEquilibrium<T>> {
    check_inputs(m)?;
    let k = cfg.boltzmann;
    let (x, _, _) = gamma_factors(m, cfg);
    let ratio = gamma_ratio(x);
    let (two, half, three_half) = (T::lit(2.0), T::lit(0.5), T::lit(1.5));
    let big_m = cfg.total_mass;
    let glob = &m.global;
    let u_mix2 = norm2(&glob.u);

    let mut density = [T::zero(); 4];
    let mut velocity = [[T::zero(); 3]; 4];
    let mut temperature = [T::zero(); 4];
    for i in 0..4 {
        let si = &m.species[i];
        let mi = cfg.masses[i];
        let li = cfg.lambda[i];
        if !(nu[i] > T::zero()) {
            return Err(Error::Degenerate(format!("frequency nu_{} = {} is not positive", i + 1, nu[i])));
        }
        let exch = li * source / nu[i];
        let ni = si.n + exch;

        let mut mom = [T::zero(); 3];
        let mut heat = T::zero();
        let mut work = T::zero();
        for j in 0..4 {
            let sj = &m.species[j];
            let mj = cfg.masses[j];
            let chi_mu = cfg.chi[i][j] * cfg.reduced[i][j];
            let nn = si.n * sj.n;
            let du = crate::scalar::sub(&sj.u, &si.u);
            for a in 0..3 {
                mom[a] += chi_mu * nn * du[a];
            }
            let c = chi_mu / (mi + mj) * nn;
            heat += c * (sj.t - si.t);
            let flow = [
                mi * si.u[0] + mj * sj.u[0],
                mi * si.u[1] + mj * sj.u[1],
                mi * si.u[2] + mj * sj.u[2],
            ];
            work += c * crate::scalar::dot(&flow, &du);
        }

        if !(ni > T::zero()) || !ni.is_finite() {
            return Err(Error::Breakdown {
                species: i + 1,
                node: 0,
                sweep: None,
                message: format!("reactive density n_{} = {ni} is not positive", i + 1),
            });
        }

        let mut ui = [T::zero(); 3];
        for a in 0..3 {
            let p = mi * si.n * si.u[a] + two / nu[i] * mom[a] + exch * mi * glob.u[a];
            ui[a] = p / (mi * ni);
        }

        let reactive = half * mi * u_mix2 + three_half * k * glob.t + (big_m - mi) / big_m * k * glob.t * ratio
            - (T::one() - li) / two * (big_m - mi) / big_m * cfg.delta_e;
        let energy = three_half * si.n * k * si.t - half * mi * (ni * norm2(&ui) - si.n * norm2(&si.u))
            + T::lit(6.0) * k / nu[i] * heat
            + two / nu[i] * work
            + exch * reactive;
        let ti = energy / (three_half * ni * k);
        if !(ti > T::zero()) || !ti.is_finite() {
            return Err(Error::Breakdown {
                species: i + 1,
                node: 0,
                sweep: None,
                message: format!("reactive temperature T_{} = {ti} is not positive", i + 1),
            });
        }
        density[i] = ni;
        velocity[i] = ui;
        temperature[i] = ti;
    }
    Ok(SlowEquilibrium {
        nu: *nu,
        source,
        density,
        velocity,
        temperature,
        global: *glob,
    })
}

/// Frequencies, source and parameters in one call.
pub fn slow_equilibrium<T: Real>(m: &MomentSet<T>, cfg: &PhysicalConfig<T>) -> Result<SlowEquilibrium<T>> {
    let nu = slow_frequencies(m, cfg)?;
    let s = reaction_source(m, cfg);
    slow_parameters(m, &nu, s, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PhysicalParams;
    use crate::fields::{global_moments, SpeciesMoments};

    fn cfg(nu_forward: f64) -> PhysicalConfig<f64> {
        PhysicalConfig::new(&PhysicalParams {
            masses: [1.0; 4],
            bond_energies: [0.0, 0.0, 0.5, 0.5],
            chi: [[0.5; 4]; 4],
            nu: [[1.0; 4]; 4],
            nu_forward,
            nu_backward: 0.0,
            knudsen: 100.0,
            boltzmann: 1.0,
        })
        .unwrap()
    }

    fn moments(c: &PhysicalConfig<f64>, n: [f64; 4], u: [f64; 4], t: [f64; 4]) -> MomentSet<f64> {
        let species: [SpeciesMoments<f64>; 4] = std::array::from_fn(|i| SpeciesMoments {
            n: n[i],
            rho: c.masses[i] * n[i],
            u: [u[i], 0.0, 0.0],
            t: t[i],
        });
        MomentSet {
            species,
            global: global_moments(&species, c),
        }
    }

    #[test]
    fn elastic_only_frequencies() {
        let c = cfg(0.0);
        let m = moments(&c, [1.0; 4], [0.0; 4], [1.0; 4]);
        assert_eq!(slow_frequencies(&m, &c).unwrap(), [4.0; 4]);
        assert_eq!(reaction_source(&m, &c), 0.0);
    }

    #[test]
    fn frequencies_against_direct_transcription() {
        let c = cfg(0.1);
        let m = moments(&c, [1.0; 4], [0.0; 4], [1.0; 4]);
        let nu = slow_frequencies(&m, &c).unwrap();
        // dE/kT = 1, equal reduced masses
        let gamma = 0.5 * std::f64::consts::PI.sqrt() * libm::erfc(1.0) + (-1.0f64).exp();
        let g = 2.0 / std::f64::consts::PI.sqrt() * gamma;
        let expect12 = 4.0 + g * 0.1;
        let expect34 = 4.0 + g * 1.0f64.exp() * 0.1;
        assert!((nu[0] - expect12).abs() < 1e-14 && (nu[1] - expect12).abs() < 1e-14);
        assert!((nu[2] - expect34).abs() < 1e-14 && (nu[3] - expect34).abs() < 1e-14);
    }

    #[test]
    fn mass_action_balance_gives_no_source() {
        let c = cfg(0.3);
        // equal masses: balance when n1 n2 = n3 n4 e^{dE/kT}
        let t = 1.0;
        let n3n4 = 0.5 * 0.8;
        let n1 = 1.2;
        let n2 = n3n4 * (c.delta_e / t).exp() / n1;
        let m = moments(&c, [n1, n2, 0.5, 0.8], [0.0; 4], [t; 4]);
        let s = reaction_source(&m, &c);
        assert!(s.abs() < 1e-15, "{s}");
    }

    #[test]
    fn no_exchange_returns_inputs() {
        let c = cfg(0.0);
        let m = moments(&c, [1.0, 2.0, 0.5, 0.7], [0.2; 4], [1.3; 4]);
        let e = slow_equilibrium(&m, &c).unwrap();
        for i in 0..4 {
            assert!((e.density[i] - m.species[i].n).abs() < 1e-15);
            assert!((e.velocity[i][0] - 0.2).abs() < 1e-15);
            assert!((e.temperature[i] - 1.3).abs() < 1e-14);
        }
    }

    #[test]
    fn temperature_relaxation_formula() {
        let c = cfg(0.0);
        let n = [1.0, 2.0, 0.5, 0.7];
        let t = [1.0, 1.5, 0.8, 1.2];
        let m = moments(&c, n, [0.0; 4], t);
        let e = slow_equilibrium(&m, &c).unwrap();
        for i in 0..4 {
            let mut sum = 0.0;
            for j in 0..4 {
                sum += c.chi[i][j] * c.reduced[i][j] / (c.masses[i] + c.masses[j]) * n[i] * n[j] * (t[j] - t[i]);
            }
            let expected = t[i] + 4.0 / (n[i] * e.nu[i]) * sum;
            assert!((e.temperature[i] - expected).abs() < 1e-14, "{i}");
            assert_eq!(e.velocity[i], [0.0; 3]);
        }
    }

    #[test]
    fn exchange_identity() {
        let c = cfg(0.05);
        let m = moments(&c, [1.0, 0.6, 0.4, 0.9], [0.1, -0.2, 0.05, 0.0], [1.0, 1.4, 0.7, 1.1]);
        let e = slow_equilibrium(&m, &c).unwrap();
        for i in 0..4 {
            let lhs = e.nu[i] * (e.density[i] - m.species[i].n);
            let rhs = c.lambda[i] * e.source;
            assert!((lhs - rhs).abs() <= 1e-13 * e.source.abs().max(e.nu[i] * m.species[i].n));
        }
    }

    #[test]
    fn huge_reaction_rate_breaks_down() {
        let mut p = PhysicalParams {
            masses: [1.0; 4],
            bond_energies: [0.0, 0.0, 2.5, 2.5],
            chi: [[0.5; 4]; 4],
            nu: [[1.0; 4]; 4],
            nu_forward: 1e4,
            nu_backward: 0.0,
            knudsen: 1.0,
            boltzmann: 1.0,
        };
        p.nu_forward = 1e4;
        let c = PhysicalConfig::new(&p).unwrap();
        let m = moments(&c, [1.0, 1.0, 0.01, 0.01], [0.0; 4], [1.0; 4]);
        let err = slow_equilibrium(&m, &c).unwrap_err();
        assert!(matches!(err, Error::Breakdown { .. }), "{err}");
    }
}
