//! A-priori moment and equilibrium bounds expressed in boundary budget
//! constants, checked against computed profiles.

use std::fmt;
use std::io::Write;

use crate::config::{BoundaryBudget, PhysicalConfig};
use crate::equilibrium::fast::{constraint_bracket, root_target, solve_log_functional, LogArgs};
use crate::equilibrium::{incomplete_gamma_32, Model, NodeParams};
use crate::fields::MomentSet;
use crate::scalar::{norm2, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Observed maximum must not exceed the bound.
    Upper,
    /// Observed minimum must not fall below the bound.
    Lower,
    /// Bound with no explicit constant; only positivity and finiteness are checked.
    Qualitative,
}

impl BoundKind {
    fn label(self) -> &'static str {
        match self {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
            BoundKind::Qualitative => "qualitative",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundEntry {
    pub name: String,
    /// 1-based species index, `None` for mixture quantities.
    pub species: Option<usize>,
    pub kind: BoundKind,
    pub bound: f64,
    /// Extremum over the spatial nodes in the direction that matters.
    pub observed: f64,
    /// Nonnegative when the bound holds.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundReport {
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn passes(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn find(&self, name: &str, species: Option<usize>) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.name == name && e.species == species)
    }

    pub fn extend(&mut self, other: BoundReport) {
        self.entries.extend(other.entries);
    }

    /// Single failing entry recording that the equilibrium could not be formed.
    pub fn breakdown(message: &str) -> Self {
        BoundReport {
            entries: vec![BoundEntry {
                name: format!("equilibrium breakdown: {message}"),
                species: None,
                kind: BoundKind::Qualitative,
                bound: 0.0,
                observed: f64::NAN,
                margin: f64::NAN,
                pass: false,
            }],
        }
    }

    fn upper(&mut self, name: &str, species: Option<usize>, bound: f64, values: impl Iterator<Item = f64>) {
        let observed = values.fold(f64::NEG_INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        let margin = bound - observed;
        self.entries.push(BoundEntry {
            name: name.to_string(),
            species,
            kind: BoundKind::Upper,
            bound,
            observed,
            margin,
            pass: margin >= 0.0,
        });
    }

    fn lower(&mut self, name: &str, species: Option<usize>, bound: f64, values: impl Iterator<Item = f64>) {
        let observed = values.fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.min(b) });
        let margin = observed - bound;
        self.entries.push(BoundEntry {
            name: name.to_string(),
            species,
            kind: BoundKind::Lower,
            bound,
            observed,
            margin,
            pass: margin >= 0.0,
        });
    }

    fn positive(&mut self, name: &str, species: Option<usize>, values: impl Iterator<Item = f64>) {
        let observed = values.fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.min(b) });
        self.entries.push(BoundEntry {
            name: name.to_string(),
            species,
            kind: BoundKind::Qualitative,
            bound: 0.0,
            observed,
            margin: observed,
            pass: observed > 0.0 && observed.is_finite(),
        });
    }

    fn finite(&mut self, name: &str, species: Option<usize>, values: impl Iterator<Item = f64>) {
        let observed = values.fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b.abs()) });
        self.entries.push(BoundEntry {
            name: name.to_string(),
            species,
            kind: BoundKind::Qualitative,
            bound: f64::INFINITY,
            observed,
            margin: f64::INFINITY,
            pass: observed.is_finite(),
        });
    }

    /// Fixed-width text table, one row per bound.
    pub fn write_table<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "{:<40} {:>7} {:>11} {:>24} {:>24} {:>24} {:>6}",
            "bound", "species", "kind", "bound_value", "observed", "margin", "status"
        )?;
        for e in &self.entries {
            let sp = e.species.map_or("-".to_string(), |s| s.to_string());
            writeln!(
                w,
                "{:<40} {:>7} {:>11} {:>24.16e} {:>24.16e} {:>24.16e} {:>6}",
                e.name,
                sp,
                e.kind.label(),
                e.bound,
                e.observed,
                e.margin,
                if e.pass { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        self.write_table(&mut buf).map_err(|_| fmt::Error)?;
        f.write_str(&String::from_utf8_lossy(&buf))
    }
}

/// `(a_{i,u} + c_{i,u}) / (2 a_{i,l})`, the bound on `|U^(i)|`.
pub fn species_velocity_bound<T: Real>(budget: &BoundaryBudget<T>, i: usize) -> T {
    (budget.a_u[i] + budget.c_u[i]) / (T::lit(2.0) * budget.a_l[i])
}

/// `[m_i gamma_l / (3k a_{i,u}^2), m_i c_{i,u} / (3k a_{i,l})]`, the bracket of `T^(i)`.
pub fn species_temperature_bracket<T: Real>(budget: &BoundaryBudget<T>, cfg: &PhysicalConfig<T>, i: usize) -> (T, T) {
    let three_k = T::lit(3.0) * cfg.boltzmann;
    let m = cfg.masses[i];
    (
        m * budget.gamma_min / (three_k * budget.a_u[i] * budget.a_u[i]),
        m * budget.c_u[i] / (three_k * budget.a_l[i]),
    )
}

/// `R = max_i (a_{i,u} + c_{i,u}) / (2 a_{i,l})`, bounding `|U|` and `|U~|`.
pub fn mixture_velocity_bound<T: Real>(budget: &BoundaryBudget<T>) -> T {
    (0..4)
        .map(|i| species_velocity_bound(budget, i))
        .fold(T::zero(), |a, b| a.max(b))
}

fn two_over_sqrt_pi<T: Real>() -> T {
    T::lit(2.0) / T::PI().sqrt()
}

/// Explicit lower bound on the slow reactive density `n_i`, `i` in {0, 1}.
pub fn slow_density_lower_bound<T: Real>(budget: &BoundaryBudget<T>, cfg: &PhysicalConfig<T>, i: usize) -> T {
    assert!(i < 2, "explicit density lower bound exists for species 1 and 2");
    if cfg.nu_forward == T::zero() {
        return T::zero();
    }
    let k = cfg.boltzmann;
    let de = cfg.delta_e;
    let g_u = two_over_sqrt_pi::<T>() * incomplete_gamma_32(de / (k * budget.t_upper)).unwrap_or(T::zero());
    let g_l = two_over_sqrt_pi::<T>() * incomplete_gamma_32(de / (k * budget.t_lower)).unwrap_or(T::zero());
    let el: T = cfg.nu[i].iter().copied().sum();
    let [m1, m2, m3, m4] = cfg.masses;
    let mass = (m1 * m2 / (m3 * m4)).powf(T::lit(1.5));
    cfg.nu_forward * g_l * budget.a_min * budget.a_min * mass * (de / (k * budget.t_upper)).exp()
        / ((el + g_u * cfg.nu_forward) * budget.a_max)
}

/// Upper bound on `|S|` for the slow model.
pub fn slow_source_bound<T: Real>(budget: &BoundaryBudget<T>, cfg: &PhysicalConfig<T>) -> T {
    if cfg.nu_forward == T::zero() {
        return T::zero();
    }
    let ratio = (cfg.mu12() / cfg.mu34()).powf(T::lit(1.5));
    let x = cfg.delta_e / (cfg.boltzmann * budget.t_lower);
    cfg.nu_forward * (ratio * x.exp() + T::one()) * budget.a_max * budget.a_max
}

/// Upper bound on the slow reactive density `n_i`.
pub fn slow_density_upper_bound<T: Real>(budget: &BoundaryBudget<T>, cfg: &PhysicalConfig<T>, i: usize) -> T {
    let el: T = cfg.nu[i].iter().copied().sum();
    budget.a_u[i] + slow_source_bound(budget, cfg) / (el * budget.a_min)
}

/// `(nu^m_i, nu^M_i)` brackets of the fast collision frequencies.
pub fn fast_frequency_bracket<T: Real>(budget: &BoundaryBudget<T>, cfg: &PhysicalConfig<T>) -> [(T, T); 4] {
    let back = (cfg.mu34() / cfg.mu12()).powf(T::lit(1.5)) * cfg.nu_backward;
    std::array::from_fn(|i| {
        let lo: T = (0..4).map(|j| cfg.nu[i][j] * budget.a_l[j]).sum();
        let hi: T = (0..4).map(|j| cfg.nu[i][j] * budget.a_u[j]).sum();
        let extra = match i {
            0 => back * budget.a_u[1],
            1 => back * budget.a_u[0],
            2 => cfg.nu_backward * budget.a_u[3],
            _ => cfg.nu_backward * budget.a_u[2],
        };
        (lo, hi + extra)
    })
}

/// Largest temperature a member of the solution set can carry, species or mixture.
pub fn temperature_ceiling<T: Real>(budget: &BoundaryBudget<T>, cfg: &PhysicalConfig<T>) -> T {
    (0..4)
        .map(|i| species_temperature_bracket(budget, cfg, i).1)
        .fold(budget.t_upper, |a, b| a.max(b))
}

/// Lower and upper values of `n~_1` obtained by solving the log functional at
/// the extreme budget arguments.
pub fn fast_density_sandwich<T: Real>(
    budget: &BoundaryBudget<T>,
    cfg: &PhysicalConfig<T>,
    tol: T,
) -> crate::error::Result<(T, T)> {
    let br = fast_frequency_bracket(budget, cfg);
    let nu_lo = br.map(|b| b.0);
    let nu_hi = br.map(|b| b.1);
    let r2 = T::lit(2.0) * mixture_velocity_bound(budget);
    let low_args = LogArgs {
        x: budget.a_u,
        y: budget.a_l,
        mu: nu_hi,
        eta: nu_lo,
        alpha: [temperature_ceiling(budget, cfg); 4],
        beta: [r2; 4],
    };
    let high_args = LogArgs {
        x: budget.a_l,
        y: budget.a_u,
        mu: nu_lo,
        eta: nu_hi,
        alpha: [budget.t_lower; 4],
        beta: [T::zero(); 4],
    };
    let target = root_target(cfg);
    let (lo, _) = solve_log_functional(&low_args, target, cfg, tol)?;
    let (hi, _) = solve_log_functional(&high_args, target, cfg, tol)?;
    Ok((lo, hi))
}

fn f64s<T: Real>(it: impl Iterator<Item = T>) -> impl Iterator<Item = f64> {
    it.map(|v| v.as_f64())
}

/// Velocity and temperature bounds on the single-species moments.
pub fn check_species_bounds<T: Real>(
    moments: &[MomentSet<T>],
    budget: &BoundaryBudget<T>,
    cfg: &PhysicalConfig<T>,
) -> BoundReport {
    let mut r = BoundReport::default();
    for i in 0..4 {
        let sp = Some(i + 1);
        r.upper(
            "species |U^(i)|",
            sp,
            species_velocity_bound(budget, i).as_f64(),
            f64s(moments.iter().map(|m| norm2(&m.species[i].u).sqrt())),
        );
        let (t_lo, t_hi) = species_temperature_bracket(budget, cfg, i);
        r.lower("species T^(i) lower", sp, t_lo.as_f64(), f64s(moments.iter().map(|m| m.species[i].t)));
        r.upper("species T^(i) upper", sp, t_hi.as_f64(), f64s(moments.iter().map(|m| m.species[i].t)));
    }
    r
}

/// Mixture bounds and the bounds on the equilibrium parameters of `model`.
pub fn check_global_and_equilibrium_bounds<T: Real>(
    moments: &[MomentSet<T>],
    params: &[NodeParams<T>],
    budget: &BoundaryBudget<T>,
    cfg: &PhysicalConfig<T>,
    model: Model,
    root_tol: T,
) -> BoundReport {
    let mut r = BoundReport::default();
    let big_r = mixture_velocity_bound(budget).as_f64();
    r.upper("mixture |U|", None, big_r, f64s(moments.iter().map(|m| norm2(&m.global.u).sqrt())));
    r.lower("mixture T lower", None, budget.t_lower.as_f64(), f64s(moments.iter().map(|m| m.global.t)));
    r.upper("mixture T upper", None, budget.t_upper.as_f64(), f64s(moments.iter().map(|m| m.global.t)));

    match model {
        Model::Slow => {
            let eqs: Vec<_> = params
                .iter()
                .filter_map(|p| match p {
                    NodeParams::Slow(e) => Some(e),
                    NodeParams::Fast(_) => None,
                })
                .collect();
            for i in 0..2 {
                r.lower(
                    "slow n_i lower",
                    Some(i + 1),
                    slow_density_lower_bound(budget, cfg, i).as_f64(),
                    f64s(eqs.iter().map(|e| e.density[i])),
                );
            }
            r.upper(
                "slow |S| upper",
                None,
                slow_source_bound(budget, cfg).as_f64(),
                f64s(eqs.iter().map(|e| e.source.abs())),
            );
            for i in 0..4 {
                let sp = Some(i + 1);
                r.upper(
                    "slow n_i upper",
                    sp,
                    slow_density_upper_bound(budget, cfg, i).as_f64(),
                    f64s(eqs.iter().map(|e| e.density[i])),
                );
                r.positive("slow n_i positive", sp, f64s(eqs.iter().map(|e| e.density[i])));
                r.positive("slow T_i positive", sp, f64s(eqs.iter().map(|e| e.temperature[i])));
                r.finite("slow |U_i| finite", sp, f64s(eqs.iter().map(|e| norm2(&e.velocity[i]).sqrt())));
                r.finite("slow T_i finite", sp, f64s(eqs.iter().map(|e| e.temperature[i])));
            }
        }
        Model::Fast => {
            let eqs: Vec<_> = params
                .iter()
                .filter_map(|p| match p {
                    NodeParams::Fast(e) => Some(e),
                    NodeParams::Slow(_) => None,
                })
                .collect();
            let br = fast_frequency_bracket(budget, cfg);
            for i in 0..4 {
                let sp = Some(i + 1);
                r.lower("fast nu~_i lower", sp, br[i].0.as_f64(), f64s(eqs.iter().map(|e| e.nu[i])));
                r.upper("fast nu~_i upper", sp, br[i].1.as_f64(), f64s(eqs.iter().map(|e| e.nu[i])));
                r.positive("fast n~_i positive", sp, f64s(eqs.iter().map(|e| e.density[i])));
            }
            r.upper("fast |U~|", None, big_r, f64s(eqs.iter().map(|e| norm2(&e.velocity).sqrt())));
            r.positive("fast T~ positive", None, f64s(eqs.iter().map(|e| e.temperature)));

            // signed distance of n~_1 to the nearer end of its constraint interval
            let inside = moments.iter().zip(&eqs).map(|(m, e)| {
                match constraint_bracket(m, &e.nu, &e.velocity, cfg) {
                    Ok((lo, hi)) => (e.density[0] - lo).min(hi - e.density[0]).as_f64(),
                    Err(_) => f64::NAN,
                }
            });
            r.positive("fast n~_1 inside constraint interval", None, inside);

            match fast_density_sandwich(budget, cfg, root_tol) {
                Ok((lo, hi)) => {
                    r.lower("fast n~_1 sandwich lower", Some(1), lo.as_f64(), f64s(eqs.iter().map(|e| e.density[0])));
                    r.upper("fast n~_1 sandwich upper", Some(1), hi.as_f64(), f64s(eqs.iter().map(|e| e.density[0])));
                }
                Err(e) => r.entries.push(BoundEntry {
                    name: format!("fast n~_1 sandwich unavailable: {e}"),
                    species: Some(1),
                    kind: BoundKind::Qualitative,
                    bound: f64::NAN,
                    observed: f64::NAN,
                    margin: f64::NAN,
                    pass: false,
                }),
            }
        }
    }
    r
}
