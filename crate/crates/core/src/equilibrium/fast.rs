//! Fast-reaction model: frequencies, the implicit equation for the reactive
//! density of species 1, and the shared reactive velocity and temperature.
//!
//! The implicit equation is solved in logarithmic form through the functional
//! `L(z)` over the argument groups `(x, y, mu, eta, alpha, beta)`. The model
//! itself uses `x = y = n`, `mu = eta = nu~`, `alpha = T^(i)` and
//! `beta = |U^(i) - U~|`; the general form is exposed for sensitivity checks
//! and for the budget sandwich of the root.

use crate::config::PhysicalConfig;
use crate::error::{Error, Result};
use crate::fields::MomentSet;
use crate::scalar::{norm2, sub, Real};

/// Root-solve bookkeeping reported with each fast equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootDiagnostics<T> {
    pub lo: T,
    pub hi: T,
    pub iterations: usize,
    pub residual: T,
    /// Set when the residual tolerance sits below the rounding floor of `L`
    /// and the root was accepted at that floor instead.
    pub floor_limited: bool,
}

impl<T: Real> Default for RootDiagnostics<T> {
    fn default() -> Self {
        RootDiagnostics {
            lo: T::zero(),
            hi: T::zero(),
            iterations: 0,
            residual: T::zero(),
            floor_limited: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FastEquilibrium<T> {
    pub nu: [T; 4],
    pub density: [T; 4],
    pub velocity: [T; 3],
    pub temperature: T,
    pub root: RootDiagnostics<T>,
}

fn check_inputs<T: Real>(m: &MomentSet<T>) -> Result<()> {
    for (i, s) in m.species.iter().enumerate() {
        if !(s.n > T::zero()) || !(s.t > T::zero()) {
            return Err(Error::Degenerate(format!(
                "species {} has n = {}, T = {}; both must be positive",
                i + 1,
                s.n,
                s.t
            )));
        }
    }
    if !(m.global.t > T::zero()) {
        return Err(Error::Degenerate(format!("mixture temperature {} is not positive", m.global.t)));
    }
    Ok(())
}

/// Collision frequencies `nu~_1 .. nu~_4`.
pub fn fast_frequencies<T: Real>(m: &MomentSet<T>, cfg: &PhysicalConfig<T>) -> Result<[T; 4]> {
    check_inputs(m)?;
    let n = |j: usize| m.species[j].n;
    let el = |i: usize| -> T { (0..4).map(|j| cfg.nu[i][j] * n(j)).sum() };
    let x = cfg.delta_e / (cfg.boltzmann * m.global.t);
    let r = (cfg.mu34() / cfg.mu12()).powf(T::lit(1.5)) * (-x).exp() * cfg.nu_backward;
    Ok([
        el(0) + r * n(1),
        el(1) + r * n(0),
        el(2) + cfg.nu_backward * n(3),
        el(3) + cfg.nu_backward * n(2),
    ])
}

/// Shared reactive velocity `sum nu~ m n U / sum nu~ m n`.
pub fn mixture_velocity<T: Real>(m: &MomentSet<T>, nu: &[T; 4], cfg: &PhysicalConfig<T>) -> [T; 3] {
    let mut num = [T::zero(); 3];
    let mut den = T::zero();
    for i in 0..4 {
        let w = nu[i] * cfg.masses[i] * m.species[i].n;
        for a in 0..3 {
            num[a] += w * m.species[i].u[a];
        }
        den += w;
    }
    num.map(|c| c / den)
}

/// Reaction-free energy content `sum nu~ n [m (|U|^2 - |U~|^2)/2 + 3kT/2]`.
fn energy_base<T: Real>(m: &MomentSet<T>, nu: &[T; 4], u_tilde: &[T; 3], cfg: &PhysicalConfig<T>) -> T {
    let ut2 = norm2(u_tilde);
    let (half, th) = (T::lit(0.5), T::lit(1.5));
    (0..4)
        .map(|i| {
            let s = &m.species[i];
            nu[i] * s.n * (half * cfg.masses[i] * (norm2(&s.u) - ut2) + th * cfg.boltzmann * s.t)
        })
        .sum()
}

/// Candidate reactive temperature `F(x)`; linear in `x`.
pub fn f_of_x<T: Real>(
    x: T,
    m: &MomentSet<T>,
    nu: &[T; 4],
    u_tilde: &[T; 3],
    cfg: &PhysicalConfig<T>,
) -> Result<T> {
    let denom = T::lit(1.5) * cfg.boltzmann * (0..4).map(|i| nu[i] * m.species[i].n).sum::<T>();
    let t = (energy_base(m, nu, u_tilde, cfg) + cfg.delta_e * nu[0] * (x - m.species[0].n)) / denom;
    if !(t > T::zero()) {
        return Err(Error::Breakdown {
            species: 1,
            node: 0,
            sweep: None,
            message: format!("reactive temperature F({x}) = {t} is not positive"),
        });
    }
    Ok(t)
}

/// Argument groups of the logarithmic functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogArgs<T> {
    pub x: [T; 4],
    pub y: [T; 4],
    pub mu: [T; 4],
    pub eta: [T; 4],
    pub alpha: [T; 4],
    pub beta: [T; 4],
}

impl<T: Real> LogArgs<T> {
    /// Arguments of the model equation at the given state.
    pub fn from_state(m: &MomentSet<T>, nu: &[T; 4], u_tilde: &[T; 3]) -> Self {
        let n = std::array::from_fn(|i| m.species[i].n);
        LogArgs {
            x: n,
            y: n,
            mu: *nu,
            eta: *nu,
            alpha: std::array::from_fn(|i| m.species[i].t),
            beta: std::array::from_fn(|i| norm2(&sub(&m.species[i].u, u_tilde)).sqrt()),
        }
    }

    /// `sum mu x [m beta^2 / 2 + 3 k alpha / 2]`.
    fn thermal(&self, cfg: &PhysicalConfig<T>) -> T {
        (0..4)
            .map(|i| {
                self.mu[i]
                    * self.x[i]
                    * (T::lit(0.5) * cfg.masses[i] * self.beta[i] * self.beta[i]
                        + T::lit(1.5) * cfg.boltzmann * self.alpha[i])
            })
            .sum()
    }

    fn pivot(&self) -> T {
        self.eta[0] * self.y[0]
    }
}

/// Open interval on which every logarithm and the temperature are defined.
pub fn functional_domain<T: Real>(args: &LogArgs<T>, cfg: &PhysicalConfig<T>) -> (T, T) {
    let p = args.pivot();
    let mu1 = args.mu[0];
    let thermal = args.thermal(cfg);
    let lo = T::zero()
        .max((p - args.mu[1] * args.x[1]) / mu1)
        .max((p - thermal / cfg.delta_e) / mu1);
    let hi = ((args.eta[2] * args.y[2] + p) / mu1).min((args.eta[3] * args.y[3] + p) / mu1);
    (lo, hi)
}

struct Terms<T> {
    value: T,
    slope: T,
    /// Sum of term magnitudes, for the rounding floor.
    scale: T,
}

fn evaluate<T: Real>(z: T, args: &LogArgs<T>, cfg: &PhysicalConfig<T>, thermal: T) -> Terms<T> {
    let p = args.pivot();
    let mu1 = args.mu[0];
    let shift = mu1 * z - p;
    let a2 = args.mu[1] * args.x[1] + shift;
    let b3 = args.eta[2] * args.y[2] - shift;
    let b4 = args.eta[3] * args.y[3] - shift;
    let d = thermal + cfg.delta_e * shift;
    let ey: T = (0..4).map(|i| args.eta[i] * args.y[i]).sum();
    let c0 = (args.mu[2] * args.mu[3] / args.eta[1]).ln();
    let t = [c0, z.ln(), a2.ln(), -b3.ln(), -b4.ln(), -T::lit(1.5) * cfg.delta_e * ey / d];
    let value = t.iter().copied().sum();
    let scale = t.iter().map(|x| x.abs()).sum();
    let slope = T::one() / z + mu1 / a2 + mu1 / b3 + mu1 / b4 + T::lit(1.5) * cfg.delta_e * ey * cfg.delta_e * mu1 / (d * d);
    Terms { value, slope, scale }
}

/// `L(z)` for general arguments; NaN outside [`functional_domain`].
pub fn log_functional<T: Real>(z: T, args: &LogArgs<T>, cfg: &PhysicalConfig<T>) -> T {
    let (lo, hi) = functional_domain(args, cfg);
    if !(z > lo && z < hi) {
        return T::nan();
    }
    evaluate(z, args, cfg, args.thermal(cfg)).value
}

/// Analytic `dL/dz`.
pub fn log_functional_slope<T: Real>(z: T, args: &LogArgs<T>, cfg: &PhysicalConfig<T>) -> T {
    evaluate(z, args, cfg, args.thermal(cfg)).slope
}

/// Right-hand side `(3/2) log(mu^{12} / mu^{34})`.
pub fn root_target<T: Real>(cfg: &PhysicalConfig<T>) -> T {
    T::lit(1.5) * (cfg.mu12() / cfg.mu34()).ln()
}

const MONOTONE_SAMPLES: usize = 8;
const MAX_ITER: usize = 200;

/// Root of `L(z) = target` in the domain of `args`.
pub fn solve_log_functional<T: Real>(
    args: &LogArgs<T>,
    target: T,
    cfg: &PhysicalConfig<T>,
    tol: T,
) -> Result<(T, RootDiagnostics<T>)> {
    let fail = |message: String| Error::RootSolve { node: 0, message };
    let (lo, hi) = functional_domain(args, cfg);
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(fail(format!("empty constraint interval ({lo}, {hi})")));
    }
    let thermal = args.thermal(cfg);
    // keep the ends representable as interior points in the working precision
    let margin = T::lit(1e-12) * (hi - lo);
    let guard = T::lit(16.0) * T::epsilon();
    let (mut a, mut b) = (lo + margin.max(guard * lo.abs()), hi - margin.max(guard * hi.abs()));
    if !(a < b) {
        return Err(fail(format!("constraint interval ({lo}, {hi}) too narrow for the working precision")));
    }
    let resid = |z: T| {
        let t = evaluate(z, args, cfg, thermal);
        (t.value - target, t)
    };

    let mut prev = T::neg_infinity();
    for s in 1..=MONOTONE_SAMPLES {
        let z = a + (b - a) * T::of_usize(s) / T::of_usize(MONOTONE_SAMPLES + 1);
        let v = resid(z).0;
        if !(v > prev) {
            return Err(fail(format!("objective not increasing near z = {z}")));
        }
        prev = v;
    }

    let (ra, _) = resid(a);
    let (rb, _) = resid(b);
    let mut diag = RootDiagnostics {
        lo,
        hi,
        ..Default::default()
    };
    if !(ra < T::zero()) || !(rb > T::zero()) {
        for (z, r) in [(a, ra), (b, rb)] {
            if r.abs() <= tol {
                diag.residual = r;
                return Ok((z, diag));
            }
        }
        return Err(fail(format!(
            "residuals at the interval ends do not straddle the target: {ra} at {a}, {rb} at {b}"
        )));
    }

    let p = args.pivot() / args.mu[0];
    let mut z = if p > a && p < b { p } else { T::lit(0.5) * (a + b) };
    let eps = T::epsilon();
    for it in 1..=MAX_ITER {
        let (r, terms) = resid(z);
        diag.iterations = it;
        diag.residual = r;
        if r.abs() <= tol {
            return Ok((z, diag));
        }
        let floor = T::lit(8.0) * eps * (terms.scale + terms.slope * z.abs());
        if r.abs() <= floor {
            diag.floor_limited = true;
            return Ok((z, diag));
        }
        if r < T::zero() {
            a = z;
        } else {
            b = z;
        }
        let mut next = z - r / terms.slope;
        if !(next > a && next < b) {
            next = T::lit(0.5) * (a + b);
        }
        if b - a <= T::lit(4.0) * eps * z.abs() || next == z {
            diag.floor_limited = true;
            return Ok((z, diag));
        }
        z = next;
    }
    Err(fail(format!(
        "residual {} above tolerance {tol} after {MAX_ITER} iterations",
        diag.residual
    )))
}

/// Admissible interval for the reactive density of species 1.
pub fn constraint_bracket<T: Real>(
    m: &MomentSet<T>,
    nu: &[T; 4],
    u_tilde: &[T; 3],
    cfg: &PhysicalConfig<T>,
) -> Result<(T, T)> {
    let (lo, hi) = functional_domain(&LogArgs::from_state(m, nu, u_tilde), cfg);
    if !(lo < hi) {
        return Err(Error::RootSolve {
            node: 0,
            message: format!("empty constraint interval ({lo}, {hi})"),
        });
    }
    Ok((lo, hi))
}

/// Reactive density of species 1 and root-solve diagnostics.
pub fn solve_n1<T: Real>(
    m: &MomentSet<T>,
    nu: &[T; 4],
    u_tilde: &[T; 3],
    cfg: &PhysicalConfig<T>,
    tol: T,
) -> Result<(T, RootDiagnostics<T>)> {
    check_inputs(m)?;
    solve_log_functional(&LogArgs::from_state(m, nu, u_tilde), root_target(cfg), cfg, tol)
}

/// Reactive densities, shared velocity and temperature for a given `n~_1`.
pub fn fast_parameters<T: Real>(
    m: &MomentSet<T>,
    nu: &[T; 4],
    n1: T,
    cfg: &PhysicalConfig<T>,
) -> Result<FastEquilibrium<T>> {
    check_inputs(m)?;
    let u_tilde = mixture_velocity(m, nu, cfg);
    let shift = n1 - m.species[0].n;
    let mut density = [T::zero(); 4];
    for i in 0..4 {
        density[i] = if i == 0 {
            n1
        } else {
            m.species[i].n + cfg.lambda[i] * nu[0] / nu[i] * shift
        };
        if !(density[i] > T::zero()) {
            return Err(Error::Breakdown {
                species: i + 1,
                node: 0,
                sweep: None,
                message: format!("reactive density {} is not positive", density[i]),
            });
        }
    }
    let temperature = f_of_x(n1, m, nu, &u_tilde, cfg)?;
    Ok(FastEquilibrium {
        nu: *nu,
        density,
        velocity: u_tilde,
        temperature,
        root: RootDiagnostics::default(),
    })
}

/// Full fast-model equilibrium at one node.
pub fn fast_equilibrium<T: Real>(m: &MomentSet<T>, cfg: &PhysicalConfig<T>, tol: T) -> Result<FastEquilibrium<T>> {
    let nu = fast_frequencies(m, cfg)?;
    let u_tilde = mixture_velocity(m, &nu, cfg);
    let (n1, root) = solve_n1(m, &nu, &u_tilde, cfg, tol)?;
    let mut eq = fast_parameters(m, &nu, n1, cfg)?;
    eq.root = root;
    Ok(eq)
}
