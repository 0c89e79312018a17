//! Reactive equilibria of the two reaction models and shared special functions.

pub mod fast;
pub mod slow;

use rayon::prelude::*;

use crate::config::PhysicalConfig;
use crate::error::{Error, Result};
use crate::fields::MomentSet;
use crate::scalar::Real;

pub use fast::{FastEquilibrium, RootDiagnostics};
pub use slow::SlowEquilibrium;

/// Which reaction model drives the relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Slow,
    Fast,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Slow => "slow",
            Model::Fast => "fast",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slow" => Ok(Model::Slow),
            "fast" => Ok(Model::Fast),
            other => Err(Error::invalid("model", format!("expected `slow` or `fast`, got `{other}`"))),
        }
    }
}

/// Upper incomplete gamma function `Gamma(3/2, x)`.
pub fn incomplete_gamma_32<T: Real>(x: T) -> Result<T> {
    if !(x >= T::zero()) {
        return Err(Error::invalid("x", format!("incomplete gamma needs x >= 0, got {x}")));
    }
    let r = x.sqrt();
    Ok(T::PI().sqrt() / T::lit(2.0) * r.erfc() + r * (-x).exp())
}

/// `e^x Gamma(3/2, x)`, finite for every `x >= 0`.
pub(crate) fn scaled_gamma_32<T: Real>(x: T) -> T {
    let r = x.sqrt();
    if x < T::lit(200.0) {
        T::PI().sqrt() / T::lit(2.0) * x.exp() * r.erfc() + r
    } else {
        // e^x erfc(sqrt x) ~ 1/(sqrt(pi x)) * sum (-1)^k (2k-1)!! / (2x)^k
        let mut term = T::one();
        let mut sum = T::one();
        for k in 1..12 {
            term = -term * T::of_usize(2 * k - 1) / (x + x);
            sum += term;
        }
        sum / (T::lit(2.0) * r) + r
    }
}

/// `x^{3/2} e^{-x} / Gamma(3/2, x)`.
pub(crate) fn gamma_ratio<T: Real>(x: T) -> T {
    x * x.sqrt() / scaled_gamma_32(x)
}

/// Maxwellian `n (m / 2 pi k T)^{3/2} exp(-m |v - U|^2 / 2kT)`.
pub fn maxwellian<T: Real>(n: T, u: &[T; 3], t: T, m: T, k: T, v: &[T; 3]) -> Result<T> {
    if !(n > T::zero()) || !(t > T::zero()) {
        return Err(Error::invalid(
            "maxwellian",
            format!("needs n > 0 and T > 0, got n = {n}, T = {t}"),
        ));
    }
    Ok(crate::config::maxwellian_value(n, u, t, m, k, v))
}

/// Equilibrium data at one spatial node for either model.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeParams<T> {
    Slow(SlowEquilibrium<T>),
    Fast(FastEquilibrium<T>),
}

impl<T: Real> NodeParams<T> {
    pub fn frequencies(&self) -> [T; 4] {
        match self {
            NodeParams::Slow(e) => e.nu,
            NodeParams::Fast(e) => e.nu,
        }
    }

    /// `(n, U, T)` of the reactive Maxwellian of species `i`.
    pub fn maxwellian_params(&self, i: usize) -> (T, [T; 3], T) {
        match self {
            NodeParams::Slow(e) => (e.density[i], e.velocity[i], e.temperature[i]),
            NodeParams::Fast(e) => (e.density[i], e.velocity, e.temperature),
        }
    }

    pub fn root(&self) -> Option<&RootDiagnostics<T>> {
        match self {
            NodeParams::Fast(e) => Some(&e.root),
            NodeParams::Slow(_) => None,
        }
    }
}

/// Equilibrium at one node.
pub fn node_equilibrium<T: Real>(
    m: &MomentSet<T>,
    model: Model,
    cfg: &PhysicalConfig<T>,
    root_tol: T,
) -> Result<NodeParams<T>> {
    match model {
        Model::Slow => slow::slow_equilibrium(m, cfg).map(NodeParams::Slow),
        Model::Fast => fast::fast_equilibrium(m, cfg, root_tol).map(NodeParams::Fast),
    }
}

/// Equilibria at every node; errors carry the failing node index.
pub fn equilibrium_profile<T: Real>(
    moments: &[MomentSet<T>],
    model: Model,
    cfg: &PhysicalConfig<T>,
    root_tol: T,
) -> Result<Vec<NodeParams<T>>> {
    moments
        .par_iter()
        .enumerate()
        .map(|(j, m)| node_equilibrium(m, model, cfg, root_tol).map_err(|e| e.at_node(j)))
        .collect()
}

/// Default tolerance on the fast-model root residual.
pub fn default_root_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::lit(1e4) * T::epsilon())
}
