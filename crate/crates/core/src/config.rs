//! Physical constants, inflow boundary data and the boundary budget constants.
//!
//! The budget constants (`a`, `c`, `gamma` families and the temperature
//! bracket) are computed once from the inflow data and bound every admissible
//! iterate of the solver.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, PhaseGrid};
use crate::scalar::Real;
use crate::solver::SolverSettings;

/// Reaction signs: species 1 and 2 are reactants, 3 and 4 products.
pub const LAMBDA: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

const MASS_BALANCE_TOL: f64 = 1e-12;

/// Raw physical inputs before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub masses: [f64; 4],
    pub bond_energies: [f64; 4],
    pub chi: [[f64; 4]; 4],
    pub nu: [[f64; 4]; 4],
    /// Chemical frequency of the slow model (`1 + 2 -> 3 + 4` channel).
    pub nu_forward: f64,
    /// Chemical frequency of the fast model (`3 + 4 -> 1 + 2` channel).
    pub nu_backward: f64,
    pub knudsen: f64,
    pub boltzmann: f64,
}

/// Validated physical configuration with derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalConfig<T> {
    pub masses: [T; 4],
    pub bond_energies: [T; 4],
    pub lambda: [T; 4],
    pub reduced: [[T; 4]; 4],
    pub chi: [[T; 4]; 4],
    pub nu: [[T; 4]; 4],
    pub nu_forward: T,
    pub nu_backward: T,
    pub knudsen: T,
    pub boltzmann: T,
    /// Energy threshold `-sum lambda_i E_i`.
    pub delta_e: T,
    /// Total reacting mass `m1 + m2 = m3 + m4`.
    pub total_mass: T,
}

impl<T: Real> PhysicalConfig<T> {
    pub fn new(p: &PhysicalParams) -> Result<Self> {
        for (i, m) in p.masses.iter().enumerate() {
            if !(*m > 0.0) || !m.is_finite() {
                return Err(Error::invalid(
                    format!("masses[{}]", i + 1),
                    format!("mass must be positive, got {m}"),
                ));
            }
        }
        let [m1, m2, m3, m4] = p.masses;
        let (lhs, rhs) = (m1 + m2, m3 + m4);
        if (lhs - rhs).abs() > MASS_BALANCE_TOL * lhs.max(rhs) {
            return Err(Error::invalid(
                "masses",
                format!("m1 + m2 = {lhs} must equal m3 + m4 = {rhs}"),
            ));
        }
        let delta_e: f64 = -(0..4).map(|i| LAMBDA[i] * p.bond_energies[i]).sum::<f64>();
        if !(delta_e > 0.0) {
            return Err(Error::invalid(
                "bond_energies",
                format!("energy threshold dE = E3 + E4 - E1 - E2 must be > 0, got {delta_e}"),
            ));
        }
        for i in 0..4 {
            for j in 0..4 {
                let (c, n) = (p.chi[i][j], p.nu[i][j]);
                if !(n > 0.0) || !n.is_finite() {
                    return Err(Error::invalid(
                        format!("nu[{}][{}]", i + 1, j + 1),
                        format!("collision frequency must be positive, got {n}"),
                    ));
                }
                if !(c >= 0.0) || !c.is_finite() {
                    return Err(Error::invalid(
                        format!("chi[{}][{}]", i + 1, j + 1),
                        format!("interaction coefficient must be nonnegative, got {c}"),
                    ));
                }
                if c > n {
                    return Err(Error::invalid(
                        format!("chi[{}][{}]", i + 1, j + 1),
                        format!("chi exceeds nu: chi = {c} > nu = {n} (need chi_ij <= nu_ij)"),
                    ));
                }
            }
        }
        if !(p.nu_forward >= 0.0) || !p.nu_forward.is_finite() {
            return Err(Error::invalid("nu_forward", "must be >= 0"));
        }
        if !(p.nu_backward >= 0.0) || !p.nu_backward.is_finite() {
            return Err(Error::invalid("nu_backward", "must be >= 0"));
        }
        if !(p.knudsen > 0.0) || !p.knudsen.is_finite() {
            return Err(Error::invalid(
                "knudsen",
                format!("Knudsen number must be > 0, got {}", p.knudsen),
            ));
        }
        if !(p.boltzmann > 0.0) || !p.boltzmann.is_finite() {
            return Err(Error::invalid("boltzmann", "must be > 0"));
        }

        let l = T::lit;
        let masses = p.masses.map(l);
        let mut reduced = [[T::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                reduced[i][j] = masses[i] * masses[j] / (masses[i] + masses[j]);
            }
        }
        Ok(PhysicalConfig {
            masses,
            bond_energies: p.bond_energies.map(l),
            lambda: LAMBDA.map(l),
            reduced,
            chi: p.chi.map(|r| r.map(l)),
            nu: p.nu.map(|r| r.map(l)),
            nu_forward: l(p.nu_forward),
            nu_backward: l(p.nu_backward),
            knudsen: l(p.knudsen),
            boltzmann: l(p.boltzmann),
            delta_e: l(delta_e),
            total_mass: masses[0] + masses[1],
        })
    }

    /// Reduced mass of the reactant pair, `mu^{12}`.
    pub fn mu12(&self) -> T {
        self.reduced[0][1]
    }

    /// Reduced mass of the product pair, `mu^{34}`.
    pub fn mu34(&self) -> T {
        self.reduced[2][3]
    }

    /// Copy with a different Knudsen number (used by tau scans).
    pub fn with_knudsen(&self, tau: T) -> Self {
        let mut c = self.clone();
        c.knudsen = tau;
        c
    }
}

/// Inflow distribution of one species at one wall.
#[derive(Debug, Clone, PartialEq)]
pub enum InflowSpec<T> {
    /// Maxwellian restricted to the incoming half space. Drift is along `x` only,
    /// so the inflow carries no transverse flow by construction.
    HalfMaxwellian { density: T, drift: T, temperature: T },
    /// Sampled values `(v, f(v))` that must coincide with the grid's incoming nodes.
    Tabulated { points: Vec<([T; 3], T)> },
}

/// Inflow at both walls for the four species.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData<T> {
    pub left: [InflowSpec<T>; 4],
    pub right: [InflowSpec<T>; 4],
}

/// Inflow evaluated on the grid: `left[i]` covers the `v1 > 0` nodes and
/// `right[i]` the `v1 < 0` nodes, both in flat velocity order.
#[derive(Debug, Clone, PartialEq)]
pub struct InflowTable<T> {
    pub left: [Vec<T>; 4],
    pub right: [Vec<T>; 4],
}

pub(crate) fn maxwellian_value<T: Real>(
    density: T,
    velocity: &[T; 3],
    temperature: T,
    mass: T,
    k: T,
    v: &[T; 3],
) -> T {
    let kt = k * temperature;
    let norm = density * (mass / (T::lit(2.0) * T::PI() * kt)).powf(T::lit(1.5));
    let d = crate::scalar::sub(v, velocity);
    norm * (-(mass * crate::scalar::norm2(&d)) / (kt + kt)).exp()
}

impl<T: Real> BoundaryData<T> {
    /// Same Maxwellian inflow (zero drift) for every species at both walls.
    pub fn uniform_maxwellian(density: T, temperature: T) -> Self {
        let s = InflowSpec::HalfMaxwellian {
            density,
            drift: T::zero(),
            temperature,
        };
        BoundaryData {
            left: [s.clone(), s.clone(), s.clone(), s.clone()],
            right: [s.clone(), s.clone(), s.clone(), s],
        }
    }

    /// Velocity box radius covering every parametric inflow to eight thermal
    /// standard deviations past its drift; `None` if any inflow is tabulated.
    pub fn auto_vmax(&self, cfg: &PhysicalConfig<T>) -> Option<T> {
        let mut vmax = T::zero();
        for i in 0..4 {
            for spec in [&self.left[i], &self.right[i]] {
                match spec {
                    InflowSpec::HalfMaxwellian {
                        drift, temperature, ..
                    } => {
                        let r = drift.abs()
                            + T::lit(8.0) * (cfg.boltzmann * *temperature / cfg.masses[i]).sqrt();
                        vmax = vmax.max(r);
                    }
                    InflowSpec::Tabulated { .. } => return None,
                }
            }
        }
        Some(vmax)
    }

    /// Evaluates the inflow on the grid's incoming half spaces and checks
    /// nonnegativity, zero transverse flow and finite positive moments.
    pub fn tabulate(&self, grid: &PhaseGrid<T>, cfg: &PhysicalConfig<T>) -> Result<InflowTable<T>> {
        let mut left: [Vec<T>; 4] = Default::default();
        let mut right: [Vec<T>; 4] = Default::default();
        for i in 0..4 {
            left[i] = tabulate_half(&self.left[i], grid, cfg, i, true)?;
            right[i] = tabulate_half(&self.right[i], grid, cfg, i, false)?;
        }
        let table = InflowTable { left, right };
        for i in 0..4 {
            for (wall, vals, positive) in [("left", &table.left[i], true), ("right", &table.right[i], false)] {
                check_half(grid, vals, positive, i, wall)?;
            }
        }
        Ok(table)
    }
}

fn tabulate_half<T: Real>(
    spec: &InflowSpec<T>,
    grid: &PhaseGrid<T>,
    cfg: &PhysicalConfig<T>,
    species: usize,
    positive: bool,
) -> Result<Vec<T>> {
    let nt = grid.n_transverse();
    let half = grid.first_positive();
    let range = if positive { half..grid.nv1() } else { 0..half };
    let offset = range.start * nt;
    match spec {
        InflowSpec::HalfMaxwellian {
            density,
            drift,
            temperature,
        } => {
            if !(*density >= T::zero()) || !(*temperature > T::zero()) || !drift.is_finite() {
                return Err(Error::invalid(
                    format!("boundary species {}", species + 1),
                    "Maxwellian inflow needs density >= 0 and temperature > 0",
                ));
            }
            let u = [*drift, T::zero(), T::zero()];
            Ok((offset..range.end * nt)
                .map(|idx| {
                    let v = grid.velocity(idx);
                    maxwellian_value(*density, &u, *temperature, cfg.masses[species], cfg.boltzmann, &v)
                })
                .collect())
        }
        InflowSpec::Tabulated { points } => {
            let n = (range.end - range.start) * nt;
            if points.len() != n {
                return Err(Error::GridMismatch(format!(
                    "tabulated inflow for species {} has {} points, grid half space has {n}",
                    species + 1,
                    points.len()
                )));
            }
            let tol = T::lit(1e-9) * grid.vmax();
            let mut out = vec![T::nan(); n];
            let n23 = grid.nv23();
            let h1 = grid.h1();
            let h23 = grid.h23();
            for (v, f) in points {
                let locate = |c: T, h: T, count: usize| -> Option<usize> {
                    let pos = (c + grid.vmax()) / h - T::lit(0.5);
                    let k = pos.round();
                    if k < T::zero() || k >= T::of_usize(count) {
                        return None;
                    }
                    let k = k.to_usize()?;
                    Some(k)
                };
                let found = (|| {
                    let i1 = locate(v[0], h1, grid.nv1())?;
                    let i2 = locate(v[1], h23, n23)?;
                    let i3 = locate(v[2], h23, n23)?;
                    let idx = (i1 * n23 + i2) * n23 + i3;
                    let node = grid.velocity(idx);
                    let close = (0..3).all(|a| (node[a] - v[a]).abs() <= tol);
                    (close && idx >= offset && idx < range.end * nt).then_some(idx - offset)
                })();
                match found {
                    Some(k) => out[k] = *f,
                    None => {
                        return Err(Error::GridMismatch(format!(
                            "tabulated inflow point ({}, {}, {}) for species {} is not an incoming grid node",
                            v[0], v[1], v[2], species + 1
                        )))
                    }
                }
            }
            if out.iter().any(|x| x.is_nan()) {
                return Err(Error::GridMismatch(format!(
                    "tabulated inflow for species {} does not cover every incoming node",
                    species + 1
                )));
            }
            Ok(out)
        }
    }
}

/// Half-range quadrature `sum w * g(v1, v2^2 + v3^2) * f` over incoming nodes.
pub(crate) fn half_moment<T: Real>(
    grid: &PhaseGrid<T>,
    values: &[T],
    positive: bool,
    weight: impl Fn(T, T) -> T,
) -> T {
    let nt = grid.n_transverse();
    let start = if positive { grid.first_positive() } else { 0 };
    let tsq = grid.transverse_sq();
    let mut total = T::zero();
    for (r, row) in values.chunks(nt).enumerate() {
        let v1 = grid.v1()[start + r];
        let mut s = T::zero();
        for (f, t) in row.iter().zip(tsq) {
            s += weight(v1, *t) * *f;
        }
        total += s;
    }
    total * grid.weight()
}

fn check_half<T: Real>(grid: &PhaseGrid<T>, vals: &[T], positive: bool, species: usize, wall: &str) -> Result<()> {
    let who = || format!("{wall} inflow of species {}", species + 1);
    if vals.iter().any(|f| !f.is_finite()) {
        return Err(Error::NonFinite(who()));
    }
    if vals.iter().any(|f| *f < T::zero()) {
        return Err(Error::invalid(who(), "inflow must be nonnegative"));
    }
    // Transverse flow: integrate v2 and v3 against the table.
    let nt = grid.n_transverse();
    let n23 = grid.nv23();
    let v23 = grid.v23();
    let (mut j2, mut j3, mut mass_energy) = (T::zero(), T::zero(), T::zero());
    let start = if positive { grid.first_positive() } else { 0 };
    for (r, row) in vals.chunks(nt).enumerate() {
        let v1 = grid.v1()[start + r];
        for (t, f) in row.iter().enumerate() {
            let (a, b) = (v23[t / n23], v23[t % n23]);
            j2 += a * *f;
            j3 += b * *f;
            mass_energy += *f * (T::one() + v1 * v1 + a * a + b * b);
        }
    }
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));
    if j2.abs() > tol * mass_energy || j3.abs() > tol * mass_energy {
        return Err(Error::invalid(
            who(),
            "inflow induces transverse flow (moments of v2 or v3 nonzero)",
        ));
    }
    Ok(())
}

/// Boundary budget constants bounding the admissible solution set.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryBudget<T> {
    pub a_u: [T; 4],
    pub a_s: [T; 4],
    pub a_l: [T; 4],
    pub c_u: [T; 4],
    pub c_s: [T; 4],
    pub c_l: [T; 4],
    pub gamma: [T; 4],
    pub a_max: T,
    pub a_min: T,
    pub c_max: T,
    pub c_min: T,
    pub gamma_min: T,
    /// Lower temperature bound `min_i m_i gamma_l / (3 k a_{i,u}^2)`.
    pub t_lower: T,
    /// Upper temperature bound `c_u / (12 k a_l) * sum_i m_i`.
    pub t_upper: T,
}

pub fn compute_boundary_budget<T: Real>(
    table: &InflowTable<T>,
    cfg: &PhysicalConfig<T>,
    grid: &PhaseGrid<T>,
) -> Result<BoundaryBudget<T>> {
    let z = [T::zero(); 4];
    let mut b = BoundaryBudget {
        a_u: z,
        a_s: z,
        a_l: z,
        c_u: z,
        c_s: z,
        c_l: z,
        gamma: z,
        a_max: T::zero(),
        a_min: T::zero(),
        c_max: T::zero(),
        c_min: T::zero(),
        gamma_min: T::zero(),
        t_lower: T::zero(),
        t_upper: T::zero(),
    };
    let two = T::lit(2.0);
    let eighth = T::lit(0.125);
    for i in 0..4 {
        let (fl, fr) = (&table.left[i], &table.right[i]);
        let both = |w: &dyn Fn(T, T) -> T| half_moment(grid, fl, true, w) + half_moment(grid, fr, false, w);
        b.a_u[i] = two * both(&|_, _| T::one());
        b.a_s[i] = both(&|v1, _| T::one() / v1.abs());
        b.c_u[i] = two * both(&|v1, t| v1 * v1 + t);
        b.c_s[i] = both(&|v1, t| (v1 * v1 + t) / v1.abs());
        b.a_l[i] = b.a_u[i] * eighth;
        b.c_l[i] = b.c_u[i] * eighth;
        let flux_l = half_moment(grid, fl, true, |v1, _| v1.abs());
        let flux_r = half_moment(grid, fr, false, |v1, _| v1.abs());
        b.gamma[i] = flux_l * flux_r / T::lit(16.0);

        for (name, val) in [
            ("a_u", b.a_u[i]),
            ("a_s", b.a_s[i]),
            ("c_u", b.c_u[i]),
            ("c_s", b.c_s[i]),
            ("gamma", b.gamma[i]),
        ] {
            if !(val > T::zero()) || !val.is_finite() {
                return Err(Error::Degenerate(format!(
                    "budget {name} for species {} is {val}; inflow too degenerate for this grid",
                    i + 1
                )));
            }
        }
    }
    let fold = |a: &[T; 4], max: bool| {
        a.iter()
            .copied()
            .reduce(|x, y| if max { x.max(y) } else { x.min(y) })
            .unwrap()
    };
    b.a_max = fold(&b.a_u, true);
    b.a_min = fold(&b.a_l, false);
    b.c_max = fold(&b.c_u, true);
    b.c_min = fold(&b.c_l, false);
    b.gamma_min = fold(&b.gamma, false);
    let k = cfg.boltzmann;
    let three = T::lit(3.0);
    b.t_lower = (0..4)
        .map(|i| cfg.masses[i] * b.gamma_min / (three * k * b.a_u[i] * b.a_u[i]))
        .reduce(|x, y| x.min(y))
        .unwrap();
    let msum: T = cfg.masses.iter().copied().sum();
    b.t_upper = b.c_max / (T::lit(12.0) * k * b.a_min) * msum;
    if !(b.t_lower > T::zero()) || !(b.t_lower <= b.t_upper) {
        return Err(Error::Degenerate(format!(
            "temperature bracket [{}, {}] is empty",
            b.t_lower, b.t_upper
        )));
    }
    Ok(b)
}

// ---------------------------------------------------------------------------
// config file

/// Everything a run needs, as read from a config file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub physical: PhysicalConfig<f64>,
    pub boundary: BoundaryData<f64>,
    pub grid: GridSpec,
    pub solver: SolverSettings,
}

impl RunConfig {
    /// Resolves the velocity box and builds the grid.
    pub fn build_grid(&self) -> Result<PhaseGrid<f64>> {
        let vmax = match self.grid.vmax {
            Some(v) => v,
            None => self.boundary.auto_vmax(&self.physical).ok_or_else(|| {
                Error::invalid("grid.vmax", "vmax is required when any inflow is tabulated")
            })?,
        };
        PhaseGrid::from_spec(&self.grid, vmax)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    species: FileSpecies,
    interaction: FileInteraction,
    boundary: FileBoundary,
    #[serde(default)]
    grid: FileGrid,
    #[serde(default)]
    solver: FileSolver,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSpecies {
    masses: [f64; 4],
    bond_energies: [f64; 4],
    #[serde(default = "one")]
    boltzmann: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileInteraction {
    chi: [[f64; 4]; 4],
    nu: [[f64; 4]; 4],
    #[serde(default)]
    nu_forward: f64,
    #[serde(default)]
    nu_backward: f64,
    knudsen: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileBoundary {
    left: Vec<FileInflow>,
    right: Vec<FileInflow>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FileInflow {
    Maxwellian {
        density: f64,
        #[serde(default)]
        drift: f64,
        temperature: f64,
    },
    Tabulated {
        file: PathBuf,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileGrid {
    #[serde(default = "default_nx")]
    nx: usize,
    #[serde(default = "default_nv1")]
    nv1: usize,
    #[serde(default = "default_nv23")]
    nv23: usize,
    vmax: Option<f64>,
}

fn default_nx() -> usize {
    GridSpec::default().nx
}
fn default_nv1() -> usize {
    GridSpec::default().nv1
}
fn default_nv23() -> usize {
    GridSpec::default().nv23
}

impl Default for FileGrid {
    fn default() -> Self {
        let g = GridSpec::default();
        FileGrid {
            nx: g.nx,
            nv1: g.nv1,
            nv23: g.nv23,
            vmax: g.vmax,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSolver {
    tol: Option<f64>,
    max_iter: Option<usize>,
    relaxation: Option<f64>,
    root_tol: Option<f64>,
    seed: Option<u64>,
    threads: Option<usize>,
    probes: Option<usize>,
}

/// Reads rows `v1 v2 v3 value` (whitespace or comma separated, `#` comments).
pub fn read_tabulated_inflow(path: &Path) -> Result<Vec<([f64; 3], f64)>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), ln + 1)))?;
        if cols.len() != 4 {
            return Err(Error::Parse(format!(
                "{}:{}: expected 4 columns, got {}",
                path.display(),
                ln + 1,
                cols.len()
            )));
        }
        out.push(([cols[0], cols[1], cols[2]], cols[3]));
    }
    Ok(out)
}

/// Parses a config from TOML text; relative tabulated-inflow paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig> {
    let file: FileConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let params = PhysicalParams {
        masses: file.species.masses,
        bond_energies: file.species.bond_energies,
        chi: file.interaction.chi,
        nu: file.interaction.nu,
        nu_forward: file.interaction.nu_forward,
        nu_backward: file.interaction.nu_backward,
        knudsen: file.interaction.knudsen,
        boltzmann: file.species.boltzmann,
    };
    let physical = PhysicalConfig::new(&params)?;

    let convert = |side: &str, list: Vec<FileInflow>| -> Result<[InflowSpec<f64>; 4]> {
        if list.len() != 4 {
            return Err(Error::invalid(
                format!("boundary.{side}"),
                format!("expected 4 species entries, got {}", list.len()),
            ));
        }
        let mut specs = Vec::with_capacity(4);
        for (i, entry) in list.into_iter().enumerate() {
            specs.push(match entry {
                FileInflow::Maxwellian {
                    density,
                    drift,
                    temperature,
                } => {
                    if !(density > 0.0) || !(temperature > 0.0) || !drift.is_finite() {
                        return Err(Error::invalid(
                            format!("boundary.{side}[{}]", i + 1),
                            "Maxwellian inflow needs density > 0 and temperature > 0",
                        ));
                    }
                    InflowSpec::HalfMaxwellian {
                        density,
                        drift,
                        temperature,
                    }
                }
                FileInflow::Tabulated { file } => {
                    let path = if file.is_absolute() { file } else { base.join(file) };
                    InflowSpec::Tabulated {
                        points: read_tabulated_inflow(&path)?,
                    }
                }
            });
        }
        Ok(specs.try_into().expect("four entries"))
    };
    let boundary = BoundaryData {
        left: convert("left", file.boundary.left)?,
        right: convert("right", file.boundary.right)?,
    };

    let grid = GridSpec {
        nx: file.grid.nx,
        nv1: file.grid.nv1,
        nv23: file.grid.nv23,
        vmax: file.grid.vmax,
    };
    if let Some(v) = grid.vmax {
        if !(v > 0.0) {
            return Err(Error::invalid("grid.vmax", format!("must be > 0, got {v}")));
        }
    }

    let d = SolverSettings::default();
    let s = file.solver;
    let solver = SolverSettings {
        tol: s.tol.unwrap_or(d.tol),
        max_iter: s.max_iter.unwrap_or(d.max_iter),
        relaxation: s.relaxation.unwrap_or(d.relaxation),
        root_tol: s.root_tol.unwrap_or(d.root_tol),
        seed: s.seed.unwrap_or(d.seed),
        threads: s.threads.unwrap_or(d.threads),
        probes: s.probes.unwrap_or(d.probes),
    };
    if !(solver.relaxation > 0.0 && solver.relaxation <= 1.0) {
        return Err(Error::invalid("solver.relaxation", "must lie in (0, 1]"));
    }
    if !(solver.tol > 0.0) {
        return Err(Error::invalid("solver.tol", "must be > 0"));
    }
    Ok(RunConfig {
        physical,
        boundary,
        grid,
        solver,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}
