//! Species distributions on the phase grid, their moments, the weighted norm,
//! the solver metric and the solution-space membership checks.
//!
//! Storage is one contiguous block per `(species, v1 node)` holding every
//! spatial node and transverse velocity, so that transport along
//! characteristics can hand each block to a separate worker.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::config::{BoundaryBudget, PhysicalConfig};
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField<T> {
    nv1: usize,
    n_nodes: usize,
    nt: usize,
    data: Vec<T>,
}

impl<T: Real> DistributionField<T> {
    pub fn zeros(grid: &PhaseGrid<T>) -> Self {
        let (nv1, n_nodes, nt) = (grid.nv1(), grid.n_nodes_x(), grid.n_transverse());
        DistributionField {
            nv1,
            n_nodes,
            nt,
            data: vec![T::zero(); 4 * nv1 * n_nodes * nt],
        }
    }

    /// Fills `f_s(x_j, v)` from `f(s, j, v)`.
    pub fn from_fn(grid: &PhaseGrid<T>, f: impl Fn(usize, usize, [T; 3]) -> T + Sync) -> Self {
        let mut out = Self::zeros(grid);
        let (n_nodes, nt) = (out.n_nodes, out.nt);
        let nv1 = out.nv1;
        out.data
            .par_chunks_mut(n_nodes * nt)
            .enumerate()
            .for_each(|(b, block)| {
                let (s, i1) = (b / nv1, b % nv1);
                for j in 0..n_nodes {
                    for k in 0..nt {
                        let v = grid.velocity(i1 * nt + k);
                        block[j * nt + k] = f(s, j, v);
                    }
                }
            });
        out
    }

    pub fn nv1(&self) -> usize {
        self.nv1
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_transverse(&self) -> usize {
        self.nt
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Length of one `(species, v1)` block.
    pub fn block_len(&self) -> usize {
        self.n_nodes * self.nt
    }

    #[inline]
    fn offset(&self, s: usize, i1: usize, j: usize) -> usize {
        ((s * self.nv1 + i1) * self.n_nodes + j) * self.nt
    }

    /// Transverse row at `(species, v1 node, x node)`.
    #[inline]
    pub fn row(&self, s: usize, i1: usize, j: usize) -> &[T] {
        let o = self.offset(s, i1, j);
        &self.data[o..o + self.nt]
    }

    #[inline]
    pub fn row_mut(&mut self, s: usize, i1: usize, j: usize) -> &mut [T] {
        let o = self.offset(s, i1, j);
        &mut self.data[o..o + self.nt]
    }

    /// Value at species `s`, node `j`, flat velocity index `idx`.
    pub fn get(&self, s: usize, j: usize, idx: usize) -> T {
        self.row(s, idx / self.nt, j)[idx % self.nt]
    }

    /// Velocity values of species `s` at node `j`, in flat velocity order.
    pub fn node_values(&self, s: usize, j: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(self.nv1 * self.nt);
        for i1 in 0..self.nv1 {
            out.extend_from_slice(self.row(s, i1, j));
        }
        out
    }

    pub fn set_node_values(&mut self, s: usize, j: usize, values: &[T]) {
        assert_eq!(values.len(), self.nv1 * self.nt);
        for (i1, chunk) in values.chunks(self.nt).enumerate() {
            self.row_mut(s, i1, j).copy_from_slice(chunk);
        }
    }

    pub fn check_grid(&self, grid: &PhaseGrid<T>) -> Result<()> {
        if self.nv1 != grid.nv1() || self.n_nodes != grid.n_nodes_x() || self.nt != grid.n_transverse() {
            return Err(Error::GridMismatch(format!(
                "field shape ({} v1, {} nodes, {} transverse) does not match grid ({}, {}, {})",
                self.nv1,
                self.n_nodes,
                self.nt,
                grid.nv1(),
                grid.n_nodes_x(),
                grid.n_transverse()
            )));
        }
        Ok(())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.nv1 != other.nv1 || self.n_nodes != other.n_nodes || self.nt != other.nt {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `(1 - w) * self + w * other`, used for under-relaxed iteration.
    pub fn blend(&mut self, other: &Self, w: T) -> Result<()> {
        self.same_shape(other)?;
        let keep = T::one() - w;
        self.data
            .par_iter_mut()
            .zip(other.data.par_iter())
            .for_each(|(a, b)| *a = keep * *a + w * *b);
        Ok(())
    }
}

/// Raw velocity moments `int f`, `int v f`, `int |v|^2 f` and `min f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawMoments<T> {
    pub mass: T,
    pub flux: [T; 3],
    pub energy: T,
    pub min_value: T,
}

/// Single-species moments at one spatial node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesMoments<T> {
    pub n: T,
    pub rho: T,
    pub u: [T; 3],
    pub t: T,
}

/// Mixture moments at one spatial node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalMoments<T> {
    pub n: T,
    pub rho: T,
    pub u: [T; 3],
    pub t: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet<T> {
    pub species: [SpeciesMoments<T>; 4],
    pub global: GlobalMoments<T>,
}

pub fn raw_moments<T: Real>(f: &DistributionField<T>, grid: &PhaseGrid<T>, j: usize, s: usize) -> RawMoments<T> {
    let v23 = grid.v23();
    let n23 = grid.nv23();
    let tsq = grid.transverse_sq();
    let (mut m0, mut p, mut e) = (T::zero(), [T::zero(); 3], T::zero());
    let mut min_value = T::infinity();
    for (i1, &v1) in grid.v1().iter().enumerate() {
        let row = f.row(s, i1, j);
        let (mut r0, mut r2, mut r3, mut rt) = (T::zero(), T::zero(), T::zero(), T::zero());
        for (k, &val) in row.iter().enumerate() {
            r0 += val;
            r2 += v23[k / n23] * val;
            r3 += v23[k % n23] * val;
            rt += tsq[k] * val;
            min_value = min_value.min(val);
        }
        m0 += r0;
        p[0] += v1 * r0;
        p[1] += r2;
        p[2] += r3;
        e += v1 * v1 * r0 + rt;
    }
    let w = grid.weight();
    RawMoments {
        mass: m0 * w,
        flux: [p[0] * w, p[1] * w, p[2] * w],
        energy: e * w,
        min_value,
    }
}

fn species_from_raw<T: Real>(raw: &RawMoments<T>, mass: T, k: T, s: usize, j: usize) -> Result<SpeciesMoments<T>> {
    let n = raw.mass;
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::Degenerate(format!(
            "species {} has density {n} at node {j}",
            s + 1
        )));
    }
    let u = [raw.flux[0] / n, raw.flux[1] / n, raw.flux[2] / n];
    let u2 = crate::scalar::norm2(&u);
    let t = mass * (raw.energy - n * u2) / (T::lit(3.0) * k * n);
    Ok(SpeciesMoments {
        n,
        rho: mass * n,
        u,
        t,
    })
}

/// Density, bulk velocity and temperature of species `s` at node `j`.
pub fn species_moments<T: Real>(
    f: &DistributionField<T>,
    grid: &PhaseGrid<T>,
    cfg: &PhysicalConfig<T>,
    j: usize,
    s: usize,
) -> Result<SpeciesMoments<T>> {
    if f.values_nonfinite_at(s, j) {
        return Err(Error::NonFinite(format!("species {} at node {j}", s + 1)));
    }
    let raw = raw_moments(f, grid, j, s);
    species_from_raw(&raw, cfg.masses[s], cfg.boltzmann, s, j)
}

impl<T: Real> DistributionField<T> {
    fn values_nonfinite_at(&self, s: usize, j: usize) -> bool {
        (0..self.nv1).any(|i1| self.row(s, i1, j).iter().any(|v| !v.is_finite()))
    }
}

/// Mixture density, mass density, velocity and temperature.
pub fn global_moments<T: Real>(sp: &[SpeciesMoments<T>; 4], cfg: &PhysicalConfig<T>) -> GlobalMoments<T> {
    let n: T = sp.iter().map(|m| m.n).sum();
    let rho: T = sp.iter().map(|m| m.rho).sum();
    let mut u = [T::zero(); 3];
    for m in sp {
        for a in 0..3 {
            u[a] += m.rho * m.u[a];
        }
    }
    for c in &mut u {
        *c /= rho;
    }
    let k = cfg.boltzmann;
    let u2 = crate::scalar::norm2(&u);
    let mut nkt = T::zero();
    let mut kinetic = T::zero();
    for m in sp {
        nkt += m.n * k * m.t;
        kinetic += m.rho * (crate::scalar::norm2(&m.u) - u2);
    }
    let t = (nkt + kinetic / T::lit(3.0)) / (n * k);
    GlobalMoments { n, rho, u, t }
}

/// Moments of every species and of the mixture at node `j`.
pub fn node_moments<T: Real>(
    f: &DistributionField<T>,
    grid: &PhaseGrid<T>,
    cfg: &PhysicalConfig<T>,
    j: usize,
) -> Result<MomentSet<T>> {
    let mut species = [SpeciesMoments {
        n: T::zero(),
        rho: T::zero(),
        u: [T::zero(); 3],
        t: T::zero(),
    }; 4];
    for (s, slot) in species.iter_mut().enumerate() {
        *slot = species_moments(f, grid, cfg, j, s)?;
    }
    let global = global_moments(&species, cfg);
    Ok(MomentSet { species, global })
}

/// Moments at every spatial node.
pub fn moment_profile<T: Real>(
    f: &DistributionField<T>,
    grid: &PhaseGrid<T>,
    cfg: &PhysicalConfig<T>,
) -> Result<Vec<MomentSet<T>>> {
    f.check_grid(grid)?;
    (0..grid.n_nodes_x())
        .into_par_iter()
        .map(|j| node_moments(f, grid, cfg, j))
        .collect()
}

/// `int |f| (1 + |v|^2) dv` for values in flat velocity order.
pub fn weighted_norm<T: Real>(values: &[T], grid: &PhaseGrid<T>) -> T {
    let nt = grid.n_transverse();
    let tsq = grid.transverse_sq();
    let mut total = T::zero();
    for (i1, row) in values.chunks(nt).enumerate() {
        let base = T::one() + grid.v1()[i1] * grid.v1()[i1];
        let mut s = T::zero();
        for (val, t) in row.iter().zip(tsq) {
            s += val.abs() * (base + *t);
        }
        total += s;
    }
    total * grid.weight()
}

/// Weighted norm of `f_s - g_s` at every node.
fn difference_norms<T: Real>(
    f: &DistributionField<T>,
    g: Option<&DistributionField<T>>,
    grid: &PhaseGrid<T>,
    s: usize,
) -> Vec<T> {
    let tsq = grid.transverse_sq();
    (0..f.n_nodes)
        .into_par_iter()
        .map(|j| {
            let mut total = T::zero();
            for (i1, &v1) in grid.v1().iter().enumerate() {
                let base = T::one() + v1 * v1;
                let a = f.row(s, i1, j);
                let mut sum = T::zero();
                match g {
                    Some(g) => {
                        let b = g.row(s, i1, j);
                        for k in 0..a.len() {
                            sum += (a[k] - b[k]).abs() * (base + tsq[k]);
                        }
                    }
                    None => {
                        for k in 0..a.len() {
                            sum += a[k].abs() * (base + tsq[k]);
                        }
                    }
                }
                total += sum;
            }
            total * grid.weight()
        })
        .collect()
}

/// `d(f, g) = sum_s max_j || f_s(x_j) - g_s(x_j) ||`.
pub fn metric<T: Real>(f: &DistributionField<T>, g: &DistributionField<T>, grid: &PhaseGrid<T>) -> Result<T> {
    f.check_grid(grid)?;
    f.same_shape(g)?;
    let mut d = T::zero();
    for s in 0..4 {
        let norms = difference_norms(f, Some(g), grid, s);
        d += norms.into_iter().fold(T::zero(), T::max);
    }
    Ok(d)
}

/// `sum_s max_j || f_s(x_j) ||`, i.e. the distance to the zero field.
pub fn field_norm<T: Real>(f: &DistributionField<T>, grid: &PhaseGrid<T>) -> T {
    (0..4)
        .map(|s| difference_norms(f, None, grid, s).into_iter().fold(T::zero(), T::max))
        .sum()
}

/// Worst margins of one species over all nodes; nonnegative means satisfied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesOmega<T> {
    /// `min f` (nonnegativity).
    pub positivity: T,
    /// `min_j int f - a_{i,l}`.
    pub mass_lower: T,
    /// `min_j a_{i,u} - int f`.
    pub mass_upper: T,
    pub energy_lower: T,
    pub energy_upper: T,
    /// `min_j (int f)(int |v|^2 f) - (int v1 f)^2 - gamma_l`.
    pub defect: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaReport<T> {
    pub species: [SpeciesOmega<T>; 4],
    /// Worst margin divided by the size of its threshold.
    pub worst_relative: T,
}

impl<T: Real> OmegaReport<T> {
    pub fn passes(&self) -> bool {
        self.species.iter().all(|s| {
            s.positivity >= T::zero()
                && s.mass_lower >= T::zero()
                && s.mass_upper >= T::zero()
                && s.energy_lower >= T::zero()
                && s.energy_upper >= T::zero()
                && s.defect >= T::zero()
        })
    }
}

/// Checks nonnegativity, the density and energy brackets and the
/// Cauchy-Schwarz defect bound for every species at every node.
pub fn omega_membership<T: Real>(
    f: &DistributionField<T>,
    grid: &PhaseGrid<T>,
    budget: &BoundaryBudget<T>,
) -> Result<OmegaReport<T>> {
    f.check_grid(grid)?;
    let inf = T::infinity();
    let mut species = [SpeciesOmega {
        positivity: inf,
        mass_lower: inf,
        mass_upper: inf,
        energy_lower: inf,
        energy_upper: inf,
        defect: inf,
    }; 4];
    let mut worst = inf;
    for (s, out) in species.iter_mut().enumerate() {
        let raws: Vec<RawMoments<T>> = (0..grid.n_nodes_x())
            .into_par_iter()
            .map(|j| raw_moments(f, grid, j, s))
            .collect();
        for r in &raws {
            let defect = r.mass * r.energy - r.flux[0] * r.flux[0];
            let margins = [
                (r.min_value, T::one()),
                (r.mass - budget.a_l[s], budget.a_l[s]),
                (budget.a_u[s] - r.mass, budget.a_u[s]),
                (r.energy - budget.c_l[s], budget.c_l[s]),
                (budget.c_u[s] - r.energy, budget.c_u[s]),
                (defect - budget.gamma_min, budget.gamma_min),
            ];
            out.positivity = out.positivity.min(margins[0].0);
            out.mass_lower = out.mass_lower.min(margins[1].0);
            out.mass_upper = out.mass_upper.min(margins[2].0);
            out.energy_lower = out.energy_lower.min(margins[3].0);
            out.energy_upper = out.energy_upper.min(margins[4].0);
            out.defect = out.defect.min(margins[5].0);
            // Positivity is reported through its sign only.
            let pos = if r.min_value < T::zero() { r.min_value } else { inf };
            worst = worst.min(pos);
            for (m, scale) in &margins[1..] {
                if !m.is_finite() {
                    worst = T::nan();
                } else {
                    worst = worst.min(*m / *scale);
                }
            }
        }
    }
    Ok(OmegaReport {
        species,
        worst_relative: worst,
    })
}

// ---------------------------------------------------------------------------
// field dump

const DUMP_MAGIC: &str = "# reactive-slab field dump v1";

/// Writes one record per `(species, node)`: species, node, x, n, u1, u2, u3, T,
/// followed, if `with_values`, by every velocity value in flat order.
pub fn write_dump<T: Real, W: Write>(
    mut w: W,
    f: &DistributionField<T>,
    grid: &PhaseGrid<T>,
    moments: &[MomentSet<T>],
    with_values: bool,
) -> std::io::Result<()> {
    writeln!(w, "{DUMP_MAGIC}")?;
    writeln!(
        w,
        "grid {} {} {} {}",
        grid.nx(),
        grid.nv1(),
        grid.nv23(),
        grid.vmax().as_f64()
    )?;
    writeln!(w, "values {with_values}")?;
    writeln!(w, "# species node x n u1 u2 u3 T [f(v) in flat velocity order]")?;
    for s in 0..4 {
        for j in 0..grid.n_nodes_x() {
            let m = &moments[j].species[s];
            write!(
                w,
                "{} {} {} {} {} {} {} {}",
                s + 1,
                j,
                grid.x()[j].as_f64(),
                m.n.as_f64(),
                m.u[0].as_f64(),
                m.u[1].as_f64(),
                m.u[2].as_f64(),
                m.t.as_f64()
            )?;
            if with_values {
                for i1 in 0..grid.nv1() {
                    for v in f.row(s, i1, j) {
                        write!(w, " {}", v.as_f64())?;
                    }
                }
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Reads a dump written with velocity values back into a field on `grid`.
pub fn read_dump<T: Real, R: BufRead>(r: R, grid: &PhaseGrid<T>) -> Result<DistributionField<T>> {
    let bad = |msg: String| Error::Parse(format!("field dump: {msg}"));
    let mut lines = r.lines();
    let mut next = || -> Result<Option<String>> {
        lines
            .next()
            .transpose()
            .map_err(|e| bad(e.to_string()))
    };
    if next()?.as_deref() != Some(DUMP_MAGIC) {
        return Err(bad("missing header".into()));
    }
    let grid_line = next()?.ok_or_else(|| bad("missing grid line".into()))?;
    let parts: Vec<&str> = grid_line.split_whitespace().collect();
    let expect = [
        grid.nx().to_string(),
        grid.nv1().to_string(),
        grid.nv23().to_string(),
    ];
    if parts.len() != 5 || parts[0] != "grid" || parts[1..4] != expect {
        return Err(Error::GridMismatch(format!("dump grid `{grid_line}` differs from run grid")));
    }
    let vmax: f64 = parts[4].parse().map_err(|_| bad("bad vmax".into()))?;
    if (vmax - grid.vmax().as_f64()).abs() > 1e-12 * vmax.abs().max(1.0) {
        return Err(Error::GridMismatch(format!(
            "dump vmax {vmax} differs from run vmax {}",
            grid.vmax()
        )));
    }
    if next()?.as_deref() != Some("values true") {
        return Err(bad("dump has no velocity values".into()));
    }
    let mut field = DistributionField::zeros(grid);
    let nv = grid.n_velocity();
    let mut seen = vec![false; 4 * grid.n_nodes_x()];
    while let Some(line) = next()? {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut num = |what: &str| -> Result<f64> {
            it.next()
                .ok_or_else(|| bad(format!("missing {what}")))?
                .parse::<f64>()
                .map_err(|e| bad(format!("{what}: {e}")))
        };
        let s = num("species")? as usize;
        let j = num("node")? as usize;
        if !(1..=4).contains(&s) || j >= grid.n_nodes_x() {
            return Err(bad(format!("record index ({s}, {j}) out of range")));
        }
        for what in ["x", "n", "u1", "u2", "u3", "T"] {
            num(what)?;
        }
        let mut vals = Vec::with_capacity(nv);
        for _ in 0..nv {
            vals.push(T::lit(num("value")?));
        }
        if it.next().is_some() {
            return Err(bad(format!("too many values in record ({s}, {j})")));
        }
        field.set_node_values(s - 1, j, &vals);
        seen[(s - 1) * grid.n_nodes_x() + j] = true;
    }
    if seen.iter().any(|x| !x) {
        return Err(bad("dump does not cover every (species, node)".into()));
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{PhysicalParams, maxwellian_value};

    fn cfg() -> PhysicalConfig<f64> {
        PhysicalConfig::new(&PhysicalParams {
            masses: [1.0; 4],
            bond_energies: [0.0, 0.0, 0.5, 0.5],
            chi: [[0.5; 4]; 4],
            nu: [[1.0; 4]; 4],
            nu_forward: 0.0,
            nu_backward: 0.0,
            knudsen: 100.0,
            boltzmann: 1.0,
        })
        .unwrap()
    }

    fn grid() -> PhaseGrid<f64> {
        PhaseGrid::new(4, 32, 20, 8.0).unwrap()
    }

    fn maxwell_field(g: &PhaseGrid<f64>, n: f64, u: [f64; 3], t: f64) -> DistributionField<f64> {
        DistributionField::from_fn(g, |_, _, v| maxwellian_value(n, &u, t, 1.0, 1.0, &v))
    }

    #[test]
    fn layout_roundtrip() {
        let g = grid();
        let f = DistributionField::from_fn(&g, |s, j, v| s as f64 + 10.0 * j as f64 + v[0] + 0.1 * v[2]);
        for idx in [0, 17, g.n_velocity() - 1] {
            let v = g.velocity(idx);
            assert_eq!(f.get(2, 3, idx), 2.0 + 30.0 + v[0] + 0.1 * v[2]);
        }
        let vals = f.node_values(1, 2);
        let mut h = DistributionField::zeros(&g);
        h.set_node_values(1, 2, &vals);
        assert_eq!(h.node_values(1, 2), vals);
    }

    #[test]
    fn maxwellian_moments() {
        let g = grid();
        let f = maxwell_field(&g, 2.0, [0.3, 0.0, 0.0], 1.5);
        let m = species_moments(&f, &g, &cfg(), 1, 0).unwrap();
        assert!((m.n - 2.0).abs() < 1e-9);
        assert!((m.u[0] - 0.3).abs() < 1e-9);
        assert!(m.u[1].abs() < 1e-13 && m.u[2].abs() < 1e-13);
        assert!((m.t - 1.5).abs() < 1e-8, "{}", m.t);
        assert_eq!(m.rho, m.n);
    }

    #[test]
    fn zero_field_is_degenerate() {
        let g = grid();
        let f = DistributionField::zeros(&g);
        assert!(species_moments(&f, &g, &cfg(), 0, 0).is_err());
    }

    #[test]
    fn global_of_identical_species() {
        let c = cfg();
        let sm = SpeciesMoments {
            n: 1.3,
            rho: 1.3,
            u: [0.2, -0.1, 0.0],
            t: 0.8,
        };
        let gm = global_moments(&[sm; 4], &c);
        assert!((gm.n - 5.2).abs() < 1e-15);
        assert!((gm.u[0] - 0.2).abs() < 1e-15 && (gm.u[1] + 0.1).abs() < 1e-15);
        assert!((gm.t - 0.8).abs() < 1e-15);
    }

    #[test]
    fn global_counterflow_heats() {
        // Two species streaming against each other, two at rest: the mixture
        // velocity vanishes and the streams add rho u^2 / (3 n k) to T.
        let c = cfg();
        let u = 0.6;
        let mk = |ux: f64| SpeciesMoments {
            n: 1.0,
            rho: 1.0,
            u: [ux, 0.0, 0.0],
            t: 1.0,
        };
        let gm = global_moments(&[mk(u), mk(-u), mk(0.0), mk(0.0)], &c);
        assert!(gm.u[0].abs() < 1e-15);
        let expected = 1.0 + 2.0 * u * u / (3.0 * 4.0);
        assert!((gm.t - expected).abs() < 1e-15);
    }

    #[test]
    fn single_species_global() {
        let c = cfg();
        let tiny = SpeciesMoments {
            n: 1e-300,
            rho: 1e-300,
            u: [0.0; 3],
            t: 1.0,
        };
        let main = SpeciesMoments {
            n: 2.0,
            rho: 2.0,
            u: [0.1, 0.0, 0.0],
            t: 1.7,
        };
        let gm = global_moments(&[main, tiny, tiny, tiny], &c);
        assert!((gm.t - 1.7).abs() < 1e-14 && (gm.u[0] - 0.1).abs() < 1e-14);
    }

    #[test]
    fn weighted_norm_of_unit_maxwellian() {
        let g = PhaseGrid::new(4, 48, 24, 8.0).unwrap();
        let vals: Vec<f64> = g.tabulate(|v| maxwellian_value(1.0, &[0.0; 3], 1.0, 1.0, 1.0, &v));
        assert!((weighted_norm(&vals, &g) - 4.0).abs() < 1e-9);
        let doubled: Vec<f64> = vals.iter().map(|x| 2.0 * x).collect();
        assert!((weighted_norm(&doubled, &g) - 2.0 * weighted_norm(&vals, &g)).abs() < 1e-13);
        assert_eq!(weighted_norm(&vec![0.0; g.n_velocity()], &g), 0.0);
    }

    #[test]
    fn metric_basics() {
        let g = grid();
        let f = maxwell_field(&g, 1.0, [0.0; 3], 1.0);
        assert_eq!(metric(&f, &f, &g).unwrap(), 0.0);
        let z = DistributionField::zeros(&g);
        assert!((metric(&f, &z, &g).unwrap() - field_norm(&f, &g)).abs() < 1e-14);
        let other = PhaseGrid::new(4, 16, 20, 8.0).unwrap();
        assert!(metric(&f, &DistributionField::zeros(&other), &g).is_err());
    }

    #[test]
    fn omega_zero_field_fails_mass_bracket() {
        let g = grid();
        let c = cfg();
        let bd = crate::config::BoundaryData::uniform_maxwellian(1.0, 1.0);
        let table = bd.tabulate(&g, &c).unwrap();
        let b = crate::config::compute_boundary_budget(&table, &c, &g).unwrap();
        let z = DistributionField::zeros(&g);
        let r = omega_membership(&z, &g, &b).unwrap();
        assert!(!r.passes());
        assert!((r.species[0].mass_lower + b.a_l[0]).abs() < 1e-15);

        let mut f = maxwell_field(&g, 0.5, [0.0; 3], 1.0);
        assert!(omega_membership(&f, &g, &b).unwrap().passes());
        f.row_mut(2, 5, 1)[3] = -1e-9;
        let r = omega_membership(&f, &g, &b).unwrap();
        assert!(r.species[2].positivity < 0.0 && !r.passes());
    }

    #[test]
    fn dump_roundtrip() {
        let g = PhaseGrid::new(2, 4, 4, 3.0).unwrap();
        let f = DistributionField::from_fn(&g, |s, j, v| {
            maxwellian_value(1.0 + s as f64, &[0.1, 0.0, 0.0], 1.0 + 0.1 * j as f64, 1.0, 1.0, &v) * (1.0 + 1e-3 * v[0].sin())
        });
        let m = moment_profile(&f, &g, &cfg()).unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, &f, &g, &m, true).unwrap();
        let back = read_dump(std::io::Cursor::new(buf), &g).unwrap();
        assert_eq!(back, f);

        let mut short = Vec::new();
        write_dump(&mut short, &f, &g, &m, false).unwrap();
        assert!(read_dump(std::io::Cursor::new(short), &g).is_err());
    }
}
