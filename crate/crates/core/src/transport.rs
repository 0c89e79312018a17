//! Mild-solution operator: inflow data attenuated along characteristics plus
//! the reactive Maxwellian source accumulated cell by cell.
//!
//! Within each spatial cell the source is frozen at the cell Maxwellian (built
//! from the averaged endpoint parameters) and the frequency integral is linear,
//! so each cell update is exact:
//! `f_out = e^{-d} f_in + (1 - e^{-d}) M_cell`, `d = dN / (tau |v1|)`.

use rayon::prelude::*;

use crate::config::{InflowTable, PhysicalConfig};
use crate::equilibrium::{equilibrium_profile, Model, NodeParams};
use crate::error::{Error, Result};
use crate::fields::{metric, moment_profile, DistributionField, MomentSet};
use crate::grid::PhaseGrid;
use crate::scalar::Real;

/// Collision frequencies at the spatial nodes and their running integral.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyProfile<T> {
    /// `nu_i(x_j)`, indexed `[j][i]`.
    pub nodes: Vec<[T; 4]>,
    /// Trapezoidal cell integrals `dN_i` of cell `[x_j, x_{j+1}]`.
    pub cells: Vec<[T; 4]>,
    /// `N_i(x_j) = int_0^{x_j} nu_i`.
    pub cumulative: Vec<[T; 4]>,
}

impl<T: Real> FrequencyProfile<T> {
    pub fn new(nodes: Vec<[T; 4]>, dx: T) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::GridMismatch("frequency profile needs at least two nodes".into()));
        }
        for (j, row) in nodes.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                if !(*v > T::zero()) || !v.is_finite() {
                    return Err(Error::Degenerate(format!(
                        "collision frequency of species {} at node {j} is {v}",
                        i + 1
                    )));
                }
            }
        }
        let half = T::lit(0.5) * dx;
        let cells: Vec<[T; 4]> = nodes
            .windows(2)
            .map(|w| std::array::from_fn(|i| half * (w[0][i] + w[1][i])))
            .collect();
        let mut cumulative = Vec::with_capacity(nodes.len());
        let mut acc = [T::zero(); 4];
        cumulative.push(acc);
        for c in &cells {
            for i in 0..4 {
                acc[i] += c[i];
            }
            cumulative.push(acc);
        }
        Ok(FrequencyProfile {
            nodes,
            cells,
            cumulative,
        })
    }

    pub fn from_params(params: &[NodeParams<T>], grid: &PhaseGrid<T>) -> Result<Self> {
        Self::new(params.iter().map(|p| p.frequencies()).collect(), grid.dx())
    }
}

/// Separable cell Maxwellian `pref * g1(v1) * g2(v2) * g3(v3)`.
struct CellMaxwellian<T> {
    pref: T,
    u1: T,
    scale: T,
    transverse: Vec<T>,
}

fn cell_maxwellians<T: Real>(
    params: &[NodeParams<T>],
    grid: &PhaseGrid<T>,
    cfg: &PhysicalConfig<T>,
    s: usize,
) -> Result<Vec<CellMaxwellian<T>>> {
    let half = T::lit(0.5);
    let m = cfg.masses[s];
    let k = cfg.boltzmann;
    let v23 = grid.v23();
    (0..grid.nx())
        .map(|j| {
            let (na, ua, ta) = params[j].maxwellian_params(s);
            let (nb, ub, tb) = params[j + 1].maxwellian_params(s);
            let n = half * (na + nb);
            let t = half * (ta + tb);
            let u: [T; 3] = std::array::from_fn(|a| half * (ua[a] + ub[a]));
            if !(n > T::zero()) || !(t > T::zero()) || !n.is_finite() || !t.is_finite() || u.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "cell {j} equilibrium of species {} (n = {n}, T = {t})",
                    s + 1
                )));
            }
            let scale = m / (T::lit(2.0) * k * t);
            let pref = n * (scale / T::PI()).powf(T::lit(1.5));
            let g2: Vec<T> = v23.iter().map(|v| (-scale * (*v - u[1]) * (*v - u[1])).exp()).collect();
            let g3: Vec<T> = v23.iter().map(|v| (-scale * (*v - u[2]) * (*v - u[2])).exp()).collect();
            let mut transverse = Vec::with_capacity(v23.len() * v23.len());
            for a in &g2 {
                for b in &g3 {
                    transverse.push(*a * *b);
                }
            }
            Ok(CellMaxwellian {
                pref,
                u1: u[0],
                scale,
                transverse,
            })
        })
        .collect()
}

/// Applies the mild-solution operator with the given node equilibria.
pub fn apply_mild_operator<T: Real>(
    table: &InflowTable<T>,
    params: &[NodeParams<T>],
    freq: &FrequencyProfile<T>,
    grid: &PhaseGrid<T>,
    cfg: &PhysicalConfig<T>,
) -> Result<DistributionField<T>> {
    let nodes = grid.n_nodes_x();
    if params.len() != nodes || freq.nodes.len() != nodes {
        return Err(Error::GridMismatch(format!(
            "expected {nodes} node equilibria, got {} (frequencies {})",
            params.len(),
            freq.nodes.len()
        )));
    }
    let tau = cfg.knudsen;
    let cells: Vec<Vec<CellMaxwellian<T>>> = (0..4)
        .map(|s| cell_maxwellians(params, grid, cfg, s))
        .collect::<Result<_>>()?;

    let mut out = DistributionField::zeros(grid);
    let nt = grid.n_transverse();
    let nv1 = grid.nv1();
    let half = grid.first_positive();
    let nx = grid.nx();
    let block = out.block_len();
    out.as_mut_slice()
        .par_chunks_mut(block)
        .enumerate()
        .for_each(|(b, data)| {
            let (s, i1) = (b / nv1, b % nv1);
            let v1 = grid.v1()[i1];
            let speed = tau * v1.abs();
            let cm = &cells[s];
            let update = |data: &mut [T], from: usize, to: usize, cell: usize| {
                let d = freq.cells[cell][s] / speed;
                let keep = (-d).exp();
                let gain = -(-d).exp_m1();
                let c = &cm[cell];
                let g1 = c.pref * (-c.scale * (v1 - c.u1) * (v1 - c.u1)).exp();
                let (src, dst) = if from < to {
                    let (l, r) = data.split_at_mut(to * nt);
                    (&l[from * nt..from * nt + nt], &mut r[..nt])
                } else {
                    let (l, r) = data.split_at_mut(from * nt);
                    (&r[..nt], &mut l[to * nt..to * nt + nt])
                };
                for k in 0..nt {
                    dst[k] = keep * src[k] + gain * (g1 * c.transverse[k]);
                }
            };
            if i1 >= half {
                let inflow = &table.left[s][(i1 - half) * nt..(i1 - half + 1) * nt];
                data[..nt].copy_from_slice(inflow);
                for j in 0..nx {
                    update(data, j, j + 1, j);
                }
            } else {
                let inflow = &table.right[s][i1 * nt..(i1 + 1) * nt];
                data[nx * nt..].copy_from_slice(inflow);
                for j in (0..nx).rev() {
                    update(data, j + 1, j, j);
                }
            }
        });
    Ok(out)
}

/// Everything one application of the solution operator produces.
pub struct OperatorOutput<T> {
    pub field: DistributionField<T>,
    /// Moments of the input field.
    pub moments: Vec<MomentSet<T>>,
    /// Equilibria built from those moments.
    pub params: Vec<NodeParams<T>>,
}

/// `Phi(f)`: moments of `f`, node equilibria, then transport.
pub fn apply_solution_operator<T: Real>(
    f: &DistributionField<T>,
    table: &InflowTable<T>,
    model: Model,
    grid: &PhaseGrid<T>,
    cfg: &PhysicalConfig<T>,
    root_tol: T,
) -> Result<OperatorOutput<T>> {
    let moments = moment_profile(f, grid, cfg)?;
    let params = equilibrium_profile(&moments, model, cfg, root_tol)?;
    let freq = FrequencyProfile::from_params(&params, grid)?;
    let field = apply_mild_operator(table, &params, &freq, grid, cfg)?;
    Ok(OperatorOutput { field, moments, params })
}

/// Defect `d(f, Phi f)` of a candidate solution.
pub fn mild_residual<T: Real>(
    f: &DistributionField<T>,
    table: &InflowTable<T>,
    model: Model,
    grid: &PhaseGrid<T>,
    cfg: &PhysicalConfig<T>,
    root_tol: T,
) -> Result<T> {
    let out = apply_solution_operator(f, table, model, grid, cfg, root_tol)?;
    metric(f, &out.field, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{BoundaryData, PhysicalParams};
    use crate::equilibrium::SlowEquilibrium;
    use crate::fields::GlobalMoments;

    fn cfg(tau: f64) -> PhysicalConfig<f64> {
        PhysicalConfig::new(&PhysicalParams {
            masses: [1.0; 4],
            bond_energies: [0.0, 0.0, 0.5, 0.5],
            chi: [[0.5; 4]; 4],
            nu: [[1.0; 4]; 4],
            nu_forward: 0.0,
            nu_backward: 0.0,
            knudsen: tau,
            boltzmann: 1.0,
        })
        .unwrap()
    }

    fn constant_params(nodes: usize, nu: f64, n: f64, u: f64, t: f64) -> Vec<NodeParams<f64>> {
        let eq = SlowEquilibrium {
            nu: [nu; 4],
            source: 0.0,
            density: [n; 4],
            velocity: [[u, 0.0, 0.0]; 4],
            temperature: [t; 4],
            global: GlobalMoments {
                n: 4.0 * n,
                rho: 4.0 * n,
                u: [u, 0.0, 0.0],
                t,
            },
        };
        vec![NodeParams::Slow(eq); nodes]
    }

    #[test]
    fn cumulative_frequency() {
        let p = FrequencyProfile::new(vec![[1.0; 4], [3.0; 4], [5.0; 4]], 0.5).unwrap();
        assert_eq!(p.cumulative[0], [0.0; 4]);
        assert_eq!(p.cumulative[1], [1.0; 4]);
        assert_eq!(p.cumulative[2], [3.0; 4]);
        assert!(FrequencyProfile::new(vec![[1.0; 4], [0.0; 4]], 0.5).is_err());
    }

    #[test]
    fn boundary_rows_reproduce_inflow() {
        let g = PhaseGrid::new(6, 8, 6, 5.0).unwrap();
        let c = cfg(2.0);
        let table = BoundaryData::uniform_maxwellian(1.0, 1.0).tabulate(&g, &c).unwrap();
        let params = constant_params(g.n_nodes_x(), 2.0, 0.7, 0.1, 1.4);
        let freq = FrequencyProfile::from_params(&params, &g).unwrap();
        let f = apply_mild_operator(&table, &params, &freq, &g, &c).unwrap();
        let half = g.first_positive();
        let nt = g.n_transverse();
        for s in 0..4 {
            for i1 in half..g.nv1() {
                assert_eq!(f.row(s, i1, 0), &table.left[s][(i1 - half) * nt..(i1 - half + 1) * nt]);
            }
            for i1 in 0..half {
                assert_eq!(f.row(s, i1, g.nx()), &table.right[s][i1 * nt..(i1 + 1) * nt]);
            }
        }
        assert!(f.as_slice().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn free_streaming_limit() {
        let g = PhaseGrid::new(6, 8, 6, 5.0).unwrap();
        let c = cfg(1e12);
        let table = BoundaryData::uniform_maxwellian(1.0, 1.0).tabulate(&g, &c).unwrap();
        let params = constant_params(g.n_nodes_x(), 1.0, 2.0, 0.0, 3.0);
        let freq = FrequencyProfile::from_params(&params, &g).unwrap();
        let f = apply_mild_operator(&table, &params, &freq, &g, &c).unwrap();
        let half = g.first_positive();
        let nt = g.n_transverse();
        for j in 0..g.n_nodes_x() {
            for i1 in half..g.nv1() {
                for (a, b) in f.row(0, i1, j).iter().zip(&table.left[0][(i1 - half) * nt..]) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }
}
