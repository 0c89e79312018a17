//! Phase-space discretization of the slab `[0, 1]` and a truncated velocity box.
//!
//! Velocity nodes are cell-centered on `[-vmax, vmax]` along every axis, so an
//! even `v1` count never places a node on `v1 = 0` and the singular weight
//! `1/|v1|` stays finite. Velocity-space arrays use the flat order
//! `(i1 * n23 + i2) * n23 + i3`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Grid parameters as they appear in the `[grid]` config section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub nv1: usize,
    pub nv23: usize,
    /// Truncation radius; `None` asks the caller to derive one from the inflow data.
    pub vmax: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nx: 64,
            nv1: 48,
            nv23: 24,
            vmax: None,
        }
    }
}

/// How [`PhaseGrid::integrate`] weights the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Plain,
    InverseV1,
}

#[derive(Debug, Clone)]
pub struct PhaseGrid<T> {
    nx: usize,
    dx: T,
    x: Vec<T>,
    v1: Vec<T>,
    v23: Vec<T>,
    vmax: T,
    h1: T,
    h23: T,
    /// `v2^2 + v3^2` per transverse index `i2 * n23 + i3`.
    transverse_sq: Vec<T>,
}

fn cell_centers<T: Real>(n: usize, vmax: T) -> (Vec<T>, T) {
    let h = (vmax + vmax) / T::of_usize(n);
    let nodes = (0..n)
        .map(|k| -vmax + (T::of_usize(k) + T::lit(0.5)) * h)
        .collect();
    (nodes, h)
}

impl<T: Real> PhaseGrid<T> {
    /// Builds the grid. An odd `nv1` is bumped to the next even count so that
    /// no `v1` node sits at zero.
    pub fn new(nx: usize, nv1: usize, nv23: usize, vmax: T) -> Result<Self> {
        if nx < 2 {
            return Err(Error::Grid(format!("nx must be at least 2, got {nx}")));
        }
        if nv1 < 4 || nv23 < 4 {
            return Err(Error::Grid(format!(
                "velocity node counts must be at least 4, got nv1={nv1}, nv23={nv23}"
            )));
        }
        if !(vmax > T::zero()) || !vmax.is_finite() {
            return Err(Error::Grid(format!("vmax must be positive, got {vmax}")));
        }
        let nv1 = nv1 + nv1 % 2;
        let (v1, h1) = cell_centers(nv1, vmax);
        let (v23, h23) = cell_centers(nv23, vmax);
        let dx = T::one() / T::of_usize(nx);
        let x = (0..=nx).map(|j| T::of_usize(j) / T::of_usize(nx)).collect();
        let mut transverse_sq = Vec::with_capacity(nv23 * nv23);
        for &a in &v23 {
            for &b in &v23 {
                transverse_sq.push(a * a + b * b);
            }
        }
        Ok(PhaseGrid {
            nx,
            dx,
            x,
            v1,
            v23,
            vmax,
            h1,
            h23,
            transverse_sq,
        })
    }

    pub fn from_spec(spec: &GridSpec, vmax: T) -> Result<Self> {
        Self::new(spec.nx, spec.nv1, spec.nv23, vmax)
    }

    /// Number of spatial cells; there are `nx + 1` nodes.
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn n_nodes_x(&self) -> usize {
        self.nx + 1
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn v1(&self) -> &[T] {
        &self.v1
    }

    pub fn v23(&self) -> &[T] {
        &self.v23
    }

    pub fn nv1(&self) -> usize {
        self.v1.len()
    }

    pub fn nv23(&self) -> usize {
        self.v23.len()
    }

    /// Number of transverse `(v2, v3)` nodes per `v1` node.
    pub fn n_transverse(&self) -> usize {
        self.transverse_sq.len()
    }

    pub fn n_velocity(&self) -> usize {
        self.v1.len() * self.transverse_sq.len()
    }

    pub fn vmax(&self) -> T {
        self.vmax
    }

    /// Quadrature weight of every velocity node (uniform midpoint rule).
    pub fn weight(&self) -> T {
        self.h1 * self.h23 * self.h23
    }

    pub fn h1(&self) -> T {
        self.h1
    }

    pub fn h23(&self) -> T {
        self.h23
    }

    pub fn transverse_sq(&self) -> &[T] {
        &self.transverse_sq
    }

    /// Index of the first `v1 > 0` node; nodes below it have `v1 < 0`.
    pub fn first_positive(&self) -> usize {
        self.v1.len() / 2
    }

    /// Velocity at flat index `idx`.
    pub fn velocity(&self, idx: usize) -> [T; 3] {
        let n23 = self.v23.len();
        let i1 = idx / (n23 * n23);
        let rem = idx % (n23 * n23);
        [self.v1[i1], self.v23[rem / n23], self.v23[rem % n23]]
    }

    pub fn speed_sq(&self, idx: usize) -> T {
        let nt = self.transverse_sq.len();
        let v1 = self.v1[idx / nt];
        v1 * v1 + self.transverse_sq[idx % nt]
    }

    /// Quadrature of `values` (one per velocity node, flat order).
    pub fn integrate(&self, values: &[T], mode: WeightMode) -> Result<T> {
        if values.len() != self.n_velocity() {
            return Err(Error::GridMismatch(format!(
                "expected {} velocity values, got {}",
                self.n_velocity(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("integrand".into()));
        }
        let nt = self.n_transverse();
        let mut total = T::zero();
        for (i1, row) in values.chunks(nt).enumerate() {
            let s: T = row.iter().copied().sum();
            total += match mode {
                WeightMode::Plain => s,
                WeightMode::InverseV1 => s / self.v1[i1].abs(),
            };
        }
        Ok(total * self.weight())
    }

    /// Samples `f(v)` at every velocity node.
    pub fn tabulate(&self, mut f: impl FnMut([T; 3]) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n_velocity());
        for &a in &self.v1 {
            for &b in &self.v23 {
                for &c in &self.v23 {
                    out.push(f([a, b, c]));
                }
            }
        }
        out
    }
}
