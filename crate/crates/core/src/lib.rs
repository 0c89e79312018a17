//! Discrete-velocity solver for stationary reactive BGK models in a slab.
//!
//! Two reaction models are supported: a slow-reaction model whose reactive
//! Maxwellians carry per-species velocities and temperatures, and a
//! fast-reaction model with a shared velocity and temperature determined by
//! an implicit scalar equation. Stationary solutions are found as fixed points
//! of the mild-solution operator.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the command-line tool uses.

// `!(x > 0)` deliberately rejects NaN; index loops mirror the component formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod equilibrium;
pub mod error;
pub mod fields;
pub mod grid;
pub mod scalar;
pub mod solver;
pub mod transport;

pub use config::{
    compute_boundary_budget, load_config, BoundaryBudget, BoundaryData, InflowSpec, InflowTable,
    PhysicalConfig, PhysicalParams, RunConfig,
};
pub use equilibrium::{Model, NodeParams};
pub use error::{Error, Result};
pub use fields::{DistributionField, MomentSet};
pub use grid::{GridSpec, PhaseGrid, WeightMode};
pub use scalar::Real;
pub use solver::{solve, SolveReport, SolverSettings};

/// Phase grid in double precision.
pub type Grid = PhaseGrid<f64>;
/// Distribution field in double precision.
pub type Field = DistributionField<f64>;
/// Physical configuration in double precision.
pub type Config = PhysicalConfig<f64>;
/// Boundary budget in double precision.
pub type Budget = BoundaryBudget<f64>;
/// Per-node moments in double precision.
pub type Moments = MomentSet<f64>;
