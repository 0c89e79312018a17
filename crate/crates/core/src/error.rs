use thiserror::Error;

/// Errors produced while loading inputs or running the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    /// A configuration invariant is violated; `field` names the offending key.
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Inflow data (or a field) is too degenerate for the requested quantity.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// Reactive equilibrium parameters lost positivity.
    #[error("equilibrium breakdown for species {species} at node {node}: {message}")]
    Breakdown {
        species: usize,
        node: usize,
        sweep: Option<usize>,
        message: String,
    },

    #[error("root solve failed at node {node}: {message}")]
    RootSolve { node: usize, message: String },

    #[error("iteration diverged at sweep {sweep}: distance {distance:e}")]
    Divergence { sweep: usize, distance: f64 },

    #[error("no convergence after {sweeps} sweeps: distance {distance:e}")]
    MaxIterations { sweeps: usize, distance: f64 },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Tags equilibrium and root-solve failures with the spatial node.
    pub(crate) fn at_node(self, node: usize) -> Self {
        match self {
            Error::Breakdown {
                species,
                sweep,
                message,
                ..
            } => Error::Breakdown {
                species,
                node,
                sweep,
                message,
            },
            Error::RootSolve { message, .. } => Error::RootSolve { node, message },
            other => other,
        }
    }

    /// Tags equilibrium failures with the sweep in which they happened.
    pub(crate) fn at_sweep(self, sweep: usize) -> Self {
        match self {
            Error::Breakdown {
                species,
                node,
                message,
                ..
            } => Error::Breakdown {
                species,
                node,
                sweep: Some(sweep),
                message,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
