//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by model construction, geometry kernels, and evaluators.
#[derive(Debug, Error)]
pub enum Error {
    /// The model specification violates an invariant (empty generator,
    /// cardinality below 2, unknown variable, ...).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The contingency table is malformed (negative count, level out of
    /// range, missing column, empty table).
    #[error("invalid table: {0}")]
    InvalidTable(String),

    /// The generators are not the cliques of their interaction graph, so no
    /// junction structure exists.
    #[error("model is not decomposable: {0}")]
    NotDecomposable(String),

    /// The interaction graph has a chordless cycle.
    #[error("interaction graph is not chordal: {0}")]
    NotChordal(String),

    /// The model is not the binary model of an n-cycle (n >= 3).
    #[error("model is not a binary cycle: {0}")]
    NotACycle(String),

    /// An exact-geometry routine was asked to run above its configured size
    /// bound.
    #[error("dimension too large for {what}: {value} exceeds bound {bound}")]
    DimensionTooLarge {
        what: &'static str,
        value: usize,
        bound: usize,
    },

    /// A point handed to a face computation violates a facet inequality.
    #[error("point lies outside the polytope: {0}")]
    OutsidePolytope(String),

    /// An evaluator that needs a strictly interior point was called on the
    /// boundary or outside.
    #[error("point is on the boundary or outside the domain: {0}")]
    BoundaryOrOutside(String),

    /// The vectors passed as a cone basis are linearly dependent.
    #[error("basis vectors are linearly dependent")]
    SingularBasis,

    /// The evaluation point is not interior to the dual cone.
    #[error("point is not interior to the dual cone")]
    WrongCone,

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failed to converge: {0}")]
    NonConvergence(String),

    /// No implemented route can compute the requested quantity.
    #[error("not computable with the available routes: {0}")]
    NonComputable(String),

    /// A log-probability vector is not in the span of the model; the
    /// round-trip residual exceeded the membership tolerance.
    #[error("distribution not in the model: round-trip residual {residual:e} exceeds {tol:e}")]
    NotInModel { residual: f64, tol: f64 },

    /// An exact-geometry kernel received degenerate input.
    #[error("degenerate geometry: {0}")]
    Geometry(String),

    /// File or parse failure in the IO layer.
    #[error("{0}")]
    Io(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
