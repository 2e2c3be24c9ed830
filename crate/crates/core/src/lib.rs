//! Geometry and Bayesian model selection for hierarchical loglinear models
//! on multinomial contingency tables.
//!
//! The crate builds the marginal polytope of a hierarchical model (the
//! convex hull of the 0/1 interaction vectors of its cells), enumerates its
//! facets both through closed-form catalogues and through an exact rational
//! hull oracle, evaluates the characteristic function of the polytope's
//! interior, computes prior and posterior normalizing constants of the
//! conjugate prior on the loglinear parameter, and turns all of that into
//! Bayes factors, their vanishing-precision asymptotics, and effective
//! degrees of freedom for model comparison.
//!
//! Everything geometric is exact: facet activity, face dimensions, and
//! polar volumes are computed over arbitrary-precision rationals, so the
//! integer-valued quantities that drive model selection carry no rounding
//! uncertainty.

pub mod bayes;
pub mod charfun;
pub mod error;
pub mod geometry;
pub mod io;
pub mod model;
pub mod normalizers;
pub mod numerics;
pub mod polytope;
pub mod quadrature;
pub mod rational;

pub use error::{Error, Result};
pub use model::{
    build_index_set, triangle, Cell, ContingencyTable, GeneratingClass, IndexSet, LoglinearParam,
    MarginalIndex, Model, VarSet, Variable,
};
pub use normalizers::{DecomposableStructure, LogNormalizer};
pub use polytope::{AffineForm, FaceReport, FacetList, FacetProvenance, MarginalPolytope};
pub use charfun::CharFunValue;
pub use bayes::{BayesReport, ModelPair};
