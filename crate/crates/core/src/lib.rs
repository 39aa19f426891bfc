//! Expected maximum of a centered 4-D Gaussian vector with unit variances.
//!
//! The crate evaluates the closed form F(Λ) for E[max(X1, X2, X3, X4)] and its
//! first and second derivatives in the correlation matrix, the tetrahedron
//! geometry obtained by embedding X1..X4 on the unit sphere, the mean width of
//! inscribed tetrahedra, a projected-gradient maximizer over the elliptope,
//! and a set of exact and numeric verification reports.
//!
//! Numeric code is generic over [`scalar::Scalar`] (any `num_traits::Float`
//! with `FloatConst`); the polynomial parts are generic over
//! [`scalar::Ring`] so they also run on exact rationals and on the sparse
//! polynomial type used by [`verify::poly`]. The aliases below fix `f64`.

pub mod battery;
pub mod closedform;
pub mod corrdomain;
pub mod geometry;
pub mod linalg;
pub mod montecarlo;
pub mod optimize;
pub mod quadrature;
pub mod scalar;
pub mod verify;

pub use corrdomain::{CorrDerived, CorrelationMatrix4, DomainClass, DomainTag, VertexGramian};
pub use scalar::{Ring, Scalar};

pub type Corr4 = corrdomain::CorrelationMatrix4<f64>;
pub type Derived = corrdomain::CorrDerived<f64>;
pub type Gradient = closedform::Gradient6<f64>;
pub type Hessian = closedform::Hessian6<f64>;
pub type Tetra = geometry::Tetrahedron<f64>;
pub type Dihedrals = geometry::DihedralSet<f64>;
pub type Feet = geometry::FootData<f64>;

/// Errors raised by domain checks and numeric routines.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid correlation matrix: {0}")]
    InvalidMatrix(String),
    #[error("matrix is outside S1: pair {0} has correlation 1")]
    NotInS1(String),
    #[error("matrix is singular; the operation needs a positive definite matrix")]
    Singular,
    #[error("arccos argument {value} for pair {pair} lies outside [-1, 1]")]
    ArccosDomain { pair: String, value: f64 },
    #[error("matrix has rank 4 and no tetrahedron in R^3")]
    Rank4,
    #[error("degenerate tetrahedron: {0}")]
    Degenerate(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("cannot parse field `{field}`: {msg}")]
    Parse { field: String, msg: String },
    #[error("tetrahedron is obtuse: {0}")]
    ObtuseInput(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
