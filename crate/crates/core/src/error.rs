use thiserror::Error;

/// Errors shared by all layers of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A form degree outside the admissible range for the operation.
    #[error("invalid degree {degree} for {context}")]
    InvalidDegree { degree: usize, context: &'static str },

    /// Product of forms whose degrees sum past the space dimension.
    #[error("degree overflow: {0} + {1} exceeds 3")]
    DegreeOverflow(usize, usize),

    /// Two forms that must share a degree do not.
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    /// A metric tensor that is not symmetric positive definite.
    #[error("metric is not symmetric positive definite")]
    InvalidMetric,

    /// Strain so large the deformed metric loses positive definiteness.
    #[error("strain too large: deformed metric is not positive definite")]
    StrainTooLarge,

    /// A 9x9 matrix handed to the inverse stress isomorphism that does not
    /// lie in its image.
    #[error("matrix is not representable as a stress operator")]
    NotRepresentable,

    /// Barycentric evaluation outside the element.
    #[error("point lies outside the element")]
    PointOutsideElement,

    /// A tetrahedron with (numerically) zero volume.
    #[error("degenerate element: zero volume in element {0}")]
    DegenerateElement(usize),

    /// Trace requested on a face that is not part of the requested surface.
    #[error("face is not on the requested surface")]
    FaceNotOnSurface,

    /// Malformed mesh file.
    #[error("mesh format error at line {line}: {message}")]
    MeshFormat { line: usize, message: String },

    /// Mesh connectivity that violates a construction invariant.
    #[error("invalid mesh: {0}")]
    MeshInvalid(String),

    /// Elastic load with no essential constraints that does work on rigid
    /// displacements.
    #[error("ill-posed load: relative rigid-mode projection {0:.3e}")]
    IllPosedLoad(f64),

    /// Magnetic source with a nonzero gradient-cochain component.
    #[error("current source is not solenoidal: relative gradient component {0:.3e}")]
    NonSolenoidalCurrent(f64),

    /// Iterative solve that did not reach its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        /// Residual norm per iteration, for post-mortem inspection.
        history: Vec<f64>,
    },

    /// Inconsistent problem specification.
    #[error("problem specification error: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
