use thiserror::Error;

use crate::mesh::BoundaryTag;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structured mesh needs at least one cell per direction")]
    EmptyGrid,

    #[error("triangle {0} has non-positive area")]
    DegenerateTriangle(usize),

    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),

    #[error("boundary edge ({0}, {1}) has no boundary tag")]
    UntaggedBoundary(usize, usize),

    #[error("triangle {0} owns {1} contact edges, at most one is supported")]
    MultipleContactEdges(usize, usize),

    #[error("contact edge {0} is interior to the mesh")]
    InteriorContactEdge(usize),

    #[error("interior edge {edge} was tagged {tag:?}")]
    TaggedInteriorEdge { edge: usize, tag: BoundaryTag },

    #[error("penalty parameter must be positive, got {0}")]
    NonPositivePenalty(f64),

    #[error("invalid material: mu = {mu}, lambda = {lambda}")]
    InvalidMaterial { mu: f64, lambda: f64 },

    #[error("field has {found} coefficients, the mesh needs {expected}")]
    FieldSize { expected: usize, found: usize },

    #[error("field belongs to a different mesh")]
    MeshMismatch,

    #[error("singular pivot block at position {0} during sparse factorization")]
    SingularMatrix(usize),

    #[error("saddle point system is singular for active set {active:?}")]
    SingularSaddle { active: Vec<usize> },

    #[error("active set did not settle in {iterations} iterations (last two: {previous:?} -> {last:?})")]
    ActiveSetCycle {
        iterations: usize,
        previous: Vec<usize>,
        last: Vec<usize>,
    },

    #[error("multiplier residual check failed on contact edge {edge}: {detail}")]
    MultiplierMismatch { edge: usize, detail: String },

    #[error("problem has no exact solution")]
    NoExactSolution,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
