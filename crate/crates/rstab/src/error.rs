//! Crate-wide error type and result alias.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // Newton-tensor algebra
    #[error("operator is not symmetric: max asymmetry {asymmetry:.3e} exceeds {tol:.3e}")]
    NonSymmetricInput { asymmetry: f64, tol: f64 },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension {n} outside supported range {min}..={max}")]
    UnsupportedDimension { n: usize, min: usize, max: usize },
    #[error("empty tensor field")]
    EmptyField,

    // Geometry
    #[error("unknown catalog surface `{0}`")]
    UnknownSurface(String),
    #[error("bad surface parameters: {0}")]
    BadParams(String),
    #[error("degenerate first fundamental form at node {node}")]
    DegenerateMetric { node: usize },
    #[error("curvature oracle failed at node {node}: {reason}")]
    OracleFailure { node: usize, reason: String },
    #[error("operation requires a declared space-form ambient")]
    NotSpaceForm,
    #[error("resolution {got} too coarse: need at least {need} nodes per period/edge")]
    ResolutionTooCoarse { got: u32, need: u32 },
    #[error("mesh file not found: {0}")]
    MeshNotFound(String),
    #[error("malformed mesh file: {0}")]
    MeshParse(String),
    #[error("mesh is not orientable (inconsistent face windings)")]
    NotOrientable,
    #[error("variation destroyed the immersion at node {node} (step {t})")]
    ImmersionLost { node: usize, t: f64 },

    // Assembly
    #[error("surface is not admissible for r = {r}: P_r is {class}")]
    NotAdmissible { r: usize, class: String },
    #[error("ambient kind does not support this operation: {0}")]
    AmbientMismatch(String),
    #[error("insufficient stencil at node {node}: {rows} samples for {unknowns} unknowns")]
    InsufficientStencil {
        node: usize,
        rows: usize,
        unknowns: usize,
    },
    #[error("P_r is numerically singular at node {node} (|det| = {det:.3e})")]
    SingularPr { node: usize, det: f64 },
    #[error("H_{{r+1}} is not constant: relative variation {variation:.3e} exceeds {tol:.3e}")]
    NotConstantHr1 { variation: f64, tol: f64 },
    #[error("trace identity cross-check failed at node {node}: |direct - identity| = {defect:.3e}")]
    IdentityCrossCheck { node: usize, defect: f64 },

    // Spectral
    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    SolverDivergence { iterations: usize, residual: f64 },
    #[error("principal iteration converged to a sign-changing function (min value {min_value:.3e}, lambda estimate {lambda:.6e})")]
    PositivityLost { min_value: f64, lambda: f64 },
    #[error("test function must be positive on interior nodes (node {node} has value {value:.3e})")]
    NonPositiveTestFunction { node: usize, value: f64 },
    #[error("operator is not flagged symmetric; use the non-self-adjoint solver")]
    NotSymmetricOperator,

    // Bounds
    #[error("distance queries are unsupported for general ambients")]
    GeneralAmbientUnsupported,
    #[error("ball domain contains no surface nodes")]
    EmptyDomain,
    #[error("domain has no Dirichlet boundary; the lower bound needs a bounded proper domain")]
    EmptyBoundary,
    #[error("ambient sectional-curvature infimum is required but not set")]
    MissingSecInfimum,
    #[error("pinching hypothesis fails: worst ratio {worst:.6e} vs -Sec = {bound:.6e}")]
    PinchingFails { worst: f64, bound: f64 },

    // CLI / config
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("config field error: {0}")]
    ConfigField(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code per the CLI contract: 2 usage/config, 3 solver, 1 other failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::ConfigField(_) => 2,
            Error::MeshNotFound(_) => 2,
            Error::SolverDivergence { .. } | Error::PositivityLost { .. } => 3,
            _ => 1,
        }
    }
}
