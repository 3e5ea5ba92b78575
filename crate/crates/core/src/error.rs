use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("no bracket for the shooting parameter up to V(0) = {0}")]
    NoBracket(f64),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("quadrature unstable: {what} (estimates {coarse:.3e} vs {fine:.3e})")]
    QuadratureUnstable { what: String, coarse: f64, fine: f64 },
    #[error("unsupported moment (a = {a}, b = {b}); a must be 0 or 1 and b must be 1 or 3")]
    UnsupportedMoment { a: u32, b: u32 },
    #[error("point out of chart: |y| = {norm:.4} exceeds radius {radius:.4}")]
    OutOfChart { norm: f64, radius: f64 },
    #[error("singular metric (det = {0:.3e})")]
    SingularMetric(f64),
    #[error("degenerate landscape: mean curvature is constant within tolerance (spread {spread:.3e})")]
    DegenerateLandscape { spread: f64 },
    #[error("cutoff radius {r_cut} exceeds chart validity radius {r_chart}")]
    ChartOverflow { r_cut: f64, r_chart: f64 },
    #[error("mean curvature {0:.3e} too small to normalise the slope")]
    DegenerateH(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigensolver did not converge: {0}")]
    EigenNotConverged(String),
    #[error("mesh too coarse: {nodes_per_radius:.1} nodes per curvature radius (need 40)")]
    MeshTooCoarse { nodes_per_radius: f64 },
    #[error("linear solve failed: {0}")]
    LinearSolveFailed(String),
    #[error("newton diverged: {0}")]
    Diverged(String),
    #[error("newton converged to the trivial solution")]
    ConvergedToTrivial,
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
