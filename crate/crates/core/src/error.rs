use thiserror::Error;

/// Errors produced by the solver and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("spectrum is not conjugate symmetric: imaginary residue {residue:.3e} relative to {scale:.3e}")]
    SymmetryViolation { residue: f64, scale: f64 },

    #[error("fractional order {0} is outside (0, 1)")]
    InvalidOrder(f64),

    #[error("kernel width {width:.4e} is below two grid cells ({min:.4e}); the grid cannot resolve this epsilon")]
    UnresolvedKernel { width: f64, min: f64 },

    #[error("kernel support radius {radius:.4e} exceeds half the box ({half_box:.4e})")]
    KernelTooWide { radius: f64, half_box: f64 },

    #[error("invalid mollifier: {0}")]
    InvalidMollifier(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("regularised coefficient minimum {min:.6e} falls below floor {floor:.6e}")]
    PositivityViolation { min: f64, floor: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid sample set: {0}")]
    InvalidSamples(String),

    #[error("invalid operator data: {0}")]
    InvalidOperator(String),

    #[error("grid too large for brute-force double sum ({points} weighted points > {limit})")]
    CostGuard { points: usize, limit: usize },

    #[error("field is not compactly supported inside the box: boundary shell max {shell:.3e} vs max {max:.3e}")]
    SupportViolation { shell: f64, max: f64 },

    #[error("invalid run configuration: {0}")]
    InvalidRun(String),

    #[error("conjugate gradients did not converge{}: residual {residual:.3e} after {iterations} iterations", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    CgDivergence {
        step: Option<usize>,
        iterations: usize,
        residual: f64,
    },

    #[error("trace does not match snapshots: {0}")]
    TraceMismatch(String),

    #[error("consistency study needs regular data: {0}")]
    NotRegularData(String),

    #[error("net aborted: {failed} of {total} epsilon values failed; first failure: {first}")]
    NetAborted {
        failed: usize,
        total: usize,
        first: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
