use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("evaluation at a pole: polynomial has negative powers and z = 0")]
    EvalAtPole,
    #[error("determinant is not a unit on C*: {0}")]
    NotUnitOnCStar(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("operation requires the {0} backend")]
    Backend(&'static str),
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),
    #[error("section space dimension unstable: {at_bound} at degree bound {bound}, {at_next} at {next}", next = .bound + 1)]
    DegreeBoundUnstable { bound: usize, at_bound: usize, at_next: usize },
    #[error("splitting scan exhausted window [{lo}, {hi}]")]
    ScanWindowExhausted { lo: i64, hi: i64 },
    #[error("splitting degrees sum to {sum}, winding is {winding}")]
    InconsistentWinding { sum: i64, winding: i64 },
    #[error("gauge is not invertible on its chart: {0}")]
    NotInvertibleOnChart(String),
    #[error("matrix is not quaternionic (A * conj(A) != -I)")]
    NotQuaternionic,
    #[error("quaternionic structure needs even dimension, got {0}")]
    OddDimension(usize),
    #[error("change of trivialization matrix is singular")]
    SingularP,
    #[error("matrix is singular")]
    Singular,
    #[error("restricted symplectic form is not constant along the twistor line (defect {0:e})")]
    NotConstant(f64),
    #[error("no unit phase makes the Hermitian form positive definite")]
    NoAdmissiblePhase,
    #[error("admissible phase is not representable in the exact backend")]
    PhaseNotRepresentable,
    #[error("(alpha, beta) = (0, 0) does not define a complex structure")]
    ZeroParameter,
    #[error("metric value is not real (imaginary part {0:e})")]
    NotReal(f64),
    #[error("section is not compatible with the bundle transition")]
    InvalidSection,
    #[error("normal bundle has h1 = {0}; canonical deformation needs h1 = 0")]
    NotRegular(usize),
    #[error("schema error: {0}")]
    Schema(String),
}
