use thiserror::Error;

/// Errors produced by the numerical engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("direction has zero norm")]
    ZeroDirection,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite integrand value {value} at sample {index} (point {point:?})")]
    NonFiniteSample {
        index: usize,
        point: Vec<f64>,
        value: f64,
    },

    #[error("quadrature did not reach tolerance {tol:e} after {evaluations} subdivisions (estimate {estimate:e}, error {error:e})")]
    QuadratureLimit {
        tol: f64,
        evaluations: usize,
        estimate: f64,
        error: f64,
    },

    #[error("integration region is unbounded")]
    UnboundedRegion,

    #[error("point is not inside the domain")]
    NotInDomain,

    #[error("Lipschitz spot-check failed: |f(x)-f(y)| = {gap} > C|x-y| = {bound}")]
    LipschitzViolation { gap: f64, bound: f64 },

    #[error("conjugate gradient did not converge: relative residual {residual:e} after {iterations} iterations")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("density is not positive at t = {t}")]
    NonPositiveDensity { t: f64 },

    #[error("test function support [{lo}, {hi}] is not inside the section ({section_lo}, {section_hi})")]
    SupportOutsideSection {
        lo: f64,
        hi: f64,
        section_lo: f64,
        section_hi: f64,
    },

    #[error("function exceeds the bound {bound} (|f| = {value} at t = {t})")]
    Unbounded { bound: f64, value: f64, t: f64 },

    #[error("sequence is not convergent on the sample: |f_n - f| = {gap} at t = {t}")]
    NotConvergent { t: f64, gap: f64 },

    #[error("empty level set at t = {0}")]
    EmptyLevelSet(f64),

    #[error("missing cost certificate for m = {0}")]
    MissingCertificate(u32),

    #[error("duplicate atom support point {0:?}")]
    DuplicateAtom(Vec<f64>),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("{0} cannot be serialized")]
    NotSerializable(&'static str),

    #[error("malformed grid data: {0}")]
    MalformedGrid(String),

    #[error("empty intersection family: domain has negligible measure")]
    EmptyFamily,

    #[error("g_ext does not match f on the constrained node ({i}, {j}): {got} vs {expected}")]
    ConstraintMismatch {
        i: usize,
        j: usize,
        got: f64,
        expected: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
