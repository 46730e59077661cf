use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong between building a space and emitting a report.
///
/// Errors split into two families that the CLI maps onto distinct exit codes:
/// input/validation problems and numerical guards (small denominators,
/// resonances, frequency bins that merge across zero).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown factor label `{0}`")]
    UnknownFactor(String),
    #[error("duplicate factor label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid dimension {dim} for {kind} factor `{label}`")]
    InvalidDimension {
        label: String,
        kind: &'static str,
        dim: usize,
    },
    #[error("factor `{label}` is a {found}; {op} needs a {expected}")]
    WrongFactorKind {
        label: String,
        op: &'static str,
        expected: &'static str,
        found: &'static str,
    },
    #[error("level {level} out of range for factor `{label}` of dimension {dim}")]
    LevelOutOfRange {
        label: String,
        level: usize,
        dim: usize,
    },
    #[error("operators live on different product spaces")]
    SpaceMismatch,
    #[error("matrix shape {rows}x{cols} does not match space dimension {dim}")]
    ShapeMismatch { rows: usize, cols: usize, dim: usize },
    #[error("{what} is not Hermitian (relative residual {residual:e})")]
    NotHermitian { what: &'static str, residual: f64 },
    #[error("generator is not anti-Hermitian (relative residual {residual:e})")]
    NotAntiHermitian { residual: f64 },
    #[error("invalid block structure: {0}")]
    InvalidBlocks(String),
    #[error("H0 is not additive across the cut at factors {factors:?} (residual {residual:e})")]
    NotAdditive { factors: Vec<String>, residual: f64 },
    #[error("bin tolerance {bin_tol:e} merges frequency {omega:e} with the zero-frequency bin")]
    BinMerge { omega: f64, bin_tol: f64 },
    #[error(
        "zero-frequency content couples blocks {mu} and {nu}; blocks do not refine the degeneracies of H0"
    )]
    ZeroFrequencyOffBlock { mu: usize, nu: usize },
    #[error("small denominator: frequency {omega:e} couples blocks {mu} and {nu} (floor {floor:e})")]
    SmallDenominator {
        omega: f64,
        floor: f64,
        mu: usize,
        nu: usize,
    },
    #[error("resonance: denominator {denominator:e} at omega_B = {omega_b:e}")]
    Resonance { omega_b: f64, denominator: f64 },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{preset}`: missing parameter `{name}`")]
    MissingParam { preset: String, name: String },
    #[error("preset `{preset}`: unknown parameter `{name}`")]
    UnknownParam { preset: String, name: String },
    #[error("preset `{preset}`: bad parameter `{name}`: {reason}")]
    BadParam {
        preset: String,
        name: String,
        reason: String,
    },
    #[error("truncation for `{label}` is {n_max}, operator reach needs at least {needed}")]
    TruncationTooSmall {
        label: String,
        n_max: usize,
        needed: usize,
    },
    #[error("unsupported order {order} for {variant}")]
    InvalidOrder { order: usize, variant: &'static str },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("spec file: {0}")]
    Spec(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by the numerics of a valid input rather than
    /// by the input itself.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::BinMerge { .. }
                | Error::ZeroFrequencyOffBlock { .. }
                | Error::SmallDenominator { .. }
                | Error::Resonance { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Spec(e.to_string())
    }
}
