use thiserror::Error;

/// Errors across the engine. The CLI maps these onto exit codes: parse and
/// usage problems exit 1, out-of-scope inputs exit 2, and internal
/// soundness failures (a result that fails its own verification) exit 3.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("mismatched variable counts: {left} vs {right}")]
    MismatchedVars { left: u32, right: u32 },

    #[error("conjugate derivative requested on a holomorphic polynomial")]
    ConjugateOnHolo,

    #[error("coordinate change is not invertible in the linear-plus-shear class")]
    NonInvertibleChange,

    #[error("generator count mismatch: {left} vs {right}")]
    GeneratorCountMismatch { left: usize, right: usize },

    #[error("weight lengths differ: {left} vs {right}")]
    WeightLengthMismatch { left: usize, right: usize },

    #[error("list is not equally-ordered: {0}")]
    NotEquallyOrdered(String),

    #[error("derivative ideal list contains a conjugated entry")]
    ConjugatedEntry,

    #[error("not nu-admissible: {0}")]
    NotAdmissible(String),

    #[error("torsion detected: antiholomorphic term {0} survives")]
    TorsionDetected(String),

    #[error("zero pivot coefficient in shear extraction")]
    ZeroPivot,

    #[error("requires pre-normalization: {0}")]
    PreNormalizationRequired(String),

    #[error("normalization failure: {0}")]
    NormalizationFailure(String),

    #[error("candidate bound exceeded: {0}")]
    CandidateBoundExceeded(String),

    #[error("engine and oracle disagree: engine {engine}, oracle {oracle}")]
    OracleDisagreement { engine: String, oracle: String },

    #[error("out-of-scope input: {0}")]
    OutOfScope(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Usage(_) => 1,
            Error::OutOfScope(_) | Error::PreNormalizationRequired(_) => 2,
            _ => 3,
        }
    }
}
