use thiserror::Error;

/// Broad category of an error, used by front ends to pick exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Budget,
    Precondition,
    Internal,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("map reduces to a constant")]
    DegeneratesToConstant,
    #[error("indeterminate form 0/0 at a shared root of numerator and denominator")]
    IndeterminateForm,
    #[error("Möbius transformation has zero determinant")]
    SingularMobius,
    #[error("map has degree {0}, which is too small for this operation")]
    DegreeTooSmall(usize),
    #[error("no regular value found; map is degenerate")]
    DegenerateMap,
    #[error("parity violated: degree {d}, circle degree {s}")]
    ParityViolation { d: i64, s: i64 },
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
    #[error("depth budget exceeded: {points} points at depth {depth}")]
    DepthBudgetExceeded { depth: usize, points: usize },
    #[error("map is not an orientation-preserving circle homeomorphism")]
    NotACircleHomeo,
    #[error("turning orbit of point {0} did not settle on a cycle")]
    NotEventuallyAttracted(usize),
    #[error("kneading sequences span {length} symbols, over the limit of {limit}")]
    KneadingTooLong { length: usize, limit: usize },
    #[error("kneading minors disagree")]
    InconsistentMinors,
    #[error("surjective non-covering map with no usable cut point")]
    UnsupportedSurjectiveNonCover,
    #[error("Cayley image is not real: imaginary residue {0:e}")]
    NotRealizable(f64),
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),
    #[error("multiplier condition fails: sum {0}")]
    ConditionFails(f64),
    #[error("degree constraint violated: {0}")]
    DegreeConstraintViolated(String),
    #[error("real critical point present at {0}")]
    RealCriticalPointPresent(f64),
    #[error("commutation fails: {0}")]
    CommutationFails(String),
    #[error("elimination degenerate")]
    EliminationDegenerate,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("sign pattern violated: {0}")]
    SignPatternViolated(String),
    #[error("multiplier {0} is not greater than 2")]
    MultiplierTooSmall(f64),
    #[error("no real repelling point of period at most 2")]
    NoRealRepeller,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            ZeroDenominator | DegeneratesToConstant | SingularMobius | DegreeTooSmall(_)
            | ParityViolation { .. } | ParameterOutOfRange(_) | SignPatternViolated(_)
            | MultiplierTooSmall(_) | DegreeConstraintViolated(_) | UnsupportedConfiguration(_) => {
                ErrorKind::Input
            }
            DepthBudgetExceeded { .. } | NotEventuallyAttracted(_) | KneadingTooLong { .. } => ErrorKind::Budget,
            IndeterminateForm | InternalConsistency(_) | InconsistentMinors => ErrorKind::Internal,
            _ => ErrorKind::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
