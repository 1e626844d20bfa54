use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("incompatible cyclotomic orders: {0} vs {1}")]
    IncompatibleOrders(u64, u64),

    #[error("Weyl group too large (bound {0})")]
    WeylGroupTooLarge(usize),

    #[error("invalid root datum: {0}")]
    InvalidDatum(String),

    #[error("root subset is not a Levi subsystem: {0}")]
    NotLevi(String),

    #[error("semidirect decomposition violated: {0}")]
    SemidirectViolated(String),

    #[error("length l' undefined: finite part does not preserve the endoscopic root subsystem")]
    LengthUndefined,

    #[error("affine root is not in the subsystem")]
    RootNotInSubsystem,

    #[error("coweight {0:?} is not dominant regular")]
    NotDominantRegular(Vec<i64>),

    #[error("not a center element: {0}")]
    NotCenterElement(String),

    #[error("regular case only: {0}")]
    RegularCaseOnly(String),

    #[error("incompatible ambients: {0}")]
    IncompatibleAmbient(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
