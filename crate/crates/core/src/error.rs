use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Error {
    #[error("overlap magnitude {magnitude:e} is too small for the phase to be defined")]
    DegenerateOverlap { magnitude: f64 },

    #[error("spherical triangle is degenerate: two vertices are parallel or antiparallel")]
    DegenerateTriangle,

    #[error("invalid angle {name} = {value} rad: {reason}")]
    InvalidAngle {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("photon number must be at least 1")]
    InvalidPhotonNumber,

    #[error("invalid count rate {0}: rates must be finite and non-negative")]
    InvalidRate(f64),

    #[error("invalid noise model: {0}")]
    InvalidModel(&'static str),

    #[error("both counting windows are empty; the ratio estimator is undefined")]
    EmptyWindow,

    #[error("small-angle condition violated: |theta1|/tan(theta2) / tan(1/2N) = {ratio:.3}")]
    SmallAngleViolation { ratio: f64 },

    #[error("invalid fringe scan: {0}")]
    InvalidScan(&'static str),

    #[error("sinusoid fit diverged: {0}")]
    FitDiverged(FitFailure),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FitFailure {
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("scan spans less than one period")]
    InsufficientSpan,
    #[error("non-finite residual")]
    NonFinite,
    #[error("reweighting did not converge")]
    Stalled,
}
