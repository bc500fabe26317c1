//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("non-positive density rho = {rho} at r = {r}")]
    NonPositiveDensity { rho: f64, r: f64 },

    #[error("operation requires a {expected} gas model")]
    WrongKind { expected: &'static str },

    #[error("enthalpy argument h = {h} at r = {r} is outside the invertible range h < 1/2 (vacuum-limit breach)")]
    EnthalpyOutOfRange { h: f64, r: f64 },

    #[error("grid too coarse: n = {n} cells, need at least {min}")]
    TooCoarse { n: usize, min: usize },

    #[error("initial data reaches vacuum: rho = {rho} at r = {r}")]
    VacuumInit { rho: f64, r: f64 },

    #[error("state invalid at t = {t}: {reason}")]
    StateInvalid { t: f64, reason: String },

    #[error("time step dt = {dt} exceeds the CFL limit {limit}")]
    DtExceedsCfl { dt: f64, limit: f64 },

    #[error("fields live on different grids ({left} vs {right} cells)")]
    GridMismatch { left: usize, right: usize },

    #[error("time-centered residual needs both neighboring snapshots")]
    NeedsTwoSnapshots,

    #[error("derivative word of length {len} exceeds the implemented depth 2")]
    WordTooLong { len: usize },

    #[error("decay fit needs at least 8 samples spanning a decade in t ({reason})")]
    InsufficientSamples { reason: String },

    #[error("decay fit requires strictly positive values (m = {value} at t = {t})")]
    NonPositiveValues { value: f64, t: f64 },

    #[error("gradient norm vanishes; ratio undefined")]
    ZeroDenominator,

    #[error("field is not compactly supported inside the light cone (support radius {support} > {bound})")]
    SupportViolation { support: f64, bound: f64 },

    #[error("coefficient tensor violates the required symmetry at index {index:?}")]
    SymmetryViolation { index: Vec<usize> },

    #[error("sweep needs at least 2 epsilon values, got {got}")]
    InsufficientPoints { got: usize },

    #[error("convergence study needs >= 3 resolutions, each dividing the next: {reason}")]
    ResolutionMismatch { reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// aborted runs and everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InsufficientPoints { .. }
            | Error::ResolutionMismatch { .. }
            | Error::TooCoarse { .. } => 2,
            _ => 3,
        }
    }
}
