use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("mode set mismatch: {0}")]
    ModeMismatch(String),

    #[error("unknown mode `{0}`")]
    UnknownMode(String),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "wavelength {wavelength_nm} nm outside validity window [{min_nm}, {max_nm}] nm of `{name}`"
    )]
    OutOfRange {
        name: String,
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("energy conservation violated: relative mismatch {0:.3e}")]
    EnergyConservation(f64),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("fit did not converge after {iterations} iterations (residual norm {residual:.6e})")]
    FitDiverged { iterations: usize, residual: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cannot read {}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
