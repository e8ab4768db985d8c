use alloc::boxed::Box;
use alloc::string::String;

use thiserror::Error;

use crate::partial_transpose::PtBlockDecomposition;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Fock cutoff n_max = {0} is below the minimum of 2")]
    InvalidCutoff(usize),

    #[error("matrix is not hermitian: max |m - m^dagger| = {deviation:e} exceeds {tolerance:e}")]
    NonHermitian { deviation: f64, tolerance: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("trace {0:e} is not positive")]
    ZeroTrace(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("photon number {n} exceeds the cutoff n_max = {n_max}")]
    CutoffExceeded { n: usize, n_max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("arithmetic overflow; largest admissible size is {max_admissible}")]
    Overflow { max_admissible: usize },

    #[error("partial transpose leaks outside the a-b blocks: residual {residual:e} > {tolerance:e}")]
    BlockLeakage {
        residual: f64,
        tolerance: f64,
        decomposition: Box<PtBlockDecomposition>,
    },

    #[error("diagonal scaling entry {index} is not strictly positive")]
    InvalidScaling { index: usize },

    #[error("beam splitter angle is pi/4; the contradiction check is void")]
    DegenerateAngle,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
