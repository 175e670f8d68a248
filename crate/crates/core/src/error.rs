use thiserror::Error;

use crate::exprdsl::{EvalError, ParseError};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("point {point:?} lies outside the declared domain")]
    OutOfDomain { point: [f64; 4] },
    #[error("singular tetrad: |det e| = {det:e} at {point:?}")]
    SingularTetrad { det: f64, point: [f64; 4] },
    #[error("singular matrix")]
    SingularMatrix,
    #[error("spin connection derivatives are not available")]
    MissingDerivatives,
    #[error("Lorentz condition violated by {deviation:e} at {point:?}")]
    InvalidLorentz { deviation: f64, point: [f64; 4] },
    #[error("coordinate change is not invertible as supplied: deviation {deviation:e} at {point:?}")]
    InvalidCoordChange { deviation: f64, point: [f64; 4] },
    #[error("deformation support exceeds the integration box")]
    UnsupportedDeformation,
    #[error("no convergence after {iterations} iterations (best rms {best_rms:e})")]
    NonConvergence {
        iterations: usize,
        best_rms: f64,
        best: Vec<f64>,
    },
    #[error("section is not critical: residual rms {rms:e}")]
    NotCritical { rms: f64 },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
