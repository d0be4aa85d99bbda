use thiserror::Error;

/// Which end of a validity interval was violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Lower => f.write_str("lower"),
            Bound::Upper => f.write_str("upper"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {lambda:e} m violates the {bound} bound of the valid range [{min:e}, {max:e}] m of model `{model}`")]
    OutOfRange {
        model: String,
        lambda: f64,
        min: f64,
        max: f64,
        bound: Bound,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid dispersion model: {0}")]
    InvalidModel(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),

    #[error(
        "signal and idler group indices are equal (n_g = {0}); the linear phase-matching rate is \
         undefined, use the degenerate (quadratic phase-matching) numeric path instead"
    )]
    DegenerateDispersion(f64),

    #[error("integrand pole at l = {re:.6e}{im:+.6e}i lies on the integration segment [-1, 1]")]
    Singularity { re: f64, im: f64 },

    #[error(
        "quadrature did not converge: error estimate {achieved:e} exceeds target {target:e} \
         after {panels} panels"
    )]
    NonConvergence {
        achieved: f64,
        target: f64,
        panels: usize,
    },

    #[error("failed to read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
