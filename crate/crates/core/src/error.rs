use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a special function or formula.
    #[error("{what}: argument {value} outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    /// A Bessel function of the second kind left the representable range.
    #[error("Hankel function of order {order} overflows at argument {argument}; truncate the series")]
    Overflow { order: usize, argument: f64 },
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error("wavenumber {0} is not in the admissible set")]
    NotAdmissible(f64),
    #[error("evaluation point at radius {radius} is not outside the circle of radius {limit} enclosing the source box")]
    Geometry { radius: f64, limit: f64 },
    #[error("evaluation point coincides with a point source")]
    Singularity,
    #[error("invalid data: {0}")]
    Data(&'static str),
    /// The field modulus vanishes on a whole sector, so no reference
    /// amplitude can be calibrated there.
    #[error("degenerate amplitude on sector {sector} at wavenumber {k}")]
    DegenerateAmplitude { sector: usize, k: f64 },
    #[error("singular retrieval system (|det A| = {det:e}) on sector {sector}")]
    SingularSystem { sector: usize, det: f64 },
    #[error("{samples} samples cannot resolve {n_max} angular modes without aliasing")]
    Aliasing { samples: usize, n_max: usize },
    #[error("fields supplied at wavenumber {supplied} but the mode requires {expected}")]
    WavenumberMismatch { expected: f64, supplied: f64 },
    #[error("relative error is undefined for an all-zero reference")]
    UndefinedMetric,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}
