use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bicomplex number is a zero divisor")]
    ZeroDivisor,

    #[error("finite-difference step {0} is below the cancellation guard")]
    StepTooSmall(f64),

    #[error("no interior sample point could be placed")]
    EmptySampleSet,

    #[error("integrand is not finite at quadrature node {0}")]
    NonFiniteSample(usize),

    #[error("inner product coefficient {0} is negative beyond the quadrature noise floor")]
    NegativeCoefficient(f64),

    #[error("point {0} lies outside the domain")]
    OutsideDomain(String),

    #[error("Gram matrix is ill-conditioned (estimate {condition:.3e}); largest stable basis size is {largest_stable_n}")]
    IllConditioned {
        condition: f64,
        largest_stable_n: usize,
    },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown field label `{0}`")]
    UnknownField(String),
}
