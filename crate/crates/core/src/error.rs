use thiserror::Error;

/// Errors surfaced by the solver and its supporting machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "kernel weight negative at angle {angle} rad; admissible radii require \
         max(R1,R2) > {upper_bound} and min(R1,R2) < {lower_bound}"
    )]
    PositivityViolation {
        angle: f64,
        /// sqrt of max over angles of m(sigma+sigma'')/4
        upper_bound: f64,
        /// sqrt of min over angles of m(sigma+sigma'')/4
        lower_bound: f64,
    },

    #[error("Lagrange multiplier bracket could not be expanded to straddle the target area")]
    MultiplierNotBracketed,

    #[error("field has no zero contour")]
    NoInterface,

    #[error("front-tracking oracle breakdown: {0}")]
    OracleBreakdown(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
