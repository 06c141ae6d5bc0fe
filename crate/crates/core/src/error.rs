use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("gamma pole at non-positive integer {0}")]
    Pole(String),

    /// A denominator or determinant fell below the precision-dependent threshold.
    #[error("near-zero {what}: |value| = {magnitude:e} at {bits} bits")]
    NearZero {
        what: String,
        magnitude: f64,
        bits: u32,
    },

    #[error(
        "{what}: precision certificate failed ({achieved:e} > tol {tol:e}) at max_bits {bits}"
    )]
    Certification {
        what: String,
        achieved: f64,
        tol: f64,
        bits: u32,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("exponent range exceeded in {0}")]
    Overflow(String),

    /// A formal-series coefficient equation admits two distinct roots and no
    /// selection rule applies.
    #[error("branch obstruction at order {order}: {detail}")]
    BranchObstruction { order: usize, detail: String },

    #[error("denominator vanishes at order {order}: {detail}")]
    DenominatorVanishing { order: usize, detail: String },

    #[error("formal series: {0}")]
    Series(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Errors that may disappear when the computation is repeated at a higher
    /// working precision.
    pub fn is_precision_sensitive(&self) -> bool {
        matches!(self, Error::NearZero { .. } | Error::Quadrature(_))
    }
}
