//! Extended-precision evaluation of the Laguerre-ensemble generating function
//! `M_n(t) = ⟨exp(-t Σ 1/λ_k)⟩` and of the Painlevé III′ τ-function sequence
//! behind it, by several independent routes.

pub mod bessel;
pub mod detkit;
pub mod discrete;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod painleve;
pub mod series;

pub use error::{Error, Result};
pub use numerics::{Certified, PrecisionContext};
