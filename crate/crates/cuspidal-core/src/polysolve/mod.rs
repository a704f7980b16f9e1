//! Self-contained arbitrary-precision polynomial engine.
//!
//! Dense univariate ([`UniPoly`]) and bivariate ([`BiPoly`]) polynomials over
//! any [`crate::Scalar`], Sylvester resultants by evaluation–interpolation at
//! Chebyshev nodes, and complete real-root isolation with multiplicity
//! detection. Coefficients are high-precision floats rather than exact
//! rationals because the platform-altitude parameter enters through square
//! roots; the default context is 300 bits (~90 decimal digits).

mod bipoly;
mod resultant;
mod roots;
mod unipoly;

pub use bipoly::{BiPoly, Var};
pub use resultant::{sylvester_resultant_in_t, sylvester_resultant_in_t_oversampled};
pub use roots::{disc_zero_count, real_roots, solve_for_second_var, taylor_cluster_count, RealRoot};
pub use unipoly::UniPoly;

/// Errors surfaced by the polynomial engine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    /// An operation received a polynomial that is identically zero (or
    /// indistinguishable from zero at working precision).
    #[error("polynomial input is identically zero")]
    ZeroInput,

    /// The leading coefficient in the eliminated variable vanishes
    /// identically, so the declared degree (and the Sylvester dimension)
    /// is wrong; callers must re-trim and retry.
    #[error("leading coefficient collapsed to zero; degree must be re-detected")]
    LeadingCoefficientCollapse,

    /// Root isolation could not separate a cluster at the current precision.
    /// The caller's recovery is to raise precision and rerun.
    #[error("precision exhausted during {stage}")]
    PrecisionExhausted { stage: &'static str },

    /// A bivariate polynomial specialized at a point is identically zero, so
    /// "solve the other variable" has no meaning there.
    #[error("polynomial slice is identically zero at the requested point")]
    IdenticallyZeroSlice,
}
