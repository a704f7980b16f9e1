//! Cusp-point detection and singularity-curve tracing for planar 3-RPR
//! parallel manipulators.
//!
//! The joint space of a 3-RPR manipulator (three legs, each with an actuated
//! prismatic joint between two passive revolute joints) contains singularity
//! surfaces; in a constant-`L1` slice they become curves in the `(L2, L3)`
//! plane. Cusp points of those curves are where three direct-kinematics
//! solutions coincide — encircling one changes the assembly mode without
//! crossing a singularity. This crate finds them:
//!
//! * [`geometry`] — manipulator parameters and pose/joint conversions,
//! * [`kinematics`] — constraint Jacobian, adjugate kernels, Hessians,
//!   singularity & cusp residuals, and the direct kinematics solver,
//! * [`polysolve`] — dense arbitrary-precision polynomials, Sylvester
//!   resultants by evaluation–interpolation, certified real-root isolation,
//! * [`pipeline`] — the slice algorithm: build the half-angle singularity and
//!   coalescence conditions, eliminate the platform orientation, root-find,
//!   back-substitute, and verify every candidate by triple coincidence of
//!   direct-kinematics solutions,
//! * [`tracer`] — singularity-curve sampling and SVG/CSV emission.
//!
//! Everything is generic over the [`Scalar`] trait: `f64` for fast checks and
//! [`BigReal`] (the default, 300-bit / ~90-digit) for production runs.

pub mod bigreal;
pub mod geometry;
mod halfangle;
pub mod kinematics;
pub mod pipeline;
pub mod polysolve;
pub mod scalar;
pub mod tracer;

pub use bigreal::BigReal;
pub use scalar::{digits_to_bits, ParseScalarError, Scalar};

/// Default decimal precision of the production pipeline.
pub const DEFAULT_DIGITS: u32 = 90;

pub type BigUniPoly = polysolve::UniPoly<BigReal>;
pub type BigBiPoly = polysolve::BiPoly<BigReal>;
pub type BigGeometry = geometry::ManipulatorGeometry<BigReal>;
pub type BigConfiguration = geometry::Configuration<BigReal>;
pub type BigSlicePose = geometry::SlicePose<BigReal>;
pub type BigSliceProblem = pipeline::SliceProblem<BigReal>;
pub type BigCuspPoint = pipeline::CuspPoint<BigReal>;
pub type BigSliceReport = pipeline::SliceReport<BigReal>;
pub type BigScanReport = pipeline::ScanReport<BigReal>;
pub type GeometryF64 = geometry::ManipulatorGeometry<f64>;
pub type ConfigurationF64 = geometry::Configuration<f64>;

