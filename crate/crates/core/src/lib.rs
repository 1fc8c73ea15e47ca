//! Numerics for a three-body regularized zero-range model: special
//! functions, partial-wave kernels, critical couplings, positivity scans,
//! quadratic-form evaluators and the singular potential.

pub mod error;
pub mod forms;
pub mod kernels;
pub mod positivity;
pub mod potential;
pub mod quad;
pub mod report;
pub mod specfun;
pub mod thresholds;

pub use error::{Error, Result};
pub use quad::QuadratureSpec;
pub use report::BoundReport;
