//! Interference prediction for mobile ad hoc networks whose nodes follow
//! general-order linear continuous-time (GLC) stochastic mobility models.
//!
//! The pipeline is: [`lindyn`] propagates node states to Gaussian location
//! distributions, [`cgppf`] evaluates expectations of radial functions of
//! those locations, [`predict`] aggregates them into interference mean,
//! variance and MGF, and [`bpp`] decides when the interferers may be
//! treated as i.i.d. draws. [`montecarlo`] samples the same model directly.

pub mod bpp;
pub mod cgppf;
pub mod error;
pub mod exec;
pub mod lindyn;
pub mod montecarlo;
pub mod predict;
pub mod quad;
pub mod scenario;
pub mod specfun;

pub use error::{Error, Result};
pub use exec::Execution;
