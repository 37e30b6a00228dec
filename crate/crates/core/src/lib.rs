//! Wavelet estimation of the squared regression function `r = f²` in the
//! random-design model `Y = f(X)·U + V`, where `U` is multiplicative and `V`
//! additive noise.
//!
//! The crate is organised bottom-up:
//!
//! - [`wavelet`]: Daubechies filters, the periodized Mallat pyramid and the
//!   cascade evaluation of `φ`/`ψ`.
//! - [`model`]: test functions and the seeded sample generator.
//! - [`estimator`]: bias-corrected coefficient estimators and the linear and
//!   hard-thresholded estimators, in a direct-sum and a pyramid backend.
//! - [`selection`]: two-fold cross-validation and oracle parameter choice.
//! - [`harness`]: Monte Carlo replications, box-plot summaries and rate studies.
//! - [`io`] and [`svg`]: CSV/JSON persistence and self-contained plots.

pub mod error;
pub mod estimator;
pub mod harness;
pub mod io;
pub mod model;
pub mod selection;
pub mod svg;
pub mod wavelet;

pub use error::{Error, Result};
