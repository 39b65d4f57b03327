//! Forecast-driven hierarchical factor models for high-dimensional panels.
//!
//! The crate covers the two-step factor estimation and its forecasts, the
//! usual one-stage baselines (static and dynamic PCA, Lee-Carter, per-series
//! ARIMA), simulation designs, evaluation metrics, Human Mortality Database
//! input handling and life-table arithmetic on forecast mortality surfaces.

pub mod actuarial;
pub mod arima;
pub mod baselines;
pub mod eigen;
pub mod error;
pub mod eval;
pub mod fhfm;
pub mod hmd;
pub mod metrics;
pub mod panel;
pub mod simgen;
pub mod study;

pub use eigen::{sym_eigen_desc, EigenDecomp};
pub use error::{Error, Result};
pub use panel::{difference_panel, sample_autocov, sample_mean, CovMatrix, Panel};
