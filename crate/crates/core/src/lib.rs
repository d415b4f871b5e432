//! Sparse seasonal ARIMA toolkit.
//!
//! The crate covers the whole Box-Jenkins loop for monthly series:
//!
//! - [`series`]: month-indexed containers, differencing and exact integration.
//! - [`identification`]: sample ACF/PACF and augmented Dickey-Fuller tests.
//! - [`sarima`]: multiplicative seasonal ARIMA with zero-pinned coefficients,
//!   exact Gaussian likelihood, maximum-likelihood fitting and simulation.
//! - [`diagnostics`]: Ljung-Box, Shapiro-Wilk and Jarque-Bera residual checks.
//! - [`forecasting`]: multi-step forecasts with prediction intervals.
//! - [`decomposition`]: classical additive trend/seasonal/remainder split.
//! - [`impact`]: counterfactual loss estimation over an event window.
//! - [`ingest`]: CSV ingestion of monthly traffic records.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod diagnostics;
mod error;
pub mod forecasting;
pub mod identification;
pub mod impact;
pub mod ingest;
pub mod sarima;
pub mod series;
pub mod stats;

pub use error::{Error, Result};
pub use series::{DiffContext, MonthIndex, MonthlySeries};
