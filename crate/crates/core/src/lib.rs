//! Reciprocal-space analysis of growth series.
//!
//! A first-order hyperbolic trajectory `S(t) = 1 / (a0 + a1 t)` becomes a
//! straight line once the reciprocal `1 / S(t)` is plotted against time. This
//! crate builds on that observation:
//!
//! - [`series`] holds the time-series type, CSV ingestion and the elementary
//!   transforms (reciprocal, slicing, point exclusion).
//! - [`datasets`] ships four historical snapshots (world and African
//!   population, Western European and world GDP).
//! - [`fit`] fits the reciprocal line and evaluates the resulting model,
//!   including its singularity time and growth rate.
//! - [`segment`] finds breakpoints between straight reciprocal segments.
//! - [`diverge`] detects a terminal departure from a baseline fit.
//! - [`models`] compares competing trajectory families by BIC.
//! - [`cases`], [`report`], [`plot`] and [`cli`] drive the case studies and
//!   the `recip` command-line tool.

pub mod cases;
pub mod cli;
pub mod datasets;
pub mod diverge;
mod error;
pub mod fit;
pub mod ic;
mod linalg;
pub mod models;
pub mod plot;
pub mod report;
pub mod segment;
pub mod series;

pub use error::{Error, Result};
pub use fit::{fit_first_order, FitOptions, HyperbolicFit, HyperbolicLine, Weighting};
pub use series::{TimePoint, TimeSeries};
