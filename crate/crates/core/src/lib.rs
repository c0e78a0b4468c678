//! Statistical exploration of SIS (Seguro Integral de Salud) active-affiliate
//! counts: ingestion and cleaning of the public export, survey sample sizes,
//! seeded sampling, multiple linear regression with full inference, kernel
//! density estimates and per-region aggregates.
//!
//! The HTTP service and the command-line tool are thin layers over this crate.

pub mod density;
pub mod error;
pub mod json;
pub mod regression;
pub mod sampling;
pub mod special;
pub mod store;
pub mod synth;

pub use density::{kde, DensityEstimate};
pub use error::{Error, Result};
pub use regression::{fit_model, fit_ols, FitReport, FitResult, ModelSpec};
pub use sampling::{draw_sample, sample_size, SampleSizeParams};
pub use store::{Dataset, FilterSpec};
