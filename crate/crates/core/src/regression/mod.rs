//! Multiple linear regression: treatment-coded design matrices, least
//! squares by Householder QR, coefficient inference, nested-model F tests and
//! prediction.

mod correlation;
mod design;
mod inference;
mod ols;
pub mod qr;
mod report;

pub use correlation::{correlation_matrix, scatter3d_data, CorrelationMatrix, Scatter3d};
pub use design::{
    build_design_matrix, DesignMatrix, Encoding, ModelSpec, PredictorEncoding, Term, TermKind, INTERCEPT_LABEL,
};
pub use inference::{group_tests, partial_f_test, GroupTest};
pub use ols::{fit_ols, predict, FTest, FitResult, TermEstimate};
pub use report::{coefficient_table, FitReport, GroupRow, ModelBlock, TermRow};

use crate::error::Result;
use crate::store::Dataset;

/// Builds the design for `spec` on `dataset` and fits it.
pub fn fit_model(dataset: &Dataset, spec: &ModelSpec) -> Result<FitResult> {
    let (design, y) = build_design_matrix(dataset, spec)?;
    fit_ols(&design, &y)
}

/// Predictions for new rows under a fitted model's encoding.
pub fn predict_dataset(fit: &FitResult, dataset: &Dataset) -> Result<Vec<f64>> {
    let design = DesignMatrix::with_encoding(dataset, &fit.encoding)?;
    predict(fit, &design)
}
