use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::design::{DesignMatrix, Encoding, Term, TermKind};
use super::qr::Qr;
use crate::error::{Error, Result};
use crate::special::{f_sf, student_t_quantile, student_t_two_sided, PValue};

/// Estimate and inference for one design column. Everything is `None` for
/// an aliased column; `t` and `p` are `None` when the standard error is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub label: String,
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    pub t: Option<f64>,
    pub p: Option<PValue>,
    pub aliased: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FTest {
    pub value: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub p: PValue,
}

/// Ordinary least squares fit with its inference.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub terms: Vec<Term>,
    pub encoding: Encoding,
    pub coefficients: Vec<TermEstimate>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub nobs: usize,
    pub rank: usize,
    pub df_residual: usize,
    pub rss: f64,
    pub tss: f64,
    pub sigma2: f64,
    pub r_squared: Option<f64>,
    pub adj_r_squared: Option<f64>,
    pub f_statistic: Option<FTest>,
    pub aliased_terms: Vec<String>,
    /// Unscaled covariance `(X^T X)^{-1}` over non-aliased terms, indexed
    /// by design column (`None` rows/cols for aliased terms).
    pub(crate) cov_unscaled: Vec<Vec<Option<f64>>>,
}

impl FitResult {
    pub fn intercept(&self) -> bool {
        self.terms.iter().any(|t| t.kind == TermKind::Intercept)
    }

    pub fn reference_levels(&self) -> BTreeMap<String, String> {
        self.encoding.reference_levels()
    }

    pub fn coefficient(&self, label: &str) -> Option<&TermEstimate> {
        self.coefficients.iter().find(|c| c.label == label)
    }

    /// Estimates with aliased terms as `None`, in design order.
    pub fn beta(&self) -> Vec<Option<f64>> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }

    /// Two-sided per-coefficient intervals at `level`.
    pub fn confidence_intervals(&self, level: f64) -> Result<Vec<Option<(f64, f64)>>> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Domain(format!("confidence level must be in (0, 1), got {level}")));
        }
        let q = student_t_quantile(0.5 + level / 2.0, self.df_residual as f64)?;
        Ok(self
            .coefficients
            .iter()
            .map(|c| match (c.estimate, c.std_error) {
                (Some(b), Some(se)) => Some((b - q * se, b + q * se)),
                _ => None,
            })
            .collect())
    }

    /// `sigma2 * (X^T X)^{-1}` entry for two design columns.
    pub fn covariance(&self, i: usize, j: usize) -> Option<f64> {
        self.cov_unscaled.get(i)?.get(j).copied().flatten().map(|v| v * self.sigma2)
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericInput(what.to_string()))
    }
}

/// Least squares of `y` on `design` via pivoted Householder QR.
pub fn fit_ols(design: &DesignMatrix, y: &[f64]) -> Result<FitResult> {
    let n = design.nrows();
    if y.len() != n {
        return Err(Error::Validation(format!("response has {} values for {n} design rows", y.len())));
    }
    check_finite(y, "response")?;
    for (col, term) in design.columns().iter().zip(design.terms()) {
        check_finite(col, &format!("design column {}", term.label))?;
    }

    let qr = Qr::new(design.columns());
    let rank = qr.rank();
    if n <= rank {
        return Err(Error::InsufficientDf { n, rank });
    }
    let k = design.ncols();
    let solved = qr.solve(y);
    let mut beta: Vec<Option<f64>> = vec![None; k];
    for (pos, &col) in qr.accepted().iter().enumerate() {
        beta[col] = Some(solved[pos]);
    }

    let fitted = design.mul_vec(&beta);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let df_residual = n - rank;
    let sigma2 = rss / df_residual as f64;

    let has_intercept = design.terms().iter().any(|t| t.kind == TermKind::Intercept);
    let intercept_kept =
        design.terms().iter().enumerate().any(|(j, t)| t.kind == TermKind::Intercept && beta[j].is_some());
    let tss: f64 = if has_intercept {
        let mean = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - mean).powi(2)).sum()
    } else {
        y.iter().map(|v| v * v).sum()
    };

    let cov_factor = qr.unscaled_covariance();
    let mut cov_unscaled = vec![vec![None; k]; k];
    for (a, &ca) in qr.accepted().iter().enumerate() {
        for (b, &cb) in qr.accepted().iter().enumerate() {
            cov_unscaled[ca][cb] = Some(cov_factor[a][b]);
        }
    }

    let df = df_residual as f64;
    let mut coefficients = Vec::with_capacity(k);
    for (j, term) in design.terms().iter().enumerate() {
        let estimate = beta[j];
        let std_error = cov_unscaled[j][j].map(|v| (v * sigma2).sqrt());
        let t = match (estimate, std_error) {
            (Some(b), Some(se)) if se > 0.0 => Some(b / se),
            _ => None,
        };
        let p = t.map(|t| student_t_two_sided(t, df).map(|p| PValue::new(p.get()))).transpose()?;
        coefficients.push(TermEstimate {
            label: term.label.clone(),
            estimate,
            std_error,
            t,
            p,
            aliased: estimate.is_none(),
        });
    }

    let r_squared = (tss > 0.0).then(|| (1.0_f64 - rss / tss).clamp(0.0, 1.0));
    let int_df = usize::from(has_intercept);
    let adj_r_squared = r_squared.map(|r2| 1.0 - (1.0 - r2) * (n - int_df) as f64 / df);
    let df_model = rank - usize::from(intercept_kept);
    let f_statistic = if df_model > 0 && sigma2 > 0.0 {
        let value = ((tss - rss).max(0.0) / df_model as f64) / sigma2;
        let p = f_sf(value, df_model as f64, df)?;
        Some(FTest { value, df_num: df_model, df_den: df_residual, p: PValue::new(p.get()) })
    } else {
        None
    };

    let aliased_terms = qr.aliased().iter().map(|&j| design.terms()[j].label.clone()).collect();

    Ok(FitResult {
        terms: design.terms().to_vec(),
        encoding: design.encoding().clone(),
        coefficients,
        residuals,
        fitted,
        nobs: n,
        rank,
        df_residual,
        rss,
        tss,
        sigma2,
        r_squared,
        adj_r_squared,
        f_statistic,
        aliased_terms,
        cov_unscaled,
    })
}

/// `X b` for rows encoded exactly like the fitted design.
pub fn predict(fit: &FitResult, design: &DesignMatrix) -> Result<Vec<f64>> {
    if design.terms() != fit.terms.as_slice() {
        let got: Vec<_> = design.terms().iter().map(|t| t.label.as_str()).collect();
        let want: Vec<_> = fit.terms.iter().map(|t| t.label.as_str()).collect();
        return Err(Error::SchemaMismatch(format!("terms {got:?} differ from fitted {want:?}")));
    }
    if design.reference_levels() != fit.reference_levels() {
        return Err(Error::SchemaMismatch("reference levels differ from the fitted model".into()));
    }
    Ok(design.mul_vec(&fit.beta()))
}
