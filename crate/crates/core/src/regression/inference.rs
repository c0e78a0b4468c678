use serde::{Deserialize, Serialize};

use super::design::{build_resolved, ModelSpec, TermKind};
use super::ols::{fit_ols, FitResult};
use crate::error::{Error, Result};
use crate::special::{f_sf, PValue};
use crate::store::Dataset;

/// Significance of one predictor (all of its design columns together).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTest {
    pub variable: String,
    pub f: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub p: PValue,
}

/// Nested-model F test for dropping `variable` from `spec`, by refitting
/// the reduced model.
pub fn partial_f_test(full: &FitResult, dataset: &Dataset, spec: &ModelSpec, variable: &str) -> Result<GroupTest> {
    let spec = spec.resolve(dataset)?;
    let variable = dataset
        .resolve(variable)
        .filter(|v| spec.predictors.iter().any(|p| p == v))
        .ok_or_else(|| Error::Validation(format!("{variable} is not a predictor of this model")))?
        .to_string();
    let reduced_spec = spec.dropping(&variable);
    if reduced_spec.predictors.is_empty() && !reduced_spec.intercept {
        return Err(Error::DegeneratePredictor { column: variable, reason: "the reduced model has no columns".into() });
    }
    let (design, y) = build_resolved(dataset, &reduced_spec)?;
    let reduced = fit_ols(&design, &y)?;
    let df_num = full.rank.saturating_sub(reduced.rank);
    if df_num == 0 {
        return Err(Error::DegeneratePredictor {
            column: variable,
            reason: "removing it does not change the model rank".into(),
        });
    }
    if full.sigma2 <= 0.0 {
        return Err(Error::Numeric("full model has zero residual variance".into()));
    }
    let f = ((reduced.rss - full.rss).max(0.0) / df_num as f64) / full.sigma2;
    let p = f_sf(f, df_num as f64, full.df_residual as f64)?;
    Ok(GroupTest { variable, f, df_num, df_den: full.df_residual, p: PValue::new(p.get()) })
}

fn solve_spd(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    // Gaussian elimination with partial pivoting; the block is small
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, below) = a.split_at_mut(col + 1);
        let pivot = &top[col];
        for (offset, row) in below.iter_mut().enumerate() {
            let factor = row[col] / pivot[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *x -= factor * p;
            }
            b[col + 1 + offset] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Per-predictor F tests from the fitted covariance, without refitting.
///
/// For each predictor the statistic is `b' V^{-1} b / q` over its `q`
/// non-aliased columns, which equals the nested-model F whenever dropping the
/// predictor removes exactly those columns.
pub fn group_tests(fit: &FitResult) -> Result<Vec<GroupTest>> {
    let mut out = Vec::new();
    for predictor in &fit.encoding.predictors {
        let name = predictor.column();
        let cols: Vec<usize> = fit
            .terms
            .iter()
            .enumerate()
            .filter(|(j, t)| {
                t.kind != TermKind::Intercept && t.source.as_deref() == Some(name) && !fit.coefficients[*j].aliased
            })
            .map(|(j, _)| j)
            .collect();
        if cols.is_empty() || fit.sigma2 <= 0.0 {
            continue;
        }
        let b: Vec<f64> = cols.iter().map(|&j| fit.coefficients[j].estimate.unwrap_or(0.0)).collect();
        let v: Vec<Vec<f64>> =
            cols.iter().map(|&i| cols.iter().map(|&j| fit.cov_unscaled[i][j].unwrap_or(0.0)).collect()).collect();
        let Some(x) = solve_spd(v, b.clone()) else {
            continue;
        };
        let q = cols.len();
        let quad: f64 = b.iter().zip(&x).map(|(bi, xi)| bi * xi).sum();
        let f = quad / q as f64 / fit.sigma2;
        let p = f_sf(f.max(0.0), q as f64, fit.df_residual as f64)?;
        out.push(GroupTest {
            variable: name.to_string(),
            f,
            df_num: q,
            df_den: fit.df_residual,
            p: PValue::new(p.get()),
        });
    }
    Ok(out)
}
