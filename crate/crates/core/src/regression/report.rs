use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::inference::{group_tests, GroupTest};
use super::ols::FitResult;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRow {
    pub label: String,
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    pub t: Option<f64>,
    pub p: Option<f64>,
    pub p_display: Option<String>,
    pub p_underflow: bool,
    pub aliased: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBlock {
    pub nobs: usize,
    pub rank: usize,
    pub r_squared: Option<f64>,
    pub adj_r_squared: Option<f64>,
    pub sigma2: f64,
    pub df_model: Option<usize>,
    pub df_residual: usize,
    pub f_statistic: Option<f64>,
    pub f_pvalue: Option<f64>,
    pub f_pvalue_display: Option<String>,
    pub aliased_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub variable: String,
    pub f: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub p: f64,
    pub p_display: String,
    pub p_underflow: bool,
}

impl From<&GroupTest> for GroupRow {
    fn from(g: &GroupTest) -> Self {
        Self {
            variable: g.variable.clone(),
            f: g.f,
            df_num: g.df_num,
            df_den: g.df_den,
            p: g.p.value,
            p_display: g.p.display(),
            p_underflow: g.p.underflow,
        }
    }
}

/// Serializable view of a fit. Residual and fitted arrays are included only
/// when requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub response: String,
    pub terms: Vec<TermRow>,
    pub model: ModelBlock,
    pub groups: Vec<GroupRow>,
    pub reference_levels: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted: Option<Vec<f64>>,
}

impl FitReport {
    pub fn new(fit: &FitResult, response: &str, verbose: bool) -> Result<Self> {
        let terms = fit
            .coefficients
            .iter()
            .map(|c| TermRow {
                label: c.label.clone(),
                estimate: c.estimate,
                std_error: c.std_error,
                t: c.t,
                p: c.p.map(|p| p.value),
                p_display: c.p.map(|p| p.display()),
                p_underflow: c.p.is_some_and(|p| p.underflow),
                aliased: c.aliased,
            })
            .collect();
        let f = fit.f_statistic.as_ref();
        let model = ModelBlock {
            nobs: fit.nobs,
            rank: fit.rank,
            r_squared: fit.r_squared,
            adj_r_squared: fit.adj_r_squared,
            sigma2: fit.sigma2,
            df_model: f.map(|f| f.df_num),
            df_residual: fit.df_residual,
            f_statistic: f.map(|f| f.value),
            f_pvalue: f.map(|f| f.p.value),
            f_pvalue_display: f.map(|f| f.p.display()),
            aliased_terms: fit.aliased_terms.clone(),
        };
        let groups = group_tests(fit)?.iter().map(GroupRow::from).collect();
        Ok(Self {
            response: response.to_string(),
            terms,
            model,
            groups,
            reference_levels: fit.reference_levels(),
            residuals: verbose.then(|| fit.residuals.clone()),
            fitted: verbose.then(|| fit.fitted.clone()),
        })
    }

    /// Plain-text coefficient table in the usual summary layout.
    pub fn to_table(&self) -> String {
        let width = self.terms.iter().map(|t| t.label.chars().count()).max().unwrap_or(0).max(11);
        let mut out = String::new();
        let _ = writeln!(out, "Response: {}", self.response);
        let _ = writeln!(out, "\nCoefficients:");
        let _ =
            writeln!(out, "{:width$} {:>13} {:>12} {:>9} {:>10}", "", "Estimate", "Std. Error", "t value", "Pr(>|t|)");
        let num = |v: Option<f64>, w: usize| match v {
            Some(v) => format!("{:>w$}", format_num(v)),
            None => format!("{:>w$}", "NA"),
        };
        for t in &self.terms {
            let p = t.p_display.clone().unwrap_or_else(|| "NA".into());
            let _ = writeln!(
                out,
                "{:width$} {} {} {} {:>10} {}",
                t.label,
                num(t.estimate, 13),
                num(t.std_error, 12),
                num(t.t, 9),
                p,
                t.p.map_or("", stars)
            );
        }
        let _ = writeln!(out, "---\nSignif. codes:  0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1");
        if !self.model.aliased_terms.is_empty() {
            let _ = writeln!(out, "Not defined because of singularities: {}", self.model.aliased_terms.join(", "));
        }
        let m = &self.model;
        let _ = writeln!(
            out,
            "\nResidual standard error: {} on {} degrees of freedom",
            format_num(m.sigma2.sqrt()),
            m.df_residual
        );
        if let (Some(r2), Some(adj)) = (m.r_squared, m.adj_r_squared) {
            let _ = writeln!(out, "Multiple R-squared: {r2:.4},\tAdjusted R-squared: {adj:.4}");
        }
        if let (Some(f), Some(df), Some(p)) = (m.f_statistic, m.df_model, &m.f_pvalue_display) {
            let _ = writeln!(out, "F-statistic: {} on {} and {} DF,  p-value: {}", format_num(f), df, m.df_residual, p);
        }
        if !self.groups.is_empty() {
            let _ = writeln!(out, "\nPredictor groups:");
            let gw = self.groups.iter().map(|g| g.variable.len()).max().unwrap_or(0);
            for g in &self.groups {
                let _ = writeln!(
                    out,
                    "{:gw$}  F = {:>12} on {:>3} and {} DF  p = {:>10} {}",
                    g.variable,
                    format_num(g.f),
                    g.df_num,
                    g.df_den,
                    g.p_display,
                    stars(g.p)
                );
            }
        }
        out
    }
}

fn format_num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e6).contains(&a) {
        format!("{v:.4e}")
    } else {
        format!("{v:.6}")
    }
}

fn stars(p: f64) -> &'static str {
    match p {
        p if p < 0.001 => "***",
        p if p < 0.01 => "**",
        p if p < 0.05 => "*",
        p if p < 0.1 => ".",
        _ => "",
    }
}

/// Convenience wrapper rendering [`FitReport::to_table`].
pub fn coefficient_table(fit: &FitResult, response: &str) -> Result<String> {
    Ok(FitReport::new(fit, response, false)?.to_table())
}
