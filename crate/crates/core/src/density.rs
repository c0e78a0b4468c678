//! Gaussian kernel density estimates with a rule-of-thumb bandwidth.
//!
//! Weights are frequency weights: a weight of `k` counts the value `k` times.
//! Equal values are merged before evaluation, so the cost is
//! `distinct values x grid points` regardless of the row count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::schema::TOTAL_AFFILIATES;
use crate::store::{Column, Dataset};

pub const DEFAULT_GRID_SIZE: usize = 512;
/// Grid extension beyond the data range, in bandwidths.
pub const GRID_EXTENSION: f64 = 3.0;
/// Kernel terms beyond this many bandwidths are below 1e-300 and skipped.
const KERNEL_CUTOFF: f64 = 37.0;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    /// Total weight (the row count when unweighted).
    pub n_effective: f64,
    pub weighted: bool,
}

impl DensityEstimate {
    /// Trapezoid integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.grid.windows(2).zip(self.density.windows(2)).map(|(g, d)| 0.5 * (g[1] - g[0]) * (d[0] + d[1])).sum()
    }
}

/// Sorted distinct values with their summed weights; zero weights dropped.
fn collapse(values: &[f64], weights: Option<&[f64]>) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::InsufficientData("density needs at least one value".into()));
    }
    if let Some(w) = weights {
        if w.len() != values.len() {
            return Err(Error::Validation(format!("{} weights for {} values", w.len(), values.len())));
        }
        if let Some(bad) = w.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Validation(format!("weights must be finite and nonnegative, got {bad}")));
        }
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NumericInput(format!("non-finite value {bad}")));
    }
    let mut pairs: Vec<(f64, f64)> = match weights {
        Some(w) => values.iter().copied().zip(w.iter().copied()).filter(|(_, w)| *w > 0.0).collect(),
        None => values.iter().map(|&v| (v, 1.0)).collect(),
    };
    if pairs.is_empty() {
        return Err(Error::Validation("weights are all zero".into()));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    for (v, w) in pairs {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => out.push((v, w)),
        }
    }
    Ok(out)
}

/// Type-7 quantile of the expanded sample; `cum[i]` is the weight up to and
/// including `pairs[i]`.
fn weighted_quantile(pairs: &[(f64, f64)], cum: &[f64], total: f64, p: f64) -> f64 {
    let pos = (total - 1.0).max(0.0) * p;
    let lo = pos.floor();
    let frac = pos - lo;
    // value at 0-based position k of the expanded sample
    let at = |k: f64| {
        let i = cum.partition_point(|&c| c <= k);
        pairs[i.min(pairs.len() - 1)].0
    };
    let a = at(lo);
    if frac == 0.0 {
        a
    } else {
        a + frac * (at(lo + 1.0) - a)
    }
}

/// Offsets from the smallest value; spreads and kernel arguments computed on
/// these do not pick up rounding from the data's location.
fn offsets(pairs: &[(f64, f64)]) -> (f64, Vec<(f64, f64)>) {
    let anchor = pairs[0].0;
    (anchor, pairs.iter().map(|&(v, w)| (v - anchor, w)).collect())
}

/// Bandwidth from `(value, weight)` pairs, given as offsets from `anchor`.
fn bandwidth_of(anchor: f64, pairs: &[(f64, f64)]) -> f64 {
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mean = pairs.iter().map(|(v, w)| v * w).sum::<f64>() / total;
    let fallback = (anchor + mean).abs().max(1.0) * 0.1;
    if pairs.len() < 2 || total <= 1.0 {
        return fallback;
    }
    let var = pairs.iter().map(|(v, w)| w * (v - mean).powi(2)).sum::<f64>() / (total - 1.0);
    let sd = var.sqrt();
    let mut acc = 0.0;
    let cum: Vec<f64> = pairs
        .iter()
        .map(|p| {
            acc += p.1;
            acc
        })
        .collect();
    let iqr = weighted_quantile(pairs, &cum, total, 0.75) - weighted_quantile(pairs, &cum, total, 0.25);
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr / 1.34),
        // heavy ties at the quartiles; the sd still measures the spread
        (true, false) => sd,
        _ => return fallback,
    };
    0.9 * spread * total.powf(-0.2)
}

/// Rule-of-thumb bandwidth `0.9 min(sd, IQR/1.34) n^(-1/5)`, with
/// `max(|mean|, 1) / 10` for a single value or constant data.
pub fn bandwidth_auto(values: &[f64], weights: Option<&[f64]>) -> Result<f64> {
    let (anchor, pairs) = offsets(&collapse(values, weights)?);
    Ok(bandwidth_of(anchor, &pairs))
}

/// Density on an evenly spaced grid over `[min - 3h, max + 3h]`.
pub fn kde(
    values: &[f64],
    weights: Option<&[f64]>,
    gridsize: usize,
    bandwidth: Option<f64>,
) -> Result<DensityEstimate> {
    if gridsize < 2 {
        return Err(Error::Validation(format!("grid size must be at least 2, got {gridsize}")));
    }
    let (anchor, pairs) = offsets(&collapse(values, weights)?);
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::Validation(format!("bandwidth must be positive and finite, got {h}"))),
        None => bandwidth_of(anchor, &pairs),
    };
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let lo = -GRID_EXTENSION * h;
    let hi = pairs[pairs.len() - 1].0 + GRID_EXTENSION * h;
    let step = (hi - lo) / (gridsize - 1) as f64;
    let local: Vec<f64> = (0..gridsize).map(|k| if k == gridsize - 1 { hi } else { lo + k as f64 * step }).collect();
    let norm = INV_SQRT_2PI / (h * total);
    let density = local
        .iter()
        .map(|&g| {
            let start = pairs.partition_point(|p| p.0 < g - KERNEL_CUTOFF * h);
            let mut s = 0.0;
            for &(v, w) in &pairs[start..] {
                let u = (g - v) / h;
                if u < -KERNEL_CUTOFF {
                    break;
                }
                s += w * (-0.5 * u * u).exp();
            }
            s * norm
        })
        .collect();
    let grid = local.iter().map(|g| anchor + g).collect();
    Ok(DensityEstimate { grid, density, bandwidth: h, n_effective: total, weighted: weights.is_some() })
}

/// Density of an integer column, optionally weighted by affiliate counts.
pub fn column_density(
    dataset: &Dataset,
    variable: &str,
    weighted: bool,
    bandwidth: Option<f64>,
) -> Result<DensityEstimate> {
    let name = dataset.resolve(variable).ok_or_else(|| Error::Validation(format!("unknown column {variable}")))?;
    if let Some(Column::Categorical(_)) = dataset.column(name) {
        return Err(Error::Validation(format!("{name} is categorical; density needs a numeric column")));
    }
    let values = dataset.numeric(name)?;
    let weights = if weighted {
        let counts = dataset.affiliates().ok_or_else(|| Error::MissingColumn { column: TOTAL_AFFILIATES.into() })?;
        Some(counts.iter().map(|&w| w as f64).collect::<Vec<_>>())
    } else {
        None
    };
    kde(&values, weights.as_deref(), DEFAULT_GRID_SIZE, bandwidth)
}
