use serde::{Deserialize, Serialize};

use super::dataset::{Column, Dataset};

/// Quantile of sorted data by linear interpolation between order statistics
/// at one-based rank `h = (n - 1) p + 1`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 || lo + 1 >= sorted.len() {
        return Some(sorted[lo]);
    }
    Some(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerSummary {
    pub name: String,
    pub count: usize,
    pub sum: u64,
    pub min: Option<u64>,
    pub max: Option<u64>,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub q25: Option<f64>,
    pub q75: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    pub level: String,
    pub count: usize,
    /// Sum of TOTAL_AFFILIATES over the level's rows, when that column exists.
    pub affiliates: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalSummary {
    pub name: String,
    pub levels: Vec<LevelCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnSummary {
    Integer(IntegerSummary),
    Categorical(CategoricalSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub row_count: usize,
    pub total_affiliates: u64,
    pub columns: Vec<ColumnSummary>,
}

fn integer_summary(name: &str, values: &[u64]) -> IntegerSummary {
    let mut sorted: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    sorted.sort_by(f64::total_cmp);
    let sum: u64 = values.iter().sum();
    let n = values.len();
    IntegerSummary {
        name: name.to_string(),
        count: n,
        sum,
        min: values.iter().copied().min(),
        max: values.iter().copied().max(),
        mean: (n > 0).then(|| sum as f64 / n as f64),
        median: quantile_sorted(&sorted, 0.5),
        q25: quantile_sorted(&sorted, 0.25),
        q75: quantile_sorted(&sorted, 0.75),
    }
}

pub fn summarize(dataset: &Dataset) -> SummaryReport {
    let weights = dataset.affiliates();
    let columns = dataset
        .columns()
        .map(|(schema, column)| match column {
            Column::Integer(values) => ColumnSummary::Integer(integer_summary(&schema.name, values)),
            Column::Categorical(cat) => {
                let mut counts = vec![0usize; cat.levels().len()];
                let mut totals = vec![0u64; cat.levels().len()];
                for (row, &code) in cat.codes().iter().enumerate() {
                    counts[code as usize] += 1;
                    if let Some(w) = weights {
                        totals[code as usize] += w[row];
                    }
                }
                let levels = cat
                    .levels()
                    .iter()
                    .enumerate()
                    .map(|(i, level)| LevelCount {
                        level: level.clone(),
                        count: counts[i],
                        affiliates: weights.map(|_| totals[i]),
                    })
                    .collect();
                ColumnSummary::Categorical(CategoricalSummary { name: schema.name.clone(), levels })
            }
        })
        .collect();
    SummaryReport { row_count: dataset.row_count(), total_affiliates: dataset.total_affiliates(), columns }
}
