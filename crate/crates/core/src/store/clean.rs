use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dataset::{Column, Dataset};
use super::parse::{parse_csv, CleaningReport, Rejection};
use super::schema::{ColumnSchema, AGE, TOTAL_AFFILIATES};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningRules {
    /// Inclusive bounds for AGE.
    pub age_range: (u64, u64),
    /// Smallest acceptable TOTAL_AFFILIATES.
    pub min_affiliates: u64,
}

impl Default for CleaningRules {
    fn default() -> Self {
        Self { age_range: (0, 120), min_affiliates: 1 }
    }
}

fn normalize_level(raw: &str) -> String {
    raw.trim().to_uppercase()
}

/// Normalizes categorical text and rejects rows outside the value rules.
/// Never fails; the result may be empty.
pub fn clean(dataset: &Dataset, rules: &CleaningRules) -> (Dataset, CleaningReport) {
    let normalized = dataset.map_categoricals(normalize_level);
    let n = normalized.row_count();
    let mut rejections = Vec::new();
    let mut keep = Vec::with_capacity(n);

    let ages = normalized.integer(AGE);
    let totals = normalized.integer(TOTAL_AFFILIATES);
    let categoricals: Vec<_> = normalized
        .columns()
        .filter_map(|(s, c)| match c {
            Column::Categorical(cat) => Some((s.name.as_str(), cat)),
            Column::Integer(_) => None,
        })
        .collect();

    for row in 0..n {
        let before = rejections.len();
        for (name, cat) in &categoricals {
            if cat.value(row).is_empty() {
                rejections.push(Rejection {
                    row,
                    column: name.to_string(),
                    raw: String::new(),
                    reason: format!("missing {name}"),
                });
            }
        }
        if let Some(age) = ages.map(|a| a[row]) {
            if age < rules.age_range.0 || age > rules.age_range.1 {
                rejections.push(Rejection {
                    row,
                    column: AGE.into(),
                    raw: age.to_string(),
                    reason: "AGE out of range".into(),
                });
            }
        }
        if let Some(total) = totals.map(|t| t[row]) {
            if total < rules.min_affiliates {
                rejections.push(Rejection {
                    row,
                    column: TOTAL_AFFILIATES.into(),
                    raw: total.to_string(),
                    reason: format!("TOTAL_AFFILIATES below {}", rules.min_affiliates),
                });
            }
        }
        if rejections.len() == before {
            keep.push(row);
        }
    }

    let report = CleaningReport::new(n, rejections);
    let cleaned = if keep.len() == n { normalized } else { normalized.take(&keep) };
    (cleaned, report)
}

/// Outcome of [`ingest`]: both stages' reports plus a rejection tally.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_in: usize,
    pub rows_kept: usize,
    pub parse: CleaningReport,
    pub clean: CleaningReport,
}

impl IngestReport {
    pub fn rows_rejected(&self) -> usize {
        self.rows_in - self.rows_kept
    }

    /// Number of rejection entries per reason, across both stages.
    pub fn reasons(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for r in self.parse.rejections.iter().chain(&self.clean.rejections) {
            *out.entry(r.reason.clone()).or_insert(0) += 1;
        }
        out
    }
}

/// Parse with `schema`, then clean with `rules`.
pub fn ingest(bytes: &[u8], schema: &[ColumnSchema], rules: &CleaningRules) -> Result<(Dataset, IngestReport)> {
    let (parsed, parse_report) = parse_csv(bytes, schema)?;
    let (cleaned, clean_report) = clean(&parsed, rules);
    let report = IngestReport {
        rows_in: parse_report.rows_in,
        rows_kept: clean_report.rows_kept,
        parse: parse_report,
        clean: clean_report,
    };
    Ok((cleaned, report))
}
