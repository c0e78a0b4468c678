use serde::{Deserialize, Serialize};

use super::dataset::{Column, Dataset};
use crate::error::{Error, Result};

/// One row predicate. Range bounds are inclusive and either end may be open.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Clause {
    Equals {
        column: String,
        value: String,
    },
    InSet {
        column: String,
        values: Vec<String>,
    },
    Range {
        column: String,
        #[serde(default)]
        min: Option<u64>,
        #[serde(default)]
        max: Option<u64>,
    },
}

impl Clause {
    pub fn column(&self) -> &str {
        match self {
            Clause::Equals { column, .. } | Clause::InSet { column, .. } | Clause::Range { column, .. } => column,
        }
    }
}

/// Conjunction of clauses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(default)]
    pub clauses: Vec<Clause>,
}

impl FilterSpec {
    pub fn new(clauses: Vec<Clause>) -> Self {
        Self { clauses }
    }
}

enum Compiled<'a> {
    Codes { codes: &'a [u32], allowed: Vec<bool> },
    Range { values: &'a [u64], min: u64, max: u64 },
}

impl Compiled<'_> {
    fn test(&self, row: usize) -> bool {
        match self {
            Compiled::Codes { codes, allowed } => allowed[codes[row] as usize],
            Compiled::Range { values, min, max } => (*min..=*max).contains(&values[row]),
        }
    }
}

fn compile<'a>(dataset: &'a Dataset, clause: &Clause) -> Result<Compiled<'a>> {
    let name = clause.column();
    let column = dataset.column(name).ok_or_else(|| Error::Validation(format!("unknown column {name}")))?;
    match (clause, column) {
        (Clause::Equals { value, .. }, Column::Categorical(cat)) => {
            let mut allowed = vec![false; cat.levels().len()];
            if let Some(i) = cat.level_index(value) {
                allowed[i] = true;
            }
            Ok(Compiled::Codes { codes: cat.codes(), allowed })
        }
        (Clause::InSet { values, .. }, Column::Categorical(cat)) => {
            let mut allowed = vec![false; cat.levels().len()];
            for v in values {
                if let Some(i) = cat.level_index(v) {
                    allowed[i] = true;
                }
            }
            Ok(Compiled::Codes { codes: cat.codes(), allowed })
        }
        (Clause::Range { min, max, .. }, Column::Integer(values)) => {
            Ok(Compiled::Range { values, min: min.unwrap_or(0), max: max.unwrap_or(u64::MAX) })
        }
        (Clause::Range { .. }, Column::Categorical(_)) => {
            Err(Error::Validation(format!("range filter needs an integer column, {name} is categorical")))
        }
        (_, Column::Integer(_)) => Err(Error::Validation(format!(
            "equals/in_set filters need a categorical column, {name} is an integer column"
        ))),
    }
}

/// Rows satisfying every clause, in their original order.
pub fn filter(dataset: &Dataset, spec: &FilterSpec) -> Result<Dataset> {
    let compiled = spec.clauses.iter().map(|c| compile(dataset, c)).collect::<Result<Vec<_>>>()?;
    if compiled.is_empty() {
        return Ok(dataset.clone());
    }
    let rows: Vec<usize> = (0..dataset.row_count()).filter(|&r| compiled.iter().all(|c| c.test(r))).collect();
    Ok(dataset.take(&rows))
}
