use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::schema::{AGE, INEI_SCOPE, INSURANCE_PLAN, NATIONAL_FOREIGN, REGION, TOTAL_AFFILIATES};
use crate::store::{Column, Dataset};

pub const INTERCEPT_LABEL: &str = "(Intercept)";

fn default_response() -> String {
    TOTAL_AFFILIATES.to_string()
}

fn default_predictors() -> Vec<String> {
    [INSURANCE_PLAN, REGION, AGE, NATIONAL_FOREIGN, INEI_SCOPE].iter().map(|s| s.to_string()).collect()
}

fn default_true() -> bool {
    true
}

/// Response, predictors and intercept flag of a linear model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(default = "default_response")]
    pub response: String,
    #[serde(default = "default_predictors")]
    pub predictors: Vec<String>,
    #[serde(default = "default_true")]
    pub intercept: bool,
}

impl Default for ModelSpec {
    /// TOTAL_AFFILIATES on plan, region, age, nationality and INEI scope.
    fn default() -> Self {
        Self { response: default_response(), predictors: default_predictors(), intercept: true }
    }
}

impl ModelSpec {
    pub fn new<S: Into<String>>(response: impl Into<String>, predictors: impl IntoIterator<Item = S>) -> Self {
        Self {
            response: response.into(),
            predictors: predictors.into_iter().map(Into::into).collect(),
            intercept: true,
        }
    }

    pub fn without_intercept(mut self) -> Self {
        self.intercept = false;
        self
    }

    /// Same model with `variable` removed from the predictors.
    pub fn dropping(&self, variable: &str) -> ModelSpec {
        ModelSpec {
            response: self.response.clone(),
            predictors: self.predictors.iter().filter(|p| p.as_str() != variable).cloned().collect(),
            intercept: self.intercept,
        }
    }

    /// Checks the model specification against `dataset` and returns it with canonical names.
    pub fn resolve(&self, dataset: &Dataset) -> Result<ModelSpec> {
        let lookup = |name: &str| {
            dataset.resolve(name).map(str::to_string).ok_or_else(|| Error::Validation(format!("unknown column {name}")))
        };
        let response = lookup(&self.response)?;
        if dataset.integer(&response).is_none() {
            return Err(Error::Validation(format!("response {response} must be an integer column")));
        }
        let mut predictors = Vec::with_capacity(self.predictors.len());
        for p in &self.predictors {
            let name = lookup(p)?;
            if name == response {
                return Err(Error::Validation(format!("predictor {name} is the response")));
            }
            if predictors.contains(&name) {
                return Err(Error::Validation(format!("predictor {name} listed twice")));
            }
            predictors.push(name);
        }
        Ok(ModelSpec { response, predictors, intercept: self.intercept })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermKind {
    Intercept,
    Numeric,
    Level { level: String },
}

/// One design column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    /// Source column; `None` for the intercept.
    pub source: Option<String>,
    #[serde(flatten)]
    pub kind: TermKind,
}

/// How one predictor becomes design columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictorEncoding {
    Numeric {
        column: String,
    },
    /// Treatment coding; `levels[0]` is the reference and gets no column.
    Treatment {
        column: String,
        levels: Vec<String>,
    },
}

impl PredictorEncoding {
    pub fn column(&self) -> &str {
        match self {
            PredictorEncoding::Numeric { column } | PredictorEncoding::Treatment { column, .. } => column,
        }
    }
}

/// The full recipe for a design: reusable on new rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    pub intercept: bool,
    pub predictors: Vec<PredictorEncoding>,
}

impl Encoding {
    pub fn terms(&self) -> Vec<Term> {
        let mut terms = Vec::new();
        if self.intercept {
            terms.push(Term { label: INTERCEPT_LABEL.into(), source: None, kind: TermKind::Intercept });
        }
        for p in &self.predictors {
            match p {
                PredictorEncoding::Numeric { column } => {
                    terms.push(Term { label: column.clone(), source: Some(column.clone()), kind: TermKind::Numeric })
                }
                PredictorEncoding::Treatment { column, levels } => {
                    for level in &levels[1..] {
                        terms.push(Term {
                            label: format!("{column}={level}"),
                            source: Some(column.clone()),
                            kind: TermKind::Level { level: level.clone() },
                        });
                    }
                }
            }
        }
        terms
    }

    pub fn reference_levels(&self) -> BTreeMap<String, String> {
        self.predictors
            .iter()
            .filter_map(|p| match p {
                PredictorEncoding::Treatment { column, levels } => Some((column.clone(), levels[0].clone())),
                PredictorEncoding::Numeric { .. } => None,
            })
            .collect()
    }
}

/// Dense n x k design matrix stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    nrows: usize,
    columns: Vec<Vec<f64>>,
    terms: Vec<Term>,
    encoding: Encoding,
}

impl DesignMatrix {
    /// Design from raw numeric columns, named by `labels`.
    pub fn from_numeric(labels: &[&str], columns: Vec<Vec<f64>>, intercept: bool) -> Result<Self> {
        if labels.len() != columns.len() {
            return Err(Error::Validation("one label per column required".into()));
        }
        let nrows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != nrows) {
            return Err(Error::Validation("design columns differ in length".into()));
        }
        let encoding = Encoding {
            intercept,
            predictors: labels.iter().map(|l| PredictorEncoding::Numeric { column: l.to_string() }).collect(),
        };
        let mut all = Vec::with_capacity(columns.len() + 1);
        if intercept {
            all.push(vec![1.0; nrows]);
        }
        all.extend(columns);
        Ok(Self { nrows, terms: encoding.terms(), columns: all, encoding })
    }

    /// Applies a fixed encoding to `dataset`. Levels outside the encoding fail.
    pub fn with_encoding(dataset: &Dataset, encoding: &Encoding) -> Result<Self> {
        let n = dataset.row_count();
        let mut columns = Vec::new();
        if encoding.intercept {
            columns.push(vec![1.0; n]);
        }
        for p in &encoding.predictors {
            let name = p.column();
            let column = dataset.column(name).ok_or_else(|| Error::SchemaMismatch(format!("column {name} missing")))?;
            match (p, column) {
                (PredictorEncoding::Numeric { .. }, Column::Integer(v)) => {
                    columns.push(v.iter().map(|&x| x as f64).collect())
                }
                (PredictorEncoding::Treatment { levels, .. }, Column::Categorical(cat)) => {
                    // dataset level index -> design column offset (None for reference)
                    let mut slot = Vec::with_capacity(cat.levels().len());
                    for l in cat.levels() {
                        match levels.iter().position(|e| e == l) {
                            Some(0) => slot.push(None),
                            Some(i) => slot.push(Some(i - 1)),
                            None => return Err(Error::UnseenLevel { column: name.to_string(), level: l.clone() }),
                        }
                    }
                    let base = columns.len();
                    columns.extend((1..levels.len()).map(|_| vec![0.0; n]));
                    for (row, &code) in cat.codes().iter().enumerate() {
                        if let Some(off) = slot[code as usize] {
                            columns[base + off][row] = 1.0;
                        }
                    }
                }
                _ => return Err(Error::SchemaMismatch(format!("column {name} changed kind"))),
            }
        }
        Ok(Self { nrows: n, columns, terms: encoding.terms(), encoding: encoding.clone() })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    pub fn reference_levels(&self) -> BTreeMap<String, String> {
        self.encoding.reference_levels()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    /// `X b`, skipping `None` coefficients.
    pub fn mul_vec(&self, coefficients: &[Option<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        for (col, b) in self.columns.iter().zip(coefficients) {
            if let Some(b) = *b {
                for (o, x) in out.iter_mut().zip(col) {
                    *o += x * b;
                }
            }
        }
        out
    }

    /// `X^T v`.
    pub fn transpose_mul(&self, v: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|c| c.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

fn encoding_for(dataset: &Dataset, spec: &ModelSpec) -> Result<Encoding> {
    let mut predictors = Vec::with_capacity(spec.predictors.len());
    for name in &spec.predictors {
        match dataset.column(name) {
            Some(Column::Integer(_)) => predictors.push(PredictorEncoding::Numeric { column: name.clone() }),
            Some(Column::Categorical(cat)) => {
                if cat.levels().len() < 2 {
                    return Err(Error::DegeneratePredictor {
                        column: name.clone(),
                        reason: format!("only {} distinct level(s)", cat.levels().len()),
                    });
                }
                predictors.push(PredictorEncoding::Treatment { column: name.clone(), levels: cat.levels().to_vec() })
            }
            None => return Err(Error::Validation(format!("unknown column {name}"))),
        }
    }
    Ok(Encoding { intercept: spec.intercept, predictors })
}

pub(crate) fn build_resolved(dataset: &Dataset, spec: &ModelSpec) -> Result<(DesignMatrix, Vec<f64>)> {
    if dataset.is_empty() {
        return Err(Error::InsufficientData("dataset has no rows".into()));
    }
    let encoding = encoding_for(dataset, spec)?;
    let design = DesignMatrix::with_encoding(dataset, &encoding)?;
    let y = dataset.numeric(&spec.response)?;
    Ok((design, y))
}

/// Treatment-coded design matrix and response vector for `spec`.
pub fn build_design_matrix(dataset: &Dataset, spec: &ModelSpec) -> Result<(DesignMatrix, Vec<f64>)> {
    let spec = spec.resolve(dataset)?;
    if spec.predictors.is_empty() {
        return Err(Error::Validation("at least one predictor is required".into()));
    }
    build_resolved(dataset, &spec)
}
