use std::collections::HashMap;

use sha2::{Digest, Sha256};

use super::schema::{ColumnKind, ColumnSchema, TOTAL_AFFILIATES};
use crate::error::{Error, Result};

/// Categorical values stored as codes into a sorted, duplicate-free level list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalColumn {
    codes: Vec<u32>,
    levels: Vec<String>,
}

impl CategoricalColumn {
    pub fn from_values<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen: HashMap<String, u32> = HashMap::new();
        let mut first_codes = Vec::new();
        let mut distinct = Vec::new();
        for v in values {
            let v = v.as_ref();
            let code = match seen.get(v) {
                Some(&c) => c,
                None => {
                    let c = distinct.len() as u32;
                    seen.insert(v.to_string(), c);
                    distinct.push(v.to_string());
                    c
                }
            };
            first_codes.push(code);
        }
        Self::from_unsorted(first_codes, distinct)
    }

    /// Sorts `levels` by code point and remaps `codes`, dropping unused levels.
    fn from_unsorted(codes: Vec<u32>, levels: Vec<String>) -> Self {
        let mut used = vec![false; levels.len()];
        for &c in &codes {
            used[c as usize] = true;
        }
        let mut order: Vec<usize> = (0..levels.len()).filter(|&i| used[i]).collect();
        order.sort_by(|&a, &b| levels[a].cmp(&levels[b]));
        let mut remap = vec![u32::MAX; levels.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new as u32;
        }
        let mut levels = levels;
        let sorted = order.iter().map(|&i| std::mem::take(&mut levels[i])).collect();
        Self { codes: codes.into_iter().map(|c| remap[c as usize]).collect(), levels: sorted }
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn value(&self, row: usize) -> &str {
        &self.levels[self.codes[row] as usize]
    }

    pub fn level_index(&self, level: &str) -> Option<usize> {
        self.levels.binary_search_by(|l| l.as_str().cmp(level)).ok()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    fn take(&self, rows: &[usize]) -> Self {
        let codes = rows.iter().map(|&r| self.codes[r]).collect();
        Self::from_unsorted(codes, self.levels.clone())
    }

    fn map_values(&self, f: impl Fn(&str) -> String) -> Self {
        let mapped: Vec<String> = self.levels.iter().map(|l| f(l)).collect();
        Self::from_values(self.codes.iter().map(|&c| mapped[c as usize].as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Categorical(CategoricalColumn),
    Integer(Vec<u64>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Categorical(c) => c.len(),
            Column::Integer(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            Column::Categorical(_) => ColumnKind::Categorical,
            Column::Integer(_) => ColumnKind::NonnegativeInteger,
        }
    }

    fn take(&self, rows: &[usize]) -> Column {
        match self {
            Column::Categorical(c) => Column::Categorical(c.take(rows)),
            Column::Integer(v) => Column::Integer(rows.iter().map(|&r| v[r]).collect()),
        }
    }

    fn cell(&self, row: usize) -> String {
        match self {
            Column::Categorical(c) => c.value(row).to_string(),
            Column::Integer(v) => v[row].to_string(),
        }
    }
}

/// Immutable, column-oriented affiliate table.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: Vec<ColumnSchema>,
    columns: Vec<Column>,
    row_count: usize,
    source_digest: String,
}

impl PartialEq for Dataset {
    /// Content equality; the digest of the originally ingested bytes is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.row_count == other.row_count
            && self.columns == other.columns
            && self.schema.iter().map(|c| &c.name).eq(other.schema.iter().map(|c| &c.name))
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl Dataset {
    /// Assembles a dataset from typed columns. Every column must match its
    /// schema kind and all columns must share one length.
    pub fn from_columns(
        schema: Vec<ColumnSchema>,
        columns: Vec<Column>,
        source_digest: impl Into<String>,
    ) -> Result<Self> {
        if schema.len() != columns.len() {
            return Err(Error::Validation(format!("{} schema entries for {} columns", schema.len(), columns.len())));
        }
        let row_count = columns.first().map_or(0, Column::len);
        for (s, c) in schema.iter().zip(&columns) {
            if s.kind != c.kind() {
                return Err(Error::Validation(format!("column {} has the wrong kind", s.name)));
            }
            if c.len() != row_count {
                return Err(Error::Validation(format!("column {} has {} rows, expected {row_count}", s.name, c.len())));
            }
        }
        Ok(Self { schema, columns, row_count, source_digest: source_digest.into() })
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn is_empty(&self) -> bool {
        self.row_count == 0
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.schema.iter().map(|c| c.name.as_str())
    }

    /// Digest of the bytes this dataset was originally parsed from.
    pub fn source_digest(&self) -> &str {
        &self.source_digest
    }

    /// Maps a user-supplied column name (any case, accents or alias) to the
    /// canonical name present in this dataset.
    pub fn resolve(&self, name: &str) -> Option<&str> {
        self.schema.iter().find(|c| c.matches(name)).map(|c| c.name.as_str())
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name).or_else(|| self.schema.iter().position(|c| c.matches(name)))
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.index_of(name).map(|i| &self.columns[i])
    }

    pub fn columns(&self) -> impl Iterator<Item = (&ColumnSchema, &Column)> {
        self.schema.iter().zip(&self.columns)
    }

    pub fn categorical(&self, name: &str) -> Option<&CategoricalColumn> {
        match self.column(name)? {
            Column::Categorical(c) => Some(c),
            Column::Integer(_) => None,
        }
    }

    pub fn integer(&self, name: &str) -> Option<&[u64]> {
        match self.column(name)? {
            Column::Integer(v) => Some(v),
            Column::Categorical(_) => None,
        }
    }

    pub fn levels(&self, name: &str) -> Option<&[String]> {
        self.categorical(name).map(CategoricalColumn::levels)
    }

    /// The affiliate-count weights, if the table carries them.
    pub fn affiliates(&self) -> Option<&[u64]> {
        self.integer(TOTAL_AFFILIATES)
    }

    /// Integer column as reals.
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>> {
        match self.column(name) {
            Some(Column::Integer(v)) => Ok(v.iter().map(|&x| x as f64).collect()),
            Some(Column::Categorical(_)) => {
                Err(Error::Validation(format!("column {name} is categorical, not numeric")))
            }
            None => Err(Error::Validation(format!("unknown column {name}"))),
        }
    }

    /// Rows at the given indices, in the given order. Level lists shrink to
    /// the values that remain.
    pub fn take(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            row_count: rows.len(),
            source_digest: self.source_digest.clone(),
        }
    }

    pub(crate) fn map_categoricals(&self, f: impl Fn(&str) -> String) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| match c {
                    Column::Categorical(cat) => Column::Categorical(cat.map_values(&f)),
                    other => other.clone(),
                })
                .collect(),
            row_count: self.row_count,
            source_digest: self.source_digest.clone(),
        }
    }

    pub fn row(&self, row: usize) -> Vec<String> {
        self.columns.iter().map(|c| c.cell(row)).collect()
    }

    /// Comma-separated UTF-8 with a header of canonical names, rows in order.
    pub fn to_canonical_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(self.schema.iter().map(|c| c.name.as_str())).expect("in-memory write");
        for r in 0..self.row_count {
            w.write_record(self.row(r)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// SHA-256 of [`Dataset::to_canonical_csv`]; equal content gives equal digests.
    pub fn canonical_digest(&self) -> String {
        sha256_hex(&self.to_canonical_csv())
    }

    /// Sum of the affiliate column, zero when absent.
    pub fn total_affiliates(&self) -> u64 {
        self.affiliates().map_or(0, |v| v.iter().sum())
    }
}
