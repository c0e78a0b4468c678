use serde::{Deserialize, Serialize};

use super::dataset::{sha256_hex, CategoricalColumn, Column, Dataset};
use super::schema::{ColumnKind, ColumnSchema};
use crate::error::{Error, Result};

const BOM: &[u8] = b"\xEF\xBB\xBF";

/// One failed cell. `row` is the zero-based data-row index of the input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub row: usize,
    pub column: String,
    pub raw: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub rows_in: usize,
    pub rows_kept: usize,
    pub rows_rejected: usize,
    pub rejections: Vec<Rejection>,
}

impl CleaningReport {
    pub(crate) fn new(rows_in: usize, rejections: Vec<Rejection>) -> Self {
        let mut rejected_rows: Vec<usize> = rejections.iter().map(|r| r.row).collect();
        rejected_rows.dedup();
        let rows_rejected = rejected_rows.len();
        Self { rows_in, rows_kept: rows_in - rows_rejected, rows_rejected, rejections }
    }
}

/// Comma or semicolon, whichever occurs more often in the header line.
fn detect_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    let commas = header.matches(',').count();
    let semicolons = header.matches(';').count();
    if semicolons > commas {
        b';'
    } else {
        b','
    }
}

enum Builder {
    Categorical(Vec<String>),
    Integer(Vec<u64>),
}

/// Parses a delimited affiliate export against `schema`.
///
/// Rows whose cells fail type coercion are dropped and listed in the report;
/// the returned dataset holds only the rows that parsed.
pub fn parse_csv(bytes: &[u8], schema: &[ColumnSchema]) -> Result<(Dataset, CleaningReport)> {
    let (body, offset) = match bytes.strip_prefix(BOM) {
        Some(rest) => (rest, BOM.len()),
        None => (bytes, 0),
    };
    let text = std::str::from_utf8(body).map_err(|e| Error::Encoding { offset: offset + e.valid_up_to() })?;

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(text))
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(h) => h.map_err(|e| Error::Csv(e.to_string()))?,
        None => return Err(Error::EmptyInput { rows_in: 0 }),
    };
    let width = header.len();

    let mut present: Vec<(ColumnSchema, usize)> = Vec::new();
    for col in schema {
        match header.iter().position(|h| col.matches(h)) {
            Some(idx) => present.push((col.clone(), idx)),
            None if col.required => return Err(Error::MissingColumn { column: col.name.clone() }),
            None => {}
        }
    }

    let mut builders: Vec<Builder> = present
        .iter()
        .map(|(c, _)| match c.kind {
            ColumnKind::Categorical => Builder::Categorical(Vec::new()),
            ColumnKind::NonnegativeInteger => Builder::Integer(Vec::new()),
        })
        .collect();

    let mut rejections = Vec::new();
    let mut rows_in = 0;
    let mut row_cells: Vec<Option<Cell>> = Vec::with_capacity(present.len());
    for record in records {
        let row = rows_in;
        rows_in += 1;
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        if record.len() != width {
            rejections.push(Rejection {
                row,
                column: "*".into(),
                raw: record.iter().collect::<Vec<_>>().join(","),
                reason: format!("expected {width} fields, found {}", record.len()),
            });
            continue;
        }
        row_cells.clear();
        let before = rejections.len();
        for (col, idx) in &present {
            let raw = &record[*idx];
            match coerce(raw, col) {
                Ok(cell) => row_cells.push(Some(cell)),
                Err(reason) => {
                    rejections.push(Rejection { row, column: col.name.clone(), raw: raw.to_string(), reason });
                    row_cells.push(None);
                }
            }
        }
        if rejections.len() > before {
            continue;
        }
        for (builder, cell) in builders.iter_mut().zip(row_cells.drain(..)) {
            match (builder, cell) {
                (Builder::Categorical(v), Some(Cell::Text(s))) => v.push(s),
                (Builder::Integer(v), Some(Cell::Int(n))) => v.push(n),
                _ => unreachable!("coercion follows the column kind"),
            }
        }
    }

    let report = CleaningReport::new(rows_in, rejections);
    if report.rows_kept == 0 {
        return Err(Error::EmptyInput { rows_in });
    }

    let columns = builders
        .into_iter()
        .map(|b| match b {
            Builder::Categorical(v) => Column::Categorical(CategoricalColumn::from_values(v)),
            Builder::Integer(v) => Column::Integer(v),
        })
        .collect();
    let schema = present.into_iter().map(|(c, _)| c).collect();
    let dataset = Dataset::from_columns(schema, columns, sha256_hex(bytes))?;
    Ok((dataset, report))
}

enum Cell {
    Text(String),
    Int(u64),
}

fn coerce(raw: &str, col: &ColumnSchema) -> std::result::Result<Cell, String> {
    match col.kind {
        ColumnKind::Categorical => {
            if raw.trim().is_empty() {
                Err(format!("missing {}", col.name))
            } else {
                Ok(Cell::Text(raw.to_string()))
            }
        }
        ColumnKind::NonnegativeInteger => {
            let t = raw.trim();
            match t.parse::<u64>() {
                Ok(n) => Ok(Cell::Int(n)),
                Err(_) if t.is_empty() => Err(format!("missing {}", col.name)),
                Err(_) if t.parse::<i64>().is_ok() => Err(format!("negative {}", col.name)),
                Err(_) => Err(format!("non-integer {}", col.name)),
            }
        }
    }
}
