//! Typed affiliate table: ingestion, cleaning, filtering, summaries and
//! per-level aggregates.

mod aggregate;
mod clean;
mod dataset;
mod filter;
mod parse;
pub mod schema;
mod summary;

pub use aggregate::{
    aggregate_by, region_totals, Centroid, CentroidTable, LevelAggregate, RegionAggregate, RegionReport,
};
pub use clean::{clean, ingest, CleaningRules, IngestReport};
pub use dataset::{CategoricalColumn, Column, Dataset};
pub use filter::{filter, Clause, FilterSpec};
pub use parse::{parse_csv, CleaningReport, Rejection};
pub use schema::{ColumnKind, ColumnSchema};
pub use summary::{
    quantile_sorted, summarize, CategoricalSummary, ColumnSummary, IntegerSummary, LevelCount, SummaryReport,
};
