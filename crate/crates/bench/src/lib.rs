//! Fixtures shared by the benchmarks.

use sisx_core::store::schema::ColumnSchema;
use sisx_core::store::{ingest, CleaningRules};
use sisx_core::synth::{synthetic_csv, SynthModel};
use sisx_core::Dataset;

/// Synthetic export bytes with the default model.
pub fn export(rows: usize) -> Vec<u8> {
    synthetic_csv(rows, 0x5eed, &SynthModel::default())
}

pub fn dataset(rows: usize) -> Dataset {
    ingest(&export(rows), &ColumnSchema::sis_default(), &CleaningRules::default()).expect("synthetic export parses").0
}
