use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::dataset::{Column, Dataset};
use super::schema::{fold_accents, REGION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelAggregate {
    pub level: String,
    pub record_count: usize,
    pub affiliate_total: u64,
}

/// Record counts and affiliate totals per level of a categorical column,
/// sorted by level.
pub fn aggregate_by(dataset: &Dataset, variable: &str) -> Result<Vec<LevelAggregate>> {
    let cat = match dataset.column(variable) {
        Some(Column::Categorical(c)) => c,
        Some(Column::Integer(_)) => {
            return Err(Error::Validation(format!("cannot aggregate by integer column {variable}")))
        }
        None => return Err(Error::Validation(format!("unknown column {variable}"))),
    };
    let weights =
        dataset.affiliates().ok_or_else(|| Error::Validation("dataset has no TOTAL_AFFILIATES column".into()))?;
    let mut out: Vec<LevelAggregate> =
        cat.levels().iter().map(|l| LevelAggregate { level: l.clone(), record_count: 0, affiliate_total: 0 }).collect();
    for (&code, &w) in cat.codes().iter().zip(weights) {
        let agg = &mut out[code as usize];
        agg.record_count += 1;
        agg.affiliate_total += w;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub region: String,
    pub lat: f64,
    pub lon: f64,
}

/// Region name to map position lookup, keyed ignoring case and accents.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidTable {
    entries: Vec<Centroid>,
    index: HashMap<String, usize>,
}

fn region_key(name: &str) -> String {
    fold_accents(name.trim())
        .to_uppercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

impl CentroidTable {
    pub fn new(entries: Vec<Centroid>) -> Self {
        let index = entries.iter().enumerate().map(|(i, c)| (region_key(&c.region), i)).collect();
        Self { entries, index }
    }

    /// Parses a JSON array of `{region, lat, lon}` objects.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let entries: Vec<Centroid> =
            serde_json::from_slice(bytes).map_err(|e| Error::Validation(format!("centroid file: {e}")))?;
        Ok(Self::new(entries))
    }

    pub fn get(&self, region: &str) -> Option<&Centroid> {
        self.index.get(&region_key(region)).map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[Centroid] {
        &self.entries
    }

    /// Approximate geographic centres of Peru's 25 departments (24 plus
    /// Callao). Configuration data for map placement only.
    pub fn peru_departments() -> Self {
        const TABLE: [(&str, f64, f64); 25] = [
            ("AMAZONAS", -5.07, -78.05),
            ("ANCASH", -9.41, -77.70),
            ("APURIMAC", -14.05, -73.09),
            ("AREQUIPA", -15.82, -72.56),
            ("AYACUCHO", -13.62, -74.08),
            ("CAJAMARCA", -6.64, -78.64),
            ("CALLAO", -12.05, -77.12),
            ("CUSCO", -13.19, -72.00),
            ("HUANCAVELICA", -12.92, -75.03),
            ("HUANUCO", -9.43, -76.02),
            ("ICA", -14.23, -75.58),
            ("JUNIN", -11.54, -74.88),
            ("LA LIBERTAD", -7.92, -78.39),
            ("LAMBAYEQUE", -6.36, -79.82),
            ("LIMA", -11.80, -76.60),
            ("LORETO", -4.23, -75.10),
            ("MADRE DE DIOS", -11.77, -70.80),
            ("MOQUEGUA", -16.84, -70.92),
            ("PASCO", -10.39, -75.51),
            ("PIURA", -5.13, -80.34),
            ("PUNO", -14.94, -70.03),
            ("SAN MARTIN", -7.04, -76.73),
            ("TACNA", -17.63, -70.46),
            ("TUMBES", -3.82, -80.47),
            ("UCAYALI", -9.63, -73.70),
        ];
        Self::new(TABLE.iter().map(|&(r, lat, lon)| Centroid { region: r.into(), lat, lon }).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionAggregate {
    pub region: String,
    pub total_affiliates: u64,
    pub record_count: usize,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    /// False when the region has no entry in the centroid table.
    pub has_position: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub regions: Vec<RegionAggregate>,
    pub warnings: Vec<String>,
}

/// Per-region totals joined with map positions.
pub fn region_totals(dataset: &Dataset, centroids: &CentroidTable) -> Result<RegionReport> {
    let aggregates = aggregate_by(dataset, REGION)?;
    let mut warnings = Vec::new();
    let regions = aggregates
        .into_iter()
        .map(|a| {
            let pos = centroids.get(&a.level);
            if pos.is_none() {
                warnings.push(format!("no centroid for region {}", a.level));
            }
            RegionAggregate {
                total_affiliates: a.affiliate_total,
                record_count: a.record_count,
                lat: pos.map(|c| c.lat),
                lon: pos.map(|c| c.lon),
                has_position: pos.is_some(),
                region: a.level,
            }
        })
        .collect();
    Ok(RegionReport { regions, warnings })
}
