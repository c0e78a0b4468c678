//! Survey sample sizes for a proportion and seeded simple random sampling.
//!
//! # Reproducibility
//!
//! [`draw_sample`] is fully specified so that a `(rows, n, seed)` triple picks
//! the same rows on every platform:
//!
//! * Generator: SplitMix64. The state advances by `0x9E3779B97F4A7C15`; each
//!   output is `z ^ (z >> 31)` after `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`
//!   and `z = (z ^ (z >> 27)) * 0x94D049BB133111EB` (wrapping arithmetic).
//!   The initial state is the seed.
//! * Bounded integers: Lemire's multiply-high with rejection, exact for any
//!   bound.
//! * Selection: Knuth's selection sampling. Row `t` of `N` is taken when a
//!   uniform integer in `[0, N - t)` is below the number of rows still needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::two_sided_z;
use crate::store::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeParams {
    pub population_size: u64,
    pub confidence_level: f64,
    pub margin_of_error: f64,
    /// Anticipated proportion; 0.5 gives the largest sample.
    #[serde(default = "conservative_proportion")]
    pub proportion: f64,
}

fn conservative_proportion() -> f64 {
    0.5
}

impl SampleSizeParams {
    /// Parameters with the conservative proportion 0.5.
    pub fn new(population_size: u64, confidence_level: f64, margin_of_error: f64) -> Self {
        Self { population_size, confidence_level, margin_of_error, proportion: 0.5 }
    }

    pub fn with_proportion(mut self, p: f64) -> Self {
        self.proportion = p;
        self
    }

    pub fn q(&self) -> f64 {
        1.0 - self.proportion
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 1 {
            return Err(Error::Domain("population size must be at least 1".into()));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::Domain(format!("confidence level must be in (0, 1), got {}", self.confidence_level)));
        }
        if !(self.margin_of_error > 0.0 && self.margin_of_error <= 1.0) {
            return Err(Error::Domain(format!("margin of error must be in (0, 1], got {}", self.margin_of_error)));
        }
        if !(0.0..=1.0).contains(&self.proportion) {
            return Err(Error::Domain(format!("proportion must be in [0, 1], got {}", self.proportion)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSize {
    pub n: u64,
    pub z: f64,
    /// The formula's value before rounding up.
    pub unrounded: f64,
}

/// `n = ceil(z^2 p q / (e^2 + z^2 p q / N))`, kept within `[1, N]`.
pub fn sample_size_detail(params: &SampleSizeParams) -> Result<SampleSize> {
    params.validate()?;
    let z = two_sided_z(params.confidence_level)?;
    let zpq = z * z * params.proportion * params.q();
    let e = params.margin_of_error;
    let unrounded = zpq / (e * e + zpq / params.population_size as f64);
    let n = (unrounded.ceil() as u64).clamp(1, params.population_size);
    Ok(SampleSize { n, z, unrounded })
}

pub fn sample_size(params: &SampleSizeParams) -> Result<u64> {
    sample_size_detail(params).map(|s| s.n)
}

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[0, bound)`; `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let mut m = u128::from(self.next_u64()) * u128::from(bound);
        if (m as u64) < bound {
            let threshold = bound.wrapping_neg() % bound;
            while (m as u64) < threshold {
                m = u128::from(self.next_u64()) * u128::from(bound);
            }
        }
        (m >> 64) as u64
    }
}

/// `n` distinct indices of `0..population`, ascending.
pub fn sample_indices(population: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Validation("sample size must be at least 1".into()));
    }
    if n > population {
        return Err(Error::Bounds { requested: n, available: population });
    }
    let mut rng = SplitMix64::new(seed);
    let mut chosen = Vec::with_capacity(n);
    for t in 0..population {
        let needed = (n - chosen.len()) as u64;
        if needed == 0 {
            break;
        }
        if rng.below((population - t) as u64) < needed {
            chosen.push(t);
        }
    }
    Ok(chosen)
}

/// Simple random sample of `n` rows without replacement, original order kept.
pub fn draw_sample(dataset: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    let rows = sample_indices(dataset.row_count(), n, seed)?;
    Ok(dataset.take(&rows))
}
