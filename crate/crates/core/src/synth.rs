//! Seeded synthetic exports shaped like the public SIS file: semicolon
//! separated, Spanish headers, one row per (region, age, nationality, scope,
//! plan) combination with its affiliate count.
//!
//! The counts follow a known linear model plus Gaussian noise, which makes
//! the generator usable as a fixture for fits as well as for timing.

use crate::sampling::SplitMix64;

pub const REGIONS: [&str; 25] = [
    "AMAZONAS",
    "ANCASH",
    "APURIMAC",
    "AREQUIPA",
    "AYACUCHO",
    "CAJAMARCA",
    "CALLAO",
    "CUSCO",
    "HUANCAVELICA",
    "HUANUCO",
    "ICA",
    "JUNIN",
    "LA LIBERTAD",
    "LAMBAYEQUE",
    "LIMA",
    "LORETO",
    "MADRE DE DIOS",
    "MOQUEGUA",
    "PASCO",
    "PIURA",
    "PUNO",
    "SAN MARTIN",
    "TACNA",
    "TUMBES",
    "UCAYALI",
];
pub const PLANS: [&str; 5] = ["SIS GRATUITO", "SIS INDEPENDIENTE", "SIS MICROEMPRESAS", "SIS NRUS", "SIS PARA TODOS"];
pub const NATIONALITIES: [&str; 2] = ["EXTRANJERO", "NACIONAL"];
pub const SCOPES: [&str; 2] = ["RURAL", "URBANO"];
pub const HEADER: &str = "DEPARTAMENTO;EDAD;NACIONAL_EXTRANJERO;AMBITO_INEI;PLAN_DE_SEGURO;TOTAL_AFILIADOS";

/// Effects of the generating model, on the affiliate-count scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthModel {
    pub intercept: f64,
    /// Per plan, in `PLANS` order; the first is the reference and should be 0.
    pub plan: [f64; 5],
    pub age_slope: f64,
    pub national: f64,
    pub urban: f64,
    /// Region effect is `region_step * index`.
    pub region_step: f64,
    pub noise_sd: f64,
}

impl Default for SynthModel {
    fn default() -> Self {
        Self {
            intercept: 40.0,
            plan: [0.0, -12.0, -20.0, -25.0, 18.0],
            age_slope: -0.2,
            national: 30.0,
            urban: 15.0,
            region_step: 1.5,
            noise_sd: 8.0,
        }
    }
}

fn gaussian(rng: &mut SplitMix64) -> f64 {
    // Box-Muller; u1 in (0, 1]
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
    let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// `rows` records drawn uniformly over the category combinations.
pub fn synthetic_csv(rows: usize, seed: u64, model: &SynthModel) -> Vec<u8> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(rows * 48 + HEADER.len() + 1);
    out.extend_from_slice(HEADER.as_bytes());
    out.push(b'\n');
    for _ in 0..rows {
        let region = rng.below(REGIONS.len() as u64) as usize;
        let age = rng.below(100);
        let nat = usize::from(rng.below(10) != 0);
        let scope = rng.below(2) as usize;
        let plan = rng.below(PLANS.len() as u64) as usize;
        let mean = model.intercept
            + model.plan[plan]
            + model.age_slope * age as f64
            + model.national * nat as f64
            + model.urban * scope as f64
            + model.region_step * region as f64;
        let total = (mean + model.noise_sd * gaussian(&mut rng)).round().max(1.0) as u64;
        let line =
            format!("{};{};{};{};{};{}\n", REGIONS[region], age, NATIONALITIES[nat], SCOPES[scope], PLANS[plan], total);
        out.extend_from_slice(line.as_bytes());
    }
    out
}
