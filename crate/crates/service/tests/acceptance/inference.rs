use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use sisx_core::regression::{fit_model, fit_ols, group_tests, partial_f_test, DesignMatrix, ModelSpec};
use sisx_core::store::schema::{ColumnSchema, AGE, INEI_SCOPE, REGION, TOTAL_AFFILIATES};
use sisx_core::store::{CategoricalColumn, Column, ColumnKind};
use sisx_core::Dataset;

use crate::{Check, Outcome};

const FITS: usize = 1000;
const COVERAGE_RANGE: (f64, f64) = (0.93, 0.97);
const F_TOL: f64 = 1e-9;

fn coverage(c: &mut Check) {
    let mut rng = StdRng::seed_from_u64(0xc0_0e4a);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let beta = [3.0, -1.5, 0.75];
    let n = 30;
    // fixed design, fresh errors per fit
    let x1: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let x2: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
    let design = DesignMatrix::from_numeric(&["x1", "x2"], vec![x1.clone(), x2.clone()], true).unwrap();
    let mut hits = [0usize; 3];
    for _ in 0..FITS {
        let y: Vec<f64> =
            (0..n).map(|i| beta[0] + beta[1] * x1[i] + beta[2] * x2[i] + noise.sample(&mut rng)).collect();
        let fit = fit_ols(&design, &y).unwrap();
        for (j, ci) in fit.confidence_intervals(0.95).unwrap().iter().enumerate() {
            let (lo, hi) = ci.unwrap();
            if lo <= beta[j] && beta[j] <= hi {
                hits[j] += 1;
            }
        }
    }
    for (j, h) in hits.iter().enumerate() {
        let rate = *h as f64 / FITS as f64;
        c.require((COVERAGE_RANGE.0..=COVERAGE_RANGE.1).contains(&rate), || {
            format!("coefficient {j}: coverage {rate:.3} outside [{}, {}]", COVERAGE_RANGE.0, COVERAGE_RANGE.1)
        });
    }
    let rates: Vec<String> = hits.iter().map(|h| format!("{:.3}", *h as f64 / FITS as f64)).collect();
    c.note(format!("95% CI coverage over {FITS} fits (intercept, x1, x2): {}", rates.join(", ")));
}

fn dataset(rng: &mut StdRng, n: usize) -> Dataset {
    let regions = ["AREQUIPA", "CUSCO", "LIMA", "PUNO"];
    let scopes = ["RURAL", "URBANO"];
    let region: Vec<&str> = (0..n).map(|_| regions[rng.random_range(0..4)]).collect();
    let scope: Vec<&str> = (0..n).map(|_| scopes[rng.random_range(0..2)]).collect();
    let age: Vec<u64> = (0..n).map(|_| rng.random_range(0..100)).collect();
    let noise = Normal::new(0.0, 10.0).unwrap();
    let slope = rng.random_range(-1.0..1.0);
    let total: Vec<u64> = (0..n)
        .map(|i| {
            let r = regions.iter().position(|x| *x == region[i]).unwrap() as f64;
            (100.0 + slope * age[i] as f64 + 5.0 * r + noise.sample(rng)).round().max(0.0) as u64
        })
        .collect();
    let schema = vec![
        ColumnSchema::new(REGION, ColumnKind::Categorical, &[]),
        ColumnSchema::new(AGE, ColumnKind::NonnegativeInteger, &[]),
        ColumnSchema::new(INEI_SCOPE, ColumnKind::Categorical, &[]),
        ColumnSchema::new(TOTAL_AFFILIATES, ColumnKind::NonnegativeInteger, &[]),
    ];
    let columns = vec![
        Column::Categorical(CategoricalColumn::from_values(region)),
        Column::Integer(age),
        Column::Categorical(CategoricalColumn::from_values(scope)),
        Column::Integer(total),
    ];
    Dataset::from_columns(schema, columns, "synthetic").unwrap()
}

fn partial_f_equals_t_squared(c: &mut Check) {
    let mut rng = StdRng::seed_from_u64(0xf7e57);
    let mut worst = 0.0f64;
    let mut worst_wald = 0.0f64;
    let cases = 200;
    for case in 0..cases {
        let n = rng.random_range(12..300);
        let ds = dataset(&mut rng, n);
        let spec = ModelSpec::new(TOTAL_AFFILIATES, [REGION, AGE, INEI_SCOPE]);
        let fit = fit_model(&ds, &spec).unwrap();
        let t = fit.coefficient(AGE).and_then(|t| t.t).unwrap();
        let f = partial_f_test(&fit, &ds, &spec, AGE).unwrap();
        let rel = (f.f - t * t).abs() / (t * t).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        c.require(f.df_num == 1, || format!("case {case}: df_num {}", f.df_num));
        c.require(rel <= F_TOL, || format!("case {case}: partial F {} vs t^2 {} (rel {rel:.2e})", f.f, t * t));
        let wald = group_tests(&fit).unwrap().into_iter().find(|g| g.variable == AGE).unwrap();
        let rel_w = (wald.f - f.f).abs() / f.f.max(f64::MIN_POSITIVE);
        worst_wald = worst_wald.max(rel_w);
        c.require(rel_w <= F_TOL, || format!("case {case}: covariance-block F {} vs refit F {}", wald.f, f.f));
    }
    c.note(format!("partial F vs t^2 on {cases} fits: worst relative difference {worst:.2e} (limit {F_TOL:.0e})"));
    c.note(format!("covariance-block F vs refit F: worst relative difference {worst_wald:.2e}"));
}

pub fn run() -> Outcome {
    let mut c = Check::default();
    coverage(&mut c);
    partial_f_equals_t_squared(&mut c);
    c.done()
}
