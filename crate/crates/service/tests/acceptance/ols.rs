use num::{BigRational, ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use sisx_core::regression::{fit_ols, DesignMatrix};

use crate::{Check, Outcome};

const INSTANCES: usize = 200;
const REL_TOL: f64 = 1e-8;

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

/// Exact solution of the normal equations `X'X b = X'y` over the rationals,
/// from the exactly represented f64 inputs, by Gauss-Jordan elimination.
fn normal_equations_oracle(cols: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let k = cols.len();
    let xr: Vec<Vec<BigRational>> = cols.iter().map(|c| c.iter().map(|&v| rat(v)).collect()).collect();
    let yr: Vec<BigRational> = y.iter().map(|&v| rat(v)).collect();
    let dot =
        |a: &[BigRational], b: &[BigRational]| a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y);
    let mut m: Vec<Vec<BigRational>> = (0..k)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..k).map(|j| dot(&xr[i], &xr[j])).collect();
            row.push(dot(&xr[i], &yr));
            row
        })
        .collect();
    for col in 0..k {
        let piv = (col..k).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..k {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (v, pv) in m[r].iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
    }
    Some(m.iter().map(|row| row[k].to_f64().unwrap()).collect())
}

struct Instance {
    cols: Vec<Vec<f64>>,
    y: Vec<f64>,
}

fn instance(rng: &mut StdRng) -> Instance {
    let p = rng.random_range(1..=6);
    let n = rng.random_range(p + 3..=40);
    let std = Normal::new(0.0, 1.0).unwrap();
    let mut cols = vec![vec![1.0; n]];
    for _ in 0..p {
        let col: Vec<f64> = if rng.random_bool(0.3) {
            // indicator column, kept non-constant
            let mut c: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random_bool(0.4)))).collect();
            c[0] = 1.0;
            c[1] = 0.0;
            c
        } else {
            let scale = [0.01, 1.0, 100.0][rng.random_range(0..3)];
            let shift = rng.random_range(-10.0..10.0) * scale;
            (0..n).map(|_| shift + scale * std.sample(rng)).collect()
        };
        cols.push(col);
    }
    let beta: Vec<f64> = (0..=p).map(|_| rng.random_range(-5.0..5.0)).collect();
    let noise = rng.random_range(0.01..3.0);
    let y = (0..n).map(|i| (0..=p).map(|j| beta[j] * cols[j][i]).sum::<f64>() + noise * std.sample(rng)).collect();
    Instance { cols, y }
}

pub fn run() -> Outcome {
    let mut c = Check::default();
    let mut rng = StdRng::seed_from_u64(0x0150_0002);
    let mut worst_rel = 0.0f64;
    let mut worst_orth = 0.0f64;
    for case in 0..INSTANCES {
        let inst = instance(&mut rng);
        let labels: Vec<String> = (1..inst.cols.len()).map(|j| format!("x{j}")).collect();
        let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let design = DesignMatrix::from_numeric(&label_refs, inst.cols[1..].to_vec(), true).unwrap();
        let fit = match fit_ols(&design, &inst.y) {
            Ok(f) => f,
            Err(e) => {
                c.require(false, || format!("case {case}: fit failed: {e}"));
                continue;
            }
        };
        let Some(oracle) = normal_equations_oracle(&inst.cols, &inst.y) else {
            c.require(false, || format!("case {case}: oracle found a singular system"));
            continue;
        };
        for (j, (b, o)) in fit.beta().iter().zip(&oracle).enumerate() {
            let Some(b) = b else {
                c.require(false, || format!("case {case}: coefficient {j} reported aliased"));
                continue;
            };
            let rel = (b - o).abs() / o.abs().max(f64::MIN_POSITIVE);
            worst_rel = worst_rel.max(rel);
            c.require(rel <= REL_TOL, || format!("case {case} coef {j}: {b} vs oracle {o} (rel {rel:.2e})"));
        }
        let xte = design.transpose_mul(&fit.residuals);
        let xty = design.transpose_mul(&inst.y);
        let num = xte.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let den = xty.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst_orth = worst_orth.max(num / den);
        c.require(num <= 1e-8 * den, || format!("case {case}: |X'e|inf = {num:.3e}, |X'y|inf = {den:.3e}"));
    }
    c.note(format!("{INSTANCES} instances; worst coefficient relative error {worst_rel:.2e} (limit {REL_TOL:.0e})"));
    c.note(format!("worst |X'e|inf / |X'y|inf = {worst_orth:.2e} (limit 1e-8)"));
    c.done()
}
