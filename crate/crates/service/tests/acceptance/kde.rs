use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Exp, Normal};
use sisx_core::density::{kde, DEFAULT_GRID_SIZE};

use crate::{Check, Outcome};

const INPUTS: usize = 100;
const INTEGRAL_TOL: f64 = 1e-2;
const SHIFT_TOL: f64 = 1e-12;
const SCALE_TOL: f64 = 1e-10;
/// Gated inputs and shifts live on this lattice so that `x + c` is exact;
/// with |x + c| < 2^15 the sum needs at most 39 significant bits.
const LATTICE: f64 = 16_777_216.0;

fn on_lattice(x: f64) -> f64 {
    (x * LATTICE).round() / LATTICE
}

fn random_input(rng: &mut StdRng) -> Vec<f64> {
    let n = rng.random_range(2..2000);
    let loc = rng.random_range(-100.0..100.0);
    let scale = [0.1, 1.0, 10.0, 1000.0][rng.random_range(0..4)];
    let std = Normal::new(0.0, 1.0).unwrap();
    let exp = Exp::new(1.0).unwrap();
    match rng.random_range(0..4) {
        0 => (0..n).map(|_| loc + scale * std.sample(rng)).collect(),
        1 => (0..n).map(|_| loc + scale * rng.random_range(0.0..1.0)).collect(),
        2 => (0..n).map(|_| loc + scale * exp.sample(rng)).collect(),
        // bimodal mixture, rounded to integers like record ages
        _ => (0..n)
            .map(|_| {
                let centre = if rng.random_bool(0.5) { 0.0 } else { 4.0 };
                (loc + scale * (centre + std.sample(rng))).round()
            })
            .collect(),
    }
}

/// Trapezoid rule over the estimate's own grid.
fn trapezoid(grid: &[f64], density: &[f64]) -> f64 {
    grid.windows(2).zip(density.windows(2)).map(|(g, d)| 0.5 * (g[1] - g[0]) * (d[0] + d[1])).sum()
}

pub fn run() -> Outcome {
    let mut c = Check::default();
    let mut rng = StdRng::seed_from_u64(0x0ede_0005);
    let (mut worst_int, mut worst_shift, mut worst_scale) = (0.0f64, 0.0f64, 0.0f64);
    let mut worst_rounded = 0.0f64;
    let mut used = 0;
    while used < INPUTS {
        let raw = random_input(&mut rng);
        let v: Vec<f64> = raw.iter().copied().map(on_lattice).collect();
        if v.iter().all(|x| *x == v[0]) {
            continue;
        }
        used += 1;
        let d = kde(&v, None, DEFAULT_GRID_SIZE, None).unwrap();
        c.require(d.grid.len() == DEFAULT_GRID_SIZE && d.grid.windows(2).all(|w| w[0] < w[1]), || {
            format!("input {used}: grid not strictly increasing")
        });
        c.require(d.density.iter().all(|&x| x >= 0.0), || format!("input {used}: negative density"));
        let integral = trapezoid(&d.grid, &d.density);
        worst_int = worst_int.max((integral - 1.0).abs());
        c.require((integral - 1.0).abs() <= INTEGRAL_TOL, || format!("input {used}: integral {integral}"));

        let shift = on_lattice(rng.random_range(-50.0..50.0));
        let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
        debug_assert!(shifted.iter().zip(&v).all(|(s, x)| s - shift == *x));
        let ds = kde(&shifted, None, DEFAULT_GRID_SIZE, None).unwrap();
        for k in 0..DEFAULT_GRID_SIZE {
            let err = (ds.density[k] - d.density[k]).abs();
            worst_shift = worst_shift.max(err);
            c.require(err <= SHIFT_TOL, || format!("input {used}: shifted density differs by {err:.2e} at {k}"));
            let gerr = (ds.grid[k] - (d.grid[k] + shift)).abs();
            c.require(gerr <= 1e-9 * (1.0 + d.grid[k].abs()), || format!("input {used}: grid not shifted at {k}"));
        }
        // not gated: an arbitrary shift rounds the inputs before the estimator sees them
        let draw = kde(&raw, None, DEFAULT_GRID_SIZE, None).unwrap();
        let loose = rng.random_range(-50.0..50.0);
        let moved: Vec<f64> = raw.iter().map(|x| x + loose).collect();
        let dm = kde(&moved, None, DEFAULT_GRID_SIZE, None).unwrap();
        let diff = dm.density.iter().zip(&draw.density).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_rounded = worst_rounded.max(diff);

        let s = [-3.0, 0.5, 2.0, 7.5][rng.random_range(0..4)];
        let scaled: Vec<f64> = v.iter().map(|x| x * s).collect();
        let dsc = kde(&scaled, None, DEFAULT_GRID_SIZE, None).unwrap();
        for k in 0..DEFAULT_GRID_SIZE {
            let j = if s > 0.0 { k } else { DEFAULT_GRID_SIZE - 1 - k };
            let err = (dsc.density[j] - d.density[k] / s.abs()).abs();
            worst_scale = worst_scale.max(err);
            c.require(err <= SCALE_TOL, || format!("input {used}: scaled density differs by {err:.2e} at {k}"));
        }
    }
    c.note(format!("{INPUTS} inputs (normal, uniform, exponential, rounded mixture; n < 2000) on a 2^-24 lattice"));
    c.note(format!("worst |integral - 1| = {worst_int:.2e} (limit {INTEGRAL_TOL:.0e})"));
    c.note(format!("worst shift difference {worst_shift:.2e} (limit {SHIFT_TOL:.0e}); worst scale difference {worst_scale:.2e} (limit {SCALE_TOL:.0e})"));
    c.note(format!("not gated: arbitrary shifts, which round x + c, differ by up to {worst_rounded:.2e}"));
    c.done()
}
