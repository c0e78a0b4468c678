use std::f64::consts::PI;

use sisx_core::special::{f_cdf, normal_cdf, normal_quantile, student_t_cdf};

use crate::{Check, Outcome};

const CDF_TOL: f64 = 1e-10;
const ROUND_TRIP_TOL: f64 = 1e-8;
const MAX_DF: u32 = 30;

/// `Gamma(k / 2)` from exact factorial products.
fn gamma_half(k: u32) -> f64 {
    if k.is_multiple_of(2) {
        (1..k / 2).map(f64::from).product()
    } else {
        // Gamma(m + 1/2) = sqrt(pi) (2m)! / (4^m m!) = sqrt(pi) prod_{i=1..m} (i - 1/2)
        let m = (k - 1) / 2;
        PI.sqrt() * (1..=m).map(|i| f64::from(i) - 0.5).product::<f64>()
    }
}

/// A Simpson panel with its end and midpoint values.
#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
}

impl Panel {
    fn new(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Self {
        Panel { a, b, fa: f(a), fm: f(0.5 * (a + b)), fb: f(b) }
    }

    fn simpson(&self) -> f64 {
        (self.b - self.a) / 6.0 * (self.fa + 4.0 * self.fm + self.fb)
    }

    fn halves(&self, f: &dyn Fn(f64) -> f64) -> (Panel, Panel) {
        let m = 0.5 * (self.a + self.b);
        let left = Panel { a: self.a, b: m, fa: self.fa, fm: f(0.5 * (self.a + m)), fb: self.fm };
        let right = Panel { a: m, b: self.b, fa: self.fm, fm: f(0.5 * (m + self.b)), fb: self.fb };
        (left, right)
    }
}

fn adaptive(f: &dyn Fn(f64) -> f64, panel: Panel, whole: f64, tol: f64, depth: u32) -> f64 {
    let (l, r) = panel.halves(f);
    let (left, right) = (l.simpson(), r.simpson());
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive(f, l, left, tol / 2.0, depth - 1) + adaptive(f, r, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let panel = Panel::new(f, a, b);
    adaptive(f, panel, panel.simpson(), tol, 50)
}

fn t_cdf_check(c: &mut Check) -> f64 {
    let mut worst = 0.0f64;
    for df in 1..=MAX_DF {
        let nu = f64::from(df);
        let norm = gamma_half(df + 1) / ((nu * PI).sqrt() * gamma_half(df));
        let density = move |t: f64| norm * (1.0 + t * t / nu).powf(-(nu + 1.0) / 2.0);
        // integrate outward from 0 in steps, accumulating
        let mut acc = 0.0;
        let mut prev = 0.0;
        for k in 1..=32 {
            let t = f64::from(k) * 0.25;
            acc += integrate(&density, prev, t, 1e-15);
            prev = t;
            for (x, want) in [(t, 0.5 + acc), (-t, 0.5 - acc)] {
                let got = student_t_cdf(x, nu).unwrap().get();
                let err = (got - want).abs();
                worst = worst.max(err);
                c.require(err <= CDF_TOL, || {
                    format!("t cdf df={df} t={x}: {got} vs quadrature {want} (err {err:.2e})")
                });
            }
        }
        let at0 = student_t_cdf(0.0, nu).unwrap().get();
        c.require((at0 - 0.5).abs() <= CDF_TOL, || format!("t cdf df={df} at 0: {at0}"));
    }
    worst
}

fn f_cdf_check(c: &mut Check) -> f64 {
    let mut worst = 0.0f64;
    let xs = [0.05, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    for d1 in 1..=MAX_DF {
        for d2 in 1..=MAX_DF {
            let (a, b) = (f64::from(d1), f64::from(d2));
            let beta = gamma_half(d1) * gamma_half(d2) / gamma_half(d1 + d2);
            let k = 2.0 * (a / b).powf(a / 2.0) / beta;
            // x = u^2 removes the x^(d1/2 - 1) singularity at 0
            let g = move |u: f64| k * u.powf(a - 1.0) * (1.0 + a * u * u / b).powf(-(a + b) / 2.0);
            let mut acc = 0.0;
            let mut prev = 0.0;
            for &x in &xs {
                let u = f64::sqrt(x);
                acc += integrate(&g, prev, u, 1e-15);
                prev = u;
                let got = f_cdf(x, a, b).unwrap().get();
                let err = (got - acc).abs();
                worst = worst.max(err);
                c.require(err <= CDF_TOL, || {
                    format!("F cdf ({d1},{d2}) x={x}: {got} vs quadrature {acc} (err {err:.2e})")
                });
            }
        }
    }
    worst
}

fn normal_round_trip(c: &mut Check) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..=12_000 {
        let z = -6.0 + f64::from(k) * 1e-3;
        let back = normal_quantile(normal_cdf(z)).unwrap();
        let err = (back - z).abs();
        worst = worst.max(err);
        c.require(err <= ROUND_TRIP_TOL, || format!("normal round trip at z={z}: {back} (err {err:.2e})"));
    }
    worst
}

pub fn run() -> Outcome {
    let mut c = Check::default();
    let t = t_cdf_check(&mut c);
    let f = f_cdf_check(&mut c);
    let z = normal_round_trip(&mut c);
    c.note(format!(
        "t cdf vs adaptive Simpson, df 1..{MAX_DF}, |t| <= 8: worst abs error {t:.2e} (limit {CDF_TOL:.0e})"
    ));
    c.note(format!("F cdf vs adaptive Simpson, d1, d2 in 1..{MAX_DF}, x <= 16: worst abs error {f:.2e}"));
    c.note(format!("normal quantile round trip on [-6, 6], step 1e-3: worst {z:.2e} (limit {ROUND_TRIP_TOL:.0e})"));
    c.done()
}
