//! Special functions behind the sampling z-values and the regression p-values.
//!
//! Everything here is a pure function of its arguments. Tails are evaluated
//! directly (`*_sf`) rather than as `1 - cdf` so that very small p-values keep
//! their relative precision.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cap on continued-fraction iterations for the incomplete beta function.
pub const MAX_CF_ITERATIONS: usize = 300;

/// Values below this are reported as exact zeros with an underflow flag.
pub const UNDERFLOW_THRESHOLD: f64 = 1e-300;

/// p-values below this render as `"< 2.2e-16"`.
pub const DISPLAY_P_FLOOR: f64 = f64::EPSILON;

const CF_EPS: f64 = 1e-15;
const FPMIN: f64 = 1e-300;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("probability {value} outside [0, 1]")))
        }
    }

    /// Clamps rounding spill-over (e.g. `1 + 1e-17`) back into `[0, 1]`.
    fn clamped(value: f64) -> Self {
        Self(value.clamp(0.0, 1.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Complement `1 - p`.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// A p-value after underflow handling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub value: f64,
    pub underflow: bool,
}

impl PValue {
    pub fn new(raw: f64) -> Self {
        if raw < UNDERFLOW_THRESHOLD {
            Self { value: 0.0, underflow: true }
        } else {
            Self { value: raw.min(1.0), underflow: false }
        }
    }

    pub fn display(&self) -> String {
        format_p_value(self.value)
    }
}

/// Renders a p-value the way conventional regression summaries do.
pub fn format_p_value(p: f64) -> String {
    if p < DISPLAY_P_FLOOR {
        "< 2.2e-16".to_string()
    } else if p < 1e-4 {
        format!("{p:.2e}")
    } else {
        format!("{p:.4}")
    }
}

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    let t = x + 7.5;
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `erf(x)` by the all-positive-term series; accurate for moderate `|x|`.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term.abs() <= sum.abs() * 1e-17 {
            break;
        }
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum
}

/// `erfc(x)` for `x >= 2.5` by its continued fraction (modified Lentz).
fn erfc_cf(x: f64) -> f64 {
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..=500 {
        let a = n as f64 / 2.0;
        d = x + a * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = x + a / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 2.5 {
        erf_series(x)
    } else {
        1.0 - erfc_cf(x)
    }
}

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.5 {
        1.0 - erf_series(x)
    } else if x > 27.3 {
        0.0
    } else {
        erfc_cf(x)
    }
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Rational initial guess for the lower-tail quantile (`p <= 0.5`).
fn quantile_guess(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Inverse of [`normal_cdf`] on the open interval `(0, 1)`.
///
/// A rational approximation is polished by Halley steps against the
/// implemented CDF. The upper half is solved through the lower tail of
/// `1 - p`, which is exact in floating point for `p >= 0.5`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile needs p in (0, 1), got {p}")));
    }
    if p > 0.5 {
        return lower_quantile(1.0 - p).map(|z| -z);
    }
    lower_quantile(p)
}

fn lower_quantile(p: f64) -> Result<f64> {
    let mut z = quantile_guess(p);
    for _ in 0..8 {
        let err = normal_cdf(z) - p;
        let u = err * SQRT_2PI * (0.5 * z * z).exp();
        let step = u / (1.0 + 0.5 * z * u);
        z -= step;
        if step.abs() <= 1e-15 * z.abs().max(1.0) {
            break;
        }
    }
    if z.is_finite() {
        Ok(z)
    } else {
        Err(Error::Numeric(format!("normal quantile diverged at p = {p}")))
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let guard = |v: f64| if v.abs() < FPMIN { FPMIN } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=MAX_CF_ITERATIONS {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::Numeric(format!(
        "incomplete beta continued fraction did not converge in {MAX_CF_ITERATIONS} iterations (a = {a}, b = {b}, x = {x})"
    )))
}

/// `I_x(a, b)` given both `x` and `y = 1 - x`, so callers that know the
/// complement exactly do not lose it to cancellation.
fn inc_beta_pair(x: f64, y: f64, a: f64, b: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if y <= 0.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(ln_front.exp() * beta_cf(a, b, x)? / a)
    } else {
        Ok(1.0 - ln_front.exp() * beta_cf(b, a, y)? / b)
    }
}

fn check_shape(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<Probability> {
    check_shape("a", a)?;
    check_shape("b", b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("incomplete beta needs x in [0, 1], got {x}")));
    }
    inc_beta_pair(x, 1.0 - x, a, b).map(Probability::clamped)
}

/// Upper tail `P(T > t)` of Student's t with `df` degrees of freedom.
pub fn student_t_sf(t: f64, df: f64) -> Result<Probability> {
    check_shape("df", df)?;
    if t.is_nan() {
        return Err(Error::Domain("t is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(Probability(if t > 0.0 { 0.0 } else { 1.0 }));
    }
    let t2 = t * t;
    let denom = df + t2;
    // P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2)
    let two_tail = inc_beta_pair(df / denom, t2 / denom, 0.5 * df, 0.5)?;
    let upper = 0.5 * two_tail;
    Ok(Probability::clamped(if t >= 0.0 { upper } else { 1.0 - upper }))
}

/// Student's t CDF.
pub fn student_t_cdf(t: f64, df: f64) -> Result<Probability> {
    check_shape("df", df)?;
    if t.is_nan() {
        return Err(Error::Domain("t is NaN".into()));
    }
    student_t_sf(-t, df)
}

/// Two-sided p-value `2 * (1 - cdf(|t|))`, computed from the tail directly.
pub fn student_t_two_sided(t: f64, df: f64) -> Result<Probability> {
    let tail = student_t_sf(t.abs(), df)?;
    Ok(Probability::clamped(2.0 * tail.get()))
}

fn check_f_args(x: f64, d1: f64, d2: f64) -> Result<()> {
    check_shape("d1", d1)?;
    check_shape("d2", d2)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("F argument must be nonnegative, got {x}")));
    }
    Ok(())
}

/// Quantile of Student's t: the `t` with `student_t_cdf(t, df) = p`.
pub fn student_t_quantile(p: f64, df: f64) -> Result<f64> {
    check_shape("df", df)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("t quantile needs p in (0, 1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // solve on the upper half by symmetry; bracket then bisect
    let upper = p.max(1.0 - p);
    let target = 1.0 - upper;
    let mut lo = 0.0;
    let mut hi = normal_quantile(upper)?.max(1.0);
    while student_t_sf(hi, df)?.get() > target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numeric(format!("t quantile bracket overflow at p = {p}, df = {df}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if student_t_sf(mid, df)?.get() > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok(if p < 0.5 { -t } else { t })
}

/// CDF of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> Result<Probability> {
    check_f_args(x, d1, d2)?;
    if x.is_infinite() {
        return Ok(Probability(1.0));
    }
    let num = d1 * x;
    let denom = num + d2;
    inc_beta_pair(num / denom, d2 / denom, 0.5 * d1, 0.5 * d2).map(Probability::clamped)
}

/// Upper tail `P(F > x)`.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> Result<Probability> {
    check_f_args(x, d1, d2)?;
    if x.is_infinite() {
        return Ok(Probability(0.0));
    }
    let num = d1 * x;
    let denom = num + d2;
    inc_beta_pair(d2 / denom, num / denom, 0.5 * d2, 0.5 * d1).map(Probability::clamped)
}

/// z-value for a two-sided interval with the given coverage.
pub fn two_sided_z(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Domain(format!("confidence level must be in (0, 1), got {confidence}")));
    }
    normal_quantile((1.0 + confidence) / 2.0)
}
