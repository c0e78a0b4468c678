//! Householder QR with rank-revealing column moves.
//!
//! Columns are processed left to right. A column whose remaining norm falls
//! to `n * eps * max_j ||x_j||` or below is declared aliased and moved past
//! the accepted ones, so the surviving columns keep their original order and
//! the later member of a collinear set is the one dropped.

/// Compact QR factorization of a tall matrix.
#[derive(Debug, Clone)]
pub struct Qr {
    nrows: usize,
    /// Householder vectors, one per accepted column, on rows `j..n`.
    reflectors: Vec<Vec<f64>>,
    /// `2 / ||v||^2` per reflector, zero for the identity.
    betas: Vec<f64>,
    /// Upper-triangular factor, column `j` holds `R[0..=j, j]`.
    r: Vec<Vec<f64>>,
    /// Original indices of accepted columns, in factor order.
    accepted: Vec<usize>,
    /// Original indices of aliased columns.
    aliased: Vec<usize>,
    tolerance: f64,
}

fn norm(v: &[f64]) -> f64 {
    // scaled to avoid overflow on large counts
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let inv = 1.0 / scale;
    scale * v.iter().map(|x| (x * inv).powi(2)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Qr {
    /// Factorizes the matrix given as columns of equal length.
    pub fn new(columns: &[Vec<f64>]) -> Self {
        let nrows = columns.first().map_or(0, Vec::len);
        let scale = columns.iter().map(|c| norm(c)).fold(0.0, f64::max);
        let tolerance = nrows as f64 * f64::EPSILON * scale;

        let mut work: Vec<Vec<f64>> = columns.to_vec();
        let mut reflectors: Vec<Vec<f64>> = Vec::new();
        let mut betas = Vec::new();
        let mut r: Vec<Vec<f64>> = Vec::new();
        let mut accepted = Vec::new();
        let mut aliased = Vec::new();

        for j in 0..work.len() {
            let step = accepted.len();
            if step >= nrows {
                aliased.push(j);
                continue;
            }
            let tail_norm = norm(&work[j][step..]);
            if tail_norm <= tolerance {
                aliased.push(j);
                continue;
            }
            // v = x - alpha e1, alpha = -sign(x0) ||x||
            let x0 = work[j][step];
            let alpha = if x0 >= 0.0 { -tail_norm } else { tail_norm };
            // the column's storage becomes its reflector
            let mut v = std::mem::take(&mut work[j]);
            let mut rcol: Vec<f64> = v.drain(..step).collect();
            rcol.push(alpha);
            r.push(rcol);
            v[0] -= alpha;
            let vnorm2 = dot(&v, &v);
            let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };

            if beta > 0.0 {
                for col in work.iter_mut().skip(j + 1) {
                    let tail = &mut col[step..];
                    let s = beta * dot(&v, tail);
                    if s != 0.0 {
                        for (t, vi) in tail.iter_mut().zip(&v) {
                            *t -= s * vi;
                        }
                    }
                }
            }
            reflectors.push(v);
            betas.push(beta);
            accepted.push(j);
        }

        Self { nrows, reflectors, betas, r, accepted, aliased, tolerance }
    }

    pub fn rank(&self) -> usize {
        self.accepted.len()
    }

    pub fn accepted(&self) -> &[usize] {
        &self.accepted
    }

    pub fn aliased(&self) -> &[usize] {
        &self.aliased
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `R[i, j]` for the accepted columns in factor order.
    pub fn r(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.r[j][i]
        } else {
            0.0
        }
    }

    /// `Q^T y`.
    pub fn qt_mul(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows);
        let mut out = y.to_vec();
        for (step, (v, &beta)) in self.reflectors.iter().zip(&self.betas).enumerate() {
            if beta == 0.0 {
                continue;
            }
            let tail = &mut out[step..];
            let s = beta * dot(v, tail);
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
        out
    }

    /// Least-squares coefficients for the accepted columns, in factor order.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let qty = self.qt_mul(y);
        let k = self.rank();
        let mut b = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = qty[i];
            for (j, bj) in b.iter().enumerate().skip(i + 1) {
                s -= self.r(i, j) * bj;
            }
            b[i] = s / self.r(i, i);
        }
        b
    }

    /// `R^{-1}` as a dense upper-triangular `rank x rank` matrix (row-major).
    pub fn r_inverse(&self) -> Vec<Vec<f64>> {
        let k = self.rank();
        let mut inv = vec![vec![0.0; k]; k];
        for col in 0..k {
            // solve R x = e_col
            for i in (0..=col).rev() {
                let mut s = if i == col { 1.0 } else { 0.0 };
                for (j, row) in inv.iter().enumerate().take(col + 1).skip(i + 1) {
                    s -= self.r(i, j) * row[col];
                }
                inv[i][col] = s / self.r(i, i);
            }
        }
        inv
    }

    /// Unscaled covariance `(R^T R)^{-1} = R^{-1} R^{-T}` in factor order.
    pub fn unscaled_covariance(&self) -> Vec<Vec<f64>> {
        let inv = self.r_inverse();
        let k = self.rank();
        let mut cov = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i..k {
                let s: f64 = (j..k).map(|m| inv[i][m] * inv[j][m]).sum();
                cov[i][j] = s;
                cov[j][i] = s;
            }
        }
        cov
    }
}
