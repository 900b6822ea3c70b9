//! Shared test support: an independent enumeration oracle for check-loss
//! minimization, simple data generators, and fixture paths.
//!
//! The oracle deliberately re-implements everything it needs (subset
//! enumeration, Gaussian elimination, loss evaluation) so that agreement
//! with the library is evidence, not circularity.

#![allow(dead_code)]

use std::path::PathBuf;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Check loss, written out longhand.
pub fn oracle_check_loss(z: f64, q: f64) -> f64 {
    if z < 0.0 {
        (q - 1.0) * z
    } else {
        q * z
    }
}

fn oracle_objective(cols: &[Vec<f64>], y: &[f64], beta: &[f64], q: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..y.len() {
        let mut fit = 0.0;
        for (j, col) in cols.iter().enumerate() {
            fit += col[i] * beta[j];
        }
        total += oracle_check_loss(y[i] - fit, q);
    }
    total
}

/// Plain Gaussian elimination with partial pivoting; `None` when singular.
fn oracle_solve(matrix: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let p = rhs.len();
    let scale = matrix
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    for col in 0..p {
        let piv = (col..p).max_by(|&a, &b| {
            matrix[a][col]
                .abs()
                .partial_cmp(&matrix[b][col].abs())
                .unwrap()
        })?;
        if matrix[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        matrix.swap(col, piv);
        rhs.swap(col, piv);
        for row in (col + 1)..p {
            let f = matrix[row][col] / matrix[col][col];
            let (top, bottom) = matrix.split_at_mut(row);
            for (c, cell) in bottom[0].iter_mut().enumerate().skip(col) {
                *cell -= f * top[col][c];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let mut v = rhs[i];
        for c in (i + 1)..p {
            v -= matrix[i][c] * x[c];
        }
        x[i] = v / matrix[i][i];
    }
    Some(x)
}

pub struct OracleBest {
    pub objective: f64,
    pub basis: Vec<usize>,
    pub coefficients: Vec<f64>,
}

/// Brute force over all p-subsets of observations in lexicographic order:
/// solve the exact fit, evaluate the total check loss, keep the minimum
/// (first subset on ties).
pub fn enumerate_best(cols: &[Vec<f64>], y: &[f64], q: f64) -> OracleBest {
    let n = y.len();
    let p = cols.len();
    assert!(n > p && p >= 1);
    let mut subset: Vec<usize> = (0..p).collect();
    let mut best: Option<OracleBest> = None;
    loop {
        let mut matrix: Vec<Vec<f64>> = subset
            .iter()
            .map(|&i| cols.iter().map(|c| c[i]).collect())
            .collect();
        let mut rhs: Vec<f64> = subset.iter().map(|&i| y[i]).collect();
        if let Some(beta) = oracle_solve(&mut matrix, &mut rhs) {
            let obj = oracle_objective(cols, y, &beta, q);
            let better = match &best {
                None => true,
                Some(b) => obj < b.objective - 1e-12 * (1.0 + b.objective.abs()),
            };
            if better {
                best = Some(OracleBest {
                    objective: obj,
                    basis: subset.clone(),
                    coefficients: beta,
                });
            }
        }
        // next lexicographic p-subset of {0..n-1}
        let mut k = p;
        loop {
            if k == 0 {
                return best.expect("at least one nonsingular subset");
            }
            k -= 1;
            if subset[k] < n - (p - k) {
                subset[k] += 1;
                for j in (k + 1)..p {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// xorshift generator for oracle-side data, independent of the crate's RNG.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Random full-rank design with intercept, p-1 noise columns, and a
/// linear-plus-noise target.
pub fn random_frame_data(
    rng: &mut TestRng,
    n: usize,
    p: usize,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut cols = vec![vec![1.0; n]];
    for _ in 1..p {
        cols.push((0..n).map(|_| rng.normal()).collect());
    }
    let betas: Vec<f64> = (0..p).map(|_| rng.normal()).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let mut v = rng.normal() * 0.7;
            for (j, col) in cols.iter().enumerate() {
                v += betas[j] * col[i];
            }
            v
        })
        .collect();
    (cols, y)
}
