//! Small dense-matrix helpers used as test oracles. Deliberately naive and
//! independent of the library's linear algebra.
#![allow(dead_code, clippy::needless_range_loop)]

use etc_lab_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dense(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Dense {
    (0..r)
        .map(|_| (0..c).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Dense {
    let m = random_dense(rng, n, n);
    (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (m[i][j] + m[j][i])).collect())
        .collect()
}

pub fn to_matrix(d: &Dense) -> Matrix {
    Matrix::from_rows(d).unwrap()
}

pub fn to_dense(m: &Matrix) -> Dense {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn mul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            for j in 0..m {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

pub fn transpose(a: &Dense) -> Dense {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn scale(a: &Dense, s: f64) -> Dense {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn frobenius(a: &Dense) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn mat_vec(a: &Dense, v: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &Dense) -> f64 {
    let n = a.len();
    let mut m = a.clone();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    d
}

/// Solves `a x = b` by Gauss–Jordan elimination with partial pivoting.
pub fn gauss_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Dense = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut r = r.clone();
            r.push(*v);
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(p, c);
        let piv = m[c][c];
        for k in c..=n {
            m[c][k] /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    m.iter().map(|r| r[n]).collect()
}

/// Positive definiteness via leading principal minors (Sylvester).
pub fn sylvester_pd(a: &Dense) -> bool {
    (1..=a.len()).all(|k| {
        let sub: Dense = a[..k].iter().map(|r| r[..k].to_vec()).collect();
        det(&sub) > 0.0
    })
}

/// `exp(a)` by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &Dense) -> Dense {
    let n = a.len();
    let norm = frobenius(a);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.1 {
        s += 1;
    }
    let a = scale(a, 1.0 / 2f64.powi(s));
    let mut term = identity(n);
    let mut sum = identity(n);
    for k in 1..25 {
        term = scale(&mul(&term, &a), 1.0 / k as f64);
        sum = add(&sum, &term);
    }
    for _ in 0..s {
        sum = mul(&sum, &sum);
    }
    sum
}

/// Random Hurwitz matrix: a random matrix shifted left past its Frobenius norm.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize) -> Dense {
    let m = random_dense(rng, n, n);
    let shift = frobenius(&m) + 0.2;
    add(&m, &scale(&identity(n), -shift))
}
