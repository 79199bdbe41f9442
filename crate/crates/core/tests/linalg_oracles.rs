mod common;

use common::*;
use etc_lab_core::linalg::{self, LinalgError};
use etc_lab_core::Matrix;
use proptest::prelude::*;

/// Roots of `det(a - λI)` on `[-r, r]` by a sign scan followed by bisection.
fn eigen_by_bisection(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let r = a
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let p = |lam: f64| {
        let m: Dense = (0..n)
            .map(|i| (0..n).map(|j| a[i][j] - if i == j { lam } else { 0.0 }).collect())
            .collect();
        det(&m)
    };
    let grid = 40_000;
    let mut roots = Vec::new();
    let mut lo = -r;
    let mut plo = p(lo);
    for k in 1..=grid {
        let hi = -r + 2.0 * r * k as f64 / grid as f64;
        let phi = p(hi);
        if plo == 0.0 {
            roots.push(lo);
        } else if plo.signum() != phi.signum() && phi != 0.0 {
            let (mut a_, mut b_, mut fa) = (lo, hi, plo);
            for _ in 0..200 {
                let mid = 0.5 * (a_ + b_);
                let fm = p(mid);
                if fm == 0.0 {
                    a_ = mid;
                    b_ = mid;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a_ = mid;
                    fa = fm;
                } else {
                    b_ = mid;
                }
                if b_ - a_ < 1e-14 {
                    break;
                }
            }
            roots.push(0.5 * (a_ + b_));
        }
        lo = hi;
        plo = phi;
    }
    roots
}

#[test]
fn symmetric_eigenvalues_match_characteristic_polynomial_roots() {
    let mut g = rng(11);
    for _ in 0..10 {
        let a = random_symmetric(&mut g, 5);
        let oracle = eigen_by_bisection(&a);
        assert_eq!(oracle.len(), 5, "oracle missed a root: {oracle:?}");
        let got = linalg::sym_eigenvalues(&to_matrix(&a), linalg::DEFAULT_TOL).unwrap();
        for (x, y) in got.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-9, "{got:?} vs {oracle:?}");
        }
    }
}

fn power_iteration_norm(a: &Dense) -> f64 {
    let g = mul(&transpose(a), a);
    let mut v = vec![1.0; g.len()];
    for (i, x) in v.iter_mut().enumerate() {
        *x += 0.1 * i as f64;
    }
    let mut lam = 0.0;
    for _ in 0..10_000 {
        let w = mat_vec(&g, &v);
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        lam = n / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.iter().map(|x| x / n).collect();
    }
    lam.sqrt()
}

#[test]
fn spectral_norm_matches_power_iteration() {
    let mut g = rng(12);
    for _ in 0..20 {
        let a = random_dense(&mut g, 3, 4);
        let got = linalg::spectral_norm(&to_matrix(&a));
        let want = power_iteration_norm(&a);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn spectral_norm_of_feedback_block() {
    let bk = Matrix::from_rows(&[[0.0, 0.0], [1.0, -4.0]]).unwrap();
    assert!((linalg::spectral_norm(&bk) - 4.1231).abs() < 1e-4);
    assert!((linalg::spectral_norm(&Matrix::identity(2)) - 1.0).abs() < 1e-15);
}

/// Solves `aᵀP + Pa = -q` as a full n²-unknown linear system.
fn lyapunov_kronecker(a: &Dense, q: &Dense) -> Dense {
    let n = a.len();
    let idx = |i: usize, j: usize| i * n + j;
    let mut m = vec![vec![0.0; n * n]; n * n];
    let mut rhs = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let row = idx(i, j);
            for k in 0..n {
                m[row][idx(k, j)] += a[k][i];
                m[row][idx(i, k)] += a[k][j];
            }
            rhs[row] = -q[i][j];
        }
    }
    let sol = gauss_solve(&m, &rhs);
    (0..n).map(|i| (0..n).map(|j| sol[idx(i, j)]).collect()).collect()
}

#[test]
fn lyapunov_matches_kronecker_oracle() {
    let mut g = rng(13);
    for trial in 0..20 {
        let n = 2 + trial % 4;
        let a = random_stable(&mut g, n);
        let r = random_dense(&mut g, n, n);
        let q = add(&mul(&r, &transpose(&r)), &scale(&identity(n), 0.1));
        let want = lyapunov_kronecker(&a, &q);
        let got = to_dense(&linalg::solve_lyapunov(&to_matrix(&a), &to_matrix(&q)).unwrap());
        let scale_ = frobenius(&want).max(1.0);
        for i in 0..n {
            for j in 0..n {
                assert!((got[i][j] - want[i][j]).abs() < 1e-9 * scale_, "trial {trial}");
            }
        }
        // residual of the equation itself
        let res = add(&add(&mul(&transpose(&a), &got), &mul(&got, &a)), &q);
        assert!(frobenius(&res) < 1e-9 * frobenius(&q).max(1.0));
    }
}

#[test]
fn lyapunov_on_feedback_loop_matches_oracle() {
    let a = vec![vec![0.0, 1.0], vec![-1.0, -1.0]];
    let q = identity(2);
    let want = lyapunov_kronecker(&a, &q);
    let got = to_dense(&linalg::solve_lyapunov(&to_matrix(&a), &to_matrix(&q)).unwrap());
    for i in 0..2 {
        for j in 0..2 {
            assert!((got[i][j] - want[i][j]).abs() < 1e-9);
        }
    }
}

#[test]
fn lyapunov_rejects_unstable_and_asymmetric() {
    let a = Matrix::from_rows(&[[0.0, 1.0], [-2.0, 3.0]]).unwrap();
    assert!(linalg::solve_lyapunov(&a, &Matrix::identity(2)).is_err());
    let stable = Matrix::identity(2).scale(-1.0);
    let q = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
    assert!(matches!(
        linalg::solve_lyapunov(&stable, &q),
        Err(LinalgError::NotSymmetric { .. })
    ));
}

#[test]
fn positive_definiteness_matches_leading_minors() {
    let mut g = rng(14);
    let mut seen = [0usize; 2];
    for _ in 0..200 {
        let n = 1 + (g.random_range(0..4usize));
        let s = random_symmetric(&mut g, n);
        let shift: f64 = g.random_range(-1.0..1.5);
        let a = add(&s, &scale(&identity(n), shift));
        let eig = linalg::sym_eigenvalues(&to_matrix(&a), linalg::DEFAULT_TOL).unwrap();
        if eig[0].abs() < 1e-8 {
            continue;
        }
        let want = sylvester_pd(&a);
        seen[want as usize] += 1;
        assert_eq!(linalg::is_positive_definite(&to_matrix(&a), 0.0).unwrap(), want);
    }
    assert!(seen[0] > 10 && seen[1] > 10);
}

#[test]
fn hurwitz_matches_expm_decay() {
    // stable iff exp(At) → 0; checked on the feedback example and its open loop
    let closed = vec![vec![0.0, 1.0], vec![-1.0, -1.0]];
    let open = vec![vec![0.0, 1.0], vec![-2.0, 3.0]];
    assert!(frobenius(&expm(&scale(&closed, 40.0))) < 1e-6);
    assert!(frobenius(&expm(&scale(&open, 40.0))) > 1e6);
    assert!(linalg::is_hurwitz(&to_matrix(&closed)).unwrap());
    assert!(!linalg::is_hurwitz(&to_matrix(&open)).unwrap());
}

use rand::Rng;

fn symmetric_strategy() -> impl Strategy<Value = Dense> {
    (1usize..6).prop_flat_map(|n| {
        prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| {
            (0..n)
                .map(|i| (0..n).map(|j| 0.5 * (v[i * n + j] + v[j * n + i])).collect())
                .collect()
        })
    })
}

fn rect_strategy() -> impl Strategy<Value = Dense> {
    (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0f64..10.0, r * c).prop_map(move |v| v.chunks(c).map(|row| row.to_vec()).collect())
    })
}

proptest! {
    #[test]
    fn trace_equals_eigenvalue_sum(a in symmetric_strategy()) {
        let m = to_matrix(&a);
        let eig = linalg::sym_eigenvalues(&m, linalg::DEFAULT_TOL).unwrap();
        let tr: f64 = (0..a.len()).map(|i| a[i][i]).sum();
        prop_assert!((eig.iter().sum::<f64>() - tr).abs() < 1e-9 * (1.0 + frobenius(&a)));
        prop_assert!(eig.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn spectral_norm_is_transpose_invariant(a in rect_strategy()) {
        let m = to_matrix(&a);
        let n1 = linalg::spectral_norm(&m);
        let n2 = linalg::spectral_norm(&m.transpose());
        prop_assert!((n1 - n2).abs() < 1e-9 * (1.0 + n1));
        prop_assert!(n1 <= frobenius(&a) * (1.0 + 1e-12) + 1e-12);
    }
}
