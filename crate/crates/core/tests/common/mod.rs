//! Shared oracles for the integration suites: a relatively accurate
//! symmetric eigensolver, exact rational elevation matrices built from
//! first principles, and exact monomial integrals over the reference
//! simplex. Everything here is deliberately independent of the library's
//! fast paths so the two routes can check each other.
#![allow(dead_code)]

use berndg_core::linalg::Matrix;
use berndg_core::mass::RatMatrix;
use berndg_core::multiindex::{dim, enumerate, rank, MultiIndex};
use berndg_core::Rational;
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// descending. Jacobi's method computes the small eigenvalues of SPD
/// matrices to high *relative* accuracy, which the spectrum checks need —
/// the mass matrices have eigenvalue ratios beyond 1e10.
pub fn jacobi_eigenvalues(mat: &Matrix) -> Vec<f64> {
    let n = mat.rows();
    assert_eq!(n, mat.cols());
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| mat.get(i, j)).collect())
        .collect();
    let tol = 1e-15;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= tol * (a[p][p].abs() * a[q][q].abs()).sqrt() {
                    continue;
                }
                rotated = true;
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eigs
}

pub fn big_int(v: u64) -> BigInt {
    BigInt::from(v)
}

pub fn rat_int(v: i64) -> Rational {
    Rational::new(BigInt::from(v), BigInt::one())
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n as u64).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Exact `∫_S b^ε dx` over the unit reference simplex: `ε! / (|ε| + d)!`
/// with `ε! = Π εᵢ!` (the Dirichlet integral).
pub fn monomial_integral(eps: &[usize]) -> Rational {
    let d = eps.len() - 1;
    let order: usize = eps.iter().sum();
    let num = eps.iter().map(|&e| factorial(e)).fold(BigInt::one(), |a, b| a * b);
    Rational::new(num, factorial(order + d))
}

/// Exact mass entry by symbolic integration: `(m!/α!)(n!/β!) ∫ b^{α+β}`,
/// fully independent of the library's closed form.
pub fn mass_entry_by_integration(alpha: &MultiIndex, beta: &MultiIndex) -> Rational {
    let scale = |mi: &MultiIndex| {
        let num = factorial(mi.order());
        let den = mi
            .entries()
            .iter()
            .map(|&e| factorial(e))
            .fold(BigInt::one(), |a, b| a * b);
        Rational::new(num, den)
    };
    let combined: Vec<usize> = alpha
        .entries()
        .iter()
        .zip(beta.entries())
        .map(|(a, b)| a + b)
        .collect();
    scale(alpha) * scale(beta) * monomial_integral(&combined)
}

pub fn rat_matmul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    assert_eq!(a.cols(), b.rows());
    RatMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        let mut s = Rational::zero();
        for k in 0..a.cols() {
            s += a.get(i, k) * b.get(k, j);
        }
        s
    })
}

pub fn rat_transpose(a: &RatMatrix) -> RatMatrix {
    RatMatrix::from_fn(a.cols(), a.rows(), |i, j| a.get(j, i).clone())
}

pub fn rat_eq(a: &RatMatrix, b: &RatMatrix) -> bool {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return false;
    }
    (0..a.rows()).all(|i| (0..a.cols()).all(|j| a.get(i, j) == b.get(i, j)))
}

/// Exact one-step elevation matrix taking degree `m - 1` coefficients to
/// degree `m` in dimension `d`: column `α` scatters weight `(αᵢ + 1)/m`
/// to row `α + eᵢ`. Built from the recurrence directly, not from the
/// library's elevation plan.
pub fn rat_elevation_step(d: usize, m: usize) -> RatMatrix {
    assert!(m >= 1);
    let mut out = RatMatrix::zeros(dim(d, m), dim(d, m - 1));
    for (col, alpha) in enumerate(d, m - 1).iter().enumerate() {
        for i in 0..=d {
            let dst = alpha.add_unit(i);
            let w = Rational::new(big_int(alpha.entry(i) as u64 + 1), big_int(m as u64));
            *out.get_mut(rank(&dst), col) += w;
        }
    }
    out
}

/// Exact multi-step elevation from degree `m` to degree `n ≥ m`.
pub fn rat_elevation(d: usize, m: usize, n: usize) -> RatMatrix {
    assert!(n >= m);
    let mut acc = RatMatrix::from_fn(dim(d, m), dim(d, m), |i, j| {
        if i == j {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    for k in m + 1..=n {
        acc = rat_matmul(&rat_elevation_step(d, k), &acc);
    }
    acc
}

/// Deterministic test vectors in [-1, 1], decorrelated by a multiplicative
/// hash — no RNG dependency needed in the core integration suites.
pub fn pseudo(len: usize, seed: u64) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let mut x = (i as u64 + 1).wrapping_mul(0x9e3779b97f4a7c15) ^ seed.wrapping_mul(0xd1342543de82ef95);
            x ^= x >> 29;
            x = x.wrapping_mul(0xff51afd7ed558ccd);
            x ^= x >> 32;
            (x as f64 / u64::MAX as f64) * 2.0 - 1.0
        })
        .collect()
}

/// Least-squares slope of `y` against `x`.
pub fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
