//! The Bernstein mass matrix: exact rational construction, its block
//! recurrence, its closed-form spectrum, a matrix-free fast apply, and a
//! conjugate gradient solver.
//!
//! Over the unit right `d`-simplex the mass entries have the closed form
//!
//! ```text
//! M^{d,m,n}_{αβ} = ∫ B^m_α B^n_β = m! n! (α+β)! / ((m+n+d)! α! β!),
//! ```
//!
//! which this module evaluates exactly as rationals. Grouping rows by the
//! leading index `a = α_0` and columns by `b = β_0` reveals the recurrence
//! that the direct solvers in [`crate::mass_solve`] exploit: block `(a, b)`
//! of `M^{d,m,n}` equals `ν_{ab} · M^{d-1, m-a, n-b}` with the scalar
//! coefficients of [`NuTable`]. The eigenvalues are known in closed form as
//! well ([`eigenvalue`]), with multiplicities counting multi-indices by
//! total degree, so conditioning is computable without any linear algebra.
//!
//! [`FastMassOperator`] applies the mass matrix without forming it, by one
//! sum-factored grid evaluation and one moment transform at `n + 1` points
//! per direction — exact for degree `2n` integrands, `O(n^{d+1})`
//! operations, `O(n^d)` memory.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::linalg::{norm_2, Matrix};
use crate::multiindex::{binom_mi, binomial, dim, enumerate, MultiIndex};
use crate::stroud::{
    eval_with_tables_counted, moments_with_tables_counted, EvalTables, StroudRule,
};
use crate::Rational;

fn big_factorial(k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= i;
    }
    acc
}

/// Exact mass entry `∫ B^m_α B^n_β` over the unit right simplex, reduced to
/// a single integer ratio `C(α+β, α) / (C(m+n, n) · Π_{k=1}^{d} (m+n+k))`
/// so every factor fits machine integers through degree 30.
pub fn entry(alpha: &MultiIndex, beta: &MultiIndex) -> Rational {
    assert_eq!(alpha.dim(), beta.dim(), "dimension mismatch");
    let d = alpha.dim();
    let m = alpha.order();
    let n = beta.order();
    let num = binom_mi(&alpha.add(beta), alpha);
    let mut den = binomial((m + n) as u64, n as u64);
    for k in 1..=d {
        den = den
            .checked_mul((m + n + k) as u128)
            .expect("mass entry denominator overflows u128");
    }
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// A dense matrix of exact rationals, used for the structural API where
/// floating point would hide the algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                *m.get_mut(i, j) = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }

    pub fn matvec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for j in 0..self.cols {
                    acc += self.get(i, j) * &x[j];
                }
                acc
            })
            .collect()
    }

    pub fn to_f64(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).to_f64().expect("rational out of f64 range")
        })
    }
}

/// The exact mixed-degree mass matrix `M^{d,m,n}`, rows indexed by the
/// degree-`m` basis and columns by the degree-`n` basis, both in canonical
/// order.
pub fn mixed_mass(d: usize, m: usize, n: usize) -> RatMatrix {
    let rows = enumerate(d, m);
    let cols = enumerate(d, n);
    RatMatrix::from_fn(rows.len(), cols.len(), |i, j| entry(&rows[i], &cols[j]))
}

/// The exact degree-`n` mass matrix `M^{d,n}`.
pub fn mass_matrix(d: usize, n: usize) -> RatMatrix {
    mixed_mass(d, n, n)
}

/// The degree-`n` mass matrix rounded to `f64`.
pub fn mass_matrix_f64(d: usize, n: usize) -> Matrix {
    mass_matrix(d, n).to_f64()
}

/// Scalar coefficients of the mass block recurrence: block `(a, b)` of
/// `M^{d,m,n}` (rows with `α_0 = a`, columns with `β_0 = b`) equals
/// `ν_{ab} · M^{d-1, m-a, n-b}`, with
///
/// ```text
/// ν_{ab} = C(m,a) C(n,b) / (C(m+n+d-1, a+b) · (m+n+d))
///        = ∫₀¹ B^m_a(t) B^n_b(t) (1-t)^{d-1} dt,
/// ```
///
/// a weighted univariate Bernstein Gram matrix — symmetric positive
/// definite when `m = n`, which is what makes the blockwise factorization
/// in [`crate::mass_solve`] run to completion.
#[derive(Clone, Debug)]
pub struct NuTable {
    d: usize,
    m: usize,
    n: usize,
    values: Vec<Rational>,
}

impl NuTable {
    pub fn new(d: usize, m: usize, n: usize) -> Self {
        assert!(d >= 1, "the block recurrence needs dimension at least 1");
        let mut values = Vec::with_capacity((m + 1) * (n + 1));
        for a in 0..=m {
            for b in 0..=n {
                let num = binomial(m as u64, a as u64)
                    .checked_mul(binomial(n as u64, b as u64))
                    .expect("nu numerator overflows u128");
                let den = binomial((m + n + d - 1) as u64, (a + b) as u64)
                    .checked_mul((m + n + d) as u128)
                    .expect("nu denominator overflows u128");
                values.push(Rational::new(BigInt::from(num), BigInt::from(den)));
            }
        }
        Self { d, m, n, values }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row_degree(&self) -> usize {
        self.m
    }

    pub fn col_degree(&self) -> usize {
        self.n
    }

    pub fn value(&self, a: usize, b: usize) -> &Rational {
        &self.values[a * (self.n + 1) + b]
    }

    /// The `(m+1) × (n+1)` coefficient matrix as exact rationals.
    pub fn as_matrix(&self) -> RatMatrix {
        RatMatrix::from_fn(self.m + 1, self.n + 1, |a, b| self.value(a, b).clone())
    }
}

/// Exact eigenvalue `λ_{i,n} = (n!)² / ((n+i+d)! (n-i)!)` of `M^{d,n}`,
/// for `0 ≤ i ≤ n`; `i = 0` gives the largest, `i = n` the smallest.
pub fn eigenvalue(d: usize, n: usize, i: usize) -> Rational {
    assert!(i <= n, "eigenvalue index out of range");
    let num = big_factorial(n) * big_factorial(n);
    let den = big_factorial(n + i + d) * big_factorial(n - i);
    Rational::new(num, den)
}

/// Multiplicity of `λ_{i,n}`: the number of degree-`i` multi-indices in
/// `d` variables, `C(d+i-1, d-1)`.
pub fn eigenvalue_multiplicity(d: usize, i: usize) -> usize {
    binomial((d + i - 1).max(0) as u64, (d - 1) as u64) as usize
}

/// The full spectrum of `M^{d,n}` as `(eigenvalue, multiplicity)` pairs in
/// decreasing eigenvalue order; multiplicities sum to `dim(d, n)`.
pub fn spectrum(d: usize, n: usize) -> Vec<(Rational, usize)> {
    (0..=n)
        .map(|i| (eigenvalue(d, n, i), eigenvalue_multiplicity(d, i)))
        .collect()
}

/// Exact 2-norm condition number `λ_max / λ_min = C(2n+d, n)`.
pub fn condition_number(d: usize, n: usize) -> Rational {
    Rational::new(
        BigInt::from(binomial((2 * n + d) as u64, n as u64)),
        BigInt::one(),
    )
}

/// [`condition_number`] rounded to the nearest float.
pub fn condition_number_f64(d: usize, n: usize) -> f64 {
    condition_number(d, n).to_f64().unwrap_or(f64::INFINITY)
}

/// Matrix-free mass apply: one grid evaluation and one moment transform on
/// an `(n+1)`-point-per-direction Stroud rule, exact for the degree-`2n`
/// products it integrates. Build once per `(d, n)` and reuse; construction
/// tabulates the univariate values, apply is `O(n^{d+1})` multiply-adds.
#[derive(Clone, Debug)]
pub struct FastMassOperator {
    d: usize,
    n: usize,
    tables: EvalTables,
}

impl FastMassOperator {
    pub fn new(d: usize, n: usize) -> Self {
        let rule = StroudRule::new(d, n + 1);
        let tables = EvalTables::new(&rule, n);
        Self { d, n, tables }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Length of the coefficient vectors this operator acts on.
    pub fn len(&self) -> usize {
        dim(self.d, self.n)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `y = M^{d,n} x` without forming the matrix.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut madds = 0;
        self.apply_counted(x, &mut madds)
    }

    /// [`FastMassOperator::apply`], adding one to `madds` per multiply-add.
    pub fn apply_counted(&self, x: &[f64], madds: &mut u64) -> Vec<f64> {
        let grid = eval_with_tables_counted(&self.tables, self.n, x, madds);
        moments_with_tables_counted(&self.tables, self.n, &grid, madds)
    }
}

/// One-shot [`FastMassOperator`] apply, for callers that do not reuse the
/// tables.
pub fn apply_fast(d: usize, n: usize, x: &[f64]) -> Vec<f64> {
    FastMassOperator::new(d, n).apply(x)
}

/// Outcome of a conjugate gradient solve.
#[derive(Clone, Debug)]
pub struct CgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖r‖₂ / ‖b‖₂` from the recurrence residual at exit.
    pub rel_residual: f64,
    pub converged: bool,
}

/// Conjugate gradients for a symmetric positive definite operator given as
/// a closure, starting from zero, stopping when the recurrence residual
/// satisfies `‖r‖₂ ≤ tol · ‖b‖₂`.
pub fn cg_solve(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> CgResult {
    let nb = norm_2(b);
    let mut x = vec![0.0; b.len()];
    if nb == 0.0 {
        return CgResult {
            x,
            iterations: 0,
            rel_residual: 0.0,
            converged: true,
        };
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    if libm::sqrt(rs) <= tol * nb {
        return CgResult {
            x,
            iterations: 0,
            rel_residual: libm::sqrt(rs) / nb,
            converged: true,
        };
    }
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, c)| a * c).sum();
        let alpha = rs / pap;
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * pi;
        }
        for (ri, api) in r.iter_mut().zip(&ap) {
            *ri -= alpha * api;
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        if libm::sqrt(rs_new) <= tol * nb {
            return CgResult {
                x,
                iterations: it,
                rel_residual: libm::sqrt(rs_new) / nb,
                converged: true,
            };
        }
        let beta = rs_new / rs;
        rs = rs_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    let rel = libm::sqrt(rs) / nb;
    CgResult {
        x,
        iterations: max_iter,
        rel_residual: rel,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rel_err_inf;
    use crate::rational;

    fn mi(entries: &[usize]) -> MultiIndex {
        MultiIndex::new(entries.to_vec())
    }

    #[test]
    fn entry_examples_on_segment_and_triangle() {
        // Segment, degree 1: M = [[1/3, 1/6], [1/6, 1/3]].
        assert_eq!(entry(&mi(&[1, 0]), &mi(&[1, 0])), rational(1, 3));
        assert_eq!(entry(&mi(&[1, 0]), &mi(&[0, 1])), rational(1, 6));
        // Triangle, degree 1: diagonal 1/12, off-diagonal 1/24.
        assert_eq!(entry(&mi(&[0, 0, 1]), &mi(&[0, 0, 1])), rational(1, 12));
        assert_eq!(entry(&mi(&[0, 0, 1]), &mi(&[0, 1, 0])), rational(1, 24));
        // Mixed degrees: ∫ B¹_{(1,0)} B²_{(2,0)} = ∫₀¹ t³ dt = 1/4.
        assert_eq!(entry(&mi(&[1, 0]), &mi(&[2, 0])), rational(1, 4));
    }

    #[test]
    fn mass_is_symmetric_with_correct_row_sums() {
        for d in 1..=3 {
            for m in 0..=3 {
                for n in 0..=3 {
                    let mm = mixed_mass(d, m, n);
                    // Row sums: ∫ B^m_α · 1 = m!/(m+d)!.
                    let want = Rational::new(big_factorial(m), big_factorial(m + d));
                    for i in 0..mm.rows() {
                        let mut sum = Rational::zero();
                        for j in 0..mm.cols() {
                            sum += mm.get(i, j);
                        }
                        assert_eq!(sum, want, "d={d} m={m} n={n} row {i}");
                    }
                    if m == n {
                        for i in 0..mm.rows() {
                            for j in 0..mm.cols() {
                                assert_eq!(mm.get(i, j), mm.get(j, i));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn nu_block_recurrence_reconstructs_the_mass_matrix() {
        // Block (a, b) of M^{d,m,n} must equal ν_ab · M^{d-1, m-a, n-b}.
        for d in 1..=3 {
            let (m, n) = (3, 2);
            let full = mixed_mass(d, m, n);
            let nu = NuTable::new(d, m, n);
            for a in 0..=m {
                for b in 0..=n {
                    let row_off = crate::multiindex::block_offset(d, m, a);
                    let col_off = crate::multiindex::block_offset(d, n, b);
                    let sub = if d >= 2 {
                        mixed_mass(d - 1, m - a, n - b)
                    } else {
                        RatMatrix::from_fn(1, 1, |_, _| Rational::one())
                    };
                    for i in 0..sub.rows() {
                        for j in 0..sub.cols() {
                            let want = nu.value(a, b) * sub.get(i, j);
                            assert_eq!(
                                full.get(row_off + i, col_off + j),
                                &want,
                                "d={d} block ({a},{b}) entry ({i},{j})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn nu_values_match_weighted_univariate_grams() {
        // ν_ab = ∫₀¹ B^m_a B^n_b (1-t)^{d-1} dt, checked by quadrature.
        use crate::stroud::gauss_jacobi;
        for d in 1..=3 {
            for (m, n) in [(1, 1), (2, 1), (3, 3)] {
                let nu = NuTable::new(d, m, n);
                let rule = gauss_jacobi(m + n + 2, d - 1);
                for a in 0..=m {
                    for b in 0..=n {
                        let got: f64 = rule
                            .nodes()
                            .iter()
                            .zip(rule.weights())
                            .map(|(&t, &w)| {
                                let ba = binomial(m as u64, a as u64) as f64
                                    * t.powi(a as i32)
                                    * (1.0 - t).powi((m - a) as i32);
                                let bb = binomial(n as u64, b as u64) as f64
                                    * t.powi(b as i32)
                                    * (1.0 - t).powi((n - b) as i32);
                                w * ba * bb
                            })
                            .sum();
                        let want = nu.value(a, b).to_f64().unwrap();
                        assert!(
                            (got - want).abs() < 1e-15,
                            "d={d} m={m} n={n} ({a},{b}): {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn nu_examples() {
        let nu = NuTable::new(1, 2, 1);
        assert_eq!(nu.value(0, 0), &rational(1, 4));
        assert_eq!(nu.value(0, 1), &rational(1, 12));
    }

    #[test]
    fn fast_apply_matches_the_dense_matrix() {
        for d in 1..=3 {
            for n in 1..=6 {
                let dense = mass_matrix_f64(d, n);
                let op = FastMassOperator::new(d, n);
                let x: Vec<f64> = (0..dim(d, n))
                    .map(|i| ((i * i + 3 * d + n) as f64 * 0.29).sin())
                    .collect();
                let want = dense.matvec(&x);
                let got = op.apply(&x);
                assert!(
                    rel_err_inf(&got, &want) < 1e-12,
                    "d={d} n={n}: {:?}",
                    rel_err_inf(&got, &want)
                );
            }
        }
    }

    #[test]
    fn apply_to_ones_gives_row_sums() {
        let d = 2;
        let n = 4;
        let got = apply_fast(d, n, &vec![1.0; dim(d, n)]);
        let want = Rational::new(big_factorial(n), big_factorial(n + d))
            .to_f64()
            .unwrap();
        for v in &got {
            assert!((v - want).abs() < 1e-15);
        }
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalue(1, 1, 0), rational(1, 2));
        assert_eq!(eigenvalue(1, 1, 1), rational(1, 6));
        assert_eq!(eigenvalue(2, 1, 0), rational(1, 6));
        assert_eq!(eigenvalue(2, 1, 1), rational(1, 24));
        assert_eq!(eigenvalue_multiplicity(2, 1), 2);
        // λ_0 is always n!/(n+d)!.
        for d in 1..=3 {
            for n in 0..=6 {
                assert_eq!(
                    eigenvalue(d, n, 0),
                    Rational::new(big_factorial(n), big_factorial(n + d))
                );
            }
        }
    }

    #[test]
    fn spectrum_multiplicities_fill_the_space() {
        for d in 1..=3 {
            for n in 0..=8 {
                let total: usize = spectrum(d, n).iter().map(|(_, m)| m).sum();
                assert_eq!(total, dim(d, n));
                // Eigenvalues strictly decrease in i.
                let s = spectrum(d, n);
                for w in s.windows(2) {
                    assert!(w[0].0 > w[1].0);
                }
            }
        }
    }

    #[test]
    fn condition_number_is_a_central_binomial() {
        assert_eq!(condition_number(2, 10), rational(646_646, 1));
        for d in 1..=3 {
            for n in 0..=10 {
                let want = eigenvalue(d, n, 0) / eigenvalue(d, n, n);
                assert_eq!(condition_number(d, n), want);
            }
        }
    }

    #[test]
    fn cg_solves_a_mass_system() {
        let d = 2;
        let n = 3;
        let op = FastMassOperator::new(d, n);
        let b: Vec<f64> = (0..dim(d, n)).map(|i| (i as f64 * 0.83).cos()).collect();
        let res = cg_solve(|v| op.apply(v), &b, 1e-12, 200);
        assert!(res.converged, "rel residual {}", res.rel_residual);
        // True residual check against the operator.
        let r: Vec<f64> = op
            .apply(&res.x)
            .iter()
            .zip(&b)
            .map(|(a, c)| a - c)
            .collect();
        assert!(norm_2(&r) <= 1e-11 * norm_2(&b));
    }

    #[test]
    fn cg_handles_edge_cases() {
        // Identity: converges in one iteration.
        let b = vec![1.0, -2.0, 3.0];
        let res = cg_solve(|v| v.to_vec(), &b, 1e-14, 10);
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert!(rel_err_inf(&res.x, &b) < 1e-15);
        // Zero right-hand side: returns zero immediately.
        let res = cg_solve(|v| v.to_vec(), &[0.0, 0.0], 1e-14, 10);
        assert!(res.converged);
        assert_eq!(res.iterations, 0);
        assert_eq!(res.x, vec![0.0, 0.0]);
    }
}
