//! Minimal dense linear algebra for the small SPD systems that appear as
//! solver building blocks: a row-major `f64` matrix, Cholesky factorization,
//! and operation-counted triangular solves.
//!
//! The operation counter on [`Cholesky::solve_counted`] increments once per
//! multiplication or division actually executed, so one triangular solve of
//! size `m` counts `m·(m+1)/2` operations and the forward/backward pair
//! counts exactly `m·(m+1)`.

use alloc::vec;
use alloc::vec::Vec;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from an entry function.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
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

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// `y = A·x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec shape mismatch");
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
        y
    }

    /// `y = Aᵀ·x`.
    pub fn transpose_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "matvec shape mismatch");
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += a * x[i];
            }
        }
        y
    }
}

/// Cholesky factor `A = L·Lᵀ` of an SPD matrix, stored as the lower triangle.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors an SPD matrix. Panics on a nonpositive pivot: every matrix
    /// factored in this crate is positive definite by construction, so a bad
    /// pivot signals corrupted input rather than a conditioning problem.
    pub fn new(a: &Matrix) -> Self {
        match Self::try_new(a) {
            Ok(ch) => ch,
            Err((s, i)) => {
                panic!("nonpositive Cholesky pivot {s:e} at index {i}: input is not SPD")
            }
        }
    }

    /// [`Cholesky::new`] that reports a nonpositive pivot `(value, index)`
    /// instead of panicking, for callers that drive the factorization past
    /// its numerical range on purpose.
    pub fn try_new(a: &Matrix) -> Result<Self, (f64, usize)> {
        assert_eq!(a.rows, a.cols, "Cholesky needs a square matrix");
        let m = a.rows;
        let mut l = Matrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if s <= 0.0 {
                        return Err((s, i));
                    }
                    l.set(i, j, libm::sqrt(s));
                } else {
                    l.set(i, j, s / l.get(j, j));
                }
            }
        }
        Ok(Self { l })
    }

    pub fn size(&self) -> usize {
        self.l.rows
    }

    /// Solves `A·x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut ops = 0u64;
        self.solve_counted(b, &mut ops)
    }

    /// Solves `A·x = b`, adding one to `ops` per multiplication or division.
    pub fn solve_counted(&self, b: &[f64], ops: &mut u64) -> Vec<f64> {
        let m = self.size();
        assert_eq!(b.len(), m, "solve shape mismatch");
        let mut x = b.to_vec();
        // L·z = b
        for i in 0..m {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l.get(i, k) * x[k];
                *ops += 1;
            }
            x[i] = s / self.l.get(i, i);
            *ops += 1;
        }
        // Lᵀ·x = z
        for i in (0..m).rev() {
            let mut s = x[i];
            for k in i + 1..m {
                s -= self.l.get(k, i) * x[k];
                *ops += 1;
            }
            x[i] = s / self.l.get(i, i);
            *ops += 1;
        }
        x
    }

    /// `y = A·x` recomputed from the factor (for reconstruction checks).
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let m = self.size();
        assert_eq!(x.len(), m);
        // y = L·(Lᵀ·x)
        let mut z = vec![0.0; m];
        for i in 0..m {
            for k in i..m {
                z[i] += self.l.get(k, i) * x[k];
            }
        }
        let mut y = vec![0.0; m];
        for i in 0..m {
            for k in 0..=i {
                y[i] += self.l.get(i, k) * z[k];
            }
        }
        y
    }
}

/// Max-norm of a vector.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| if libm::fabs(x) > m { libm::fabs(x) } else { m })
}

/// Euclidean norm of a vector.
pub fn norm_2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|&x| x * x).sum())
}

/// Relative max-norm error of `a` against reference `b` (zero reference
/// falls back to the absolute error).
pub fn rel_err_inf(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm_inf(b);
    if scale == 0.0 {
        norm_inf(&diff)
    } else {
        norm_inf(&diff) / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_a_small_spd_system() {
        // A = [[4, 2], [2, 3]], b = A·(1, -2).
        let a = Matrix::from_fn(2, 2, |i, j| [[4.0, 2.0], [2.0, 3.0]][i][j]);
        let chol = Cholesky::new(&a);
        let x = chol.solve(&[0.0, -4.0]);
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn counted_solve_costs_m_times_m_plus_one() {
        for m in 1..=12 {
            let a = Matrix::from_fn(m, m, |i, j| if i == j { 2.0 } else if i.abs_diff(j) == 1 { 0.5 } else { 0.0 });
            let chol = Cholesky::new(&a);
            let mut ops = 0u64;
            chol.solve_counted(&vec![1.0; m], &mut ops);
            assert_eq!(ops, (m * (m + 1)) as u64);
        }
    }

    #[test]
    #[should_panic(expected = "not SPD")]
    fn cholesky_rejects_indefinite_input() {
        let a = Matrix::from_fn(2, 2, |i, j| if i == j { if i == 0 { -1.0 } else { 1.0 } } else { 0.0 });
        Cholesky::new(&a);
    }

    #[test]
    fn matvec_matches_factor_matvec() {
        let a = Matrix::from_fn(3, 3, |i, j| if i == j { 3.0 } else { 1.0 });
        let chol = Cholesky::new(&a);
        let x = [1.0, -1.0, 2.0];
        let direct = a.matvec(&x);
        let viafactor = chol.matvec(&x);
        for (u, v) in direct.iter().zip(&viafactor) {
            assert!((u - v).abs() < 1e-14);
        }
    }
}
