//! Collapsed-coordinate (Stroud) quadrature on simplices, and the
//! sum-factored Bernstein kernels built on top of it.
//!
//! The unit `d`-simplex is mapped to the cube `[0,1]^d` by the Duffy change
//! of variables, whose Jacobian splits into the per-direction weights
//! `(1 - t_i)^{d-i}`. A tensor product of Gauss–Jacobi rules — direction `i`
//! carrying the exponent `d - i` — therefore integrates polynomials over the
//! simplex with `q` points per direction and degree `2q - 1` exactness.
//!
//! Under the same map a Bernstein basis function factors into univariate
//! Bernstein values, one factor per direction, with "ragged" degrees that
//! shrink by the leading index. [`eval_with_tables`] and
//! [`moments_with_tables`] exploit that: evaluation of a degree-`n` form on
//! the full grid, and the adjoint map from grid values to basis moments,
//! both run in `O(q^d · n)`-per-level sum-factored sweeps instead of
//! `O(q^d · n^d)` naive summation. Both kernels have `_counted` variants
//! that report exact multiply-add counts.

use alloc::vec;
use alloc::vec::Vec;

use crate::multiindex::{block_offset, dim};

/// Gauss–Jacobi quadrature on `[0,1]` with weight `(1 - t)^exponent`:
/// `Σ_k w_k f(t_k) = ∫₀¹ (1-t)^a f(t) dt` exactly for `deg f ≤ 2q - 1`.
#[derive(Clone, Debug)]
pub struct GaussJacobiRule {
    exponent: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussJacobiRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn exponent(&self) -> usize {
        self.exponent
    }

    /// Nodes in ascending order, all strictly inside `(0, 1)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Value and derivative of the Jacobi polynomial `P_q^{(a,0)}` at `x`,
/// by the three-term recurrence and the standard derivative identity.
fn jacobi_eval(q: usize, a: usize, x: f64) -> (f64, f64) {
    let af = a as f64;
    if q == 0 {
        return (1.0, 0.0);
    }
    let mut pm1 = 1.0;
    let mut p = ((af + 2.0) * x + af) / 2.0;
    for n in 2..=q {
        let nf = n as f64;
        let c = 2.0 * nf + af; // 2n + α + β
        let a1 = 2.0 * nf * (nf + af) * (c - 2.0);
        let a2 = (c - 1.0) * (c * (c - 2.0) * x + af * af);
        let a3 = 2.0 * (nf + af - 1.0) * (nf - 1.0) * c;
        let next = (a2 * p - a3 * pm1) / a1;
        pm1 = p;
        p = next;
    }
    let qf = q as f64;
    let c = 2.0 * qf + af;
    // (2q+α)(1-x²) P' = q[α - (2q+α)x] P + 2(q+α)q P_{q-1}
    let dp = (qf * (af - c * x) * p + 2.0 * (qf + af) * qf * pm1) / (c * (1.0 - x * x));
    (p, dp)
}

/// Builds the `q`-point Gauss–Jacobi rule on `[0,1]` with weight
/// `(1-t)^a`, locating the Jacobi roots by Newton iteration with
/// deflation from Chebyshev initial guesses.
pub fn gauss_jacobi(q: usize, a: usize) -> GaussJacobiRule {
    assert!(q >= 1, "quadrature needs at least one point");
    let mut roots = Vec::with_capacity(q);
    for k in 0..q {
        let mut r = -libm::cos(core::f64::consts::PI * (2.0 * k as f64 + 1.0) / (2.0 * q as f64));
        if k > 0 {
            r = 0.5 * (r + roots[k - 1]);
        }
        for _ in 0..100 {
            let (p, dp) = jacobi_eval(q, a, r);
            let defl: f64 = roots.iter().map(|&xj: &f64| 1.0 / (r - xj)).sum();
            let delta = -p / (dp - p * defl);
            r += delta;
            if libm::fabs(delta) < 1e-15 {
                break;
            }
        }
        roots.push(r);
    }
    // On [0,1] the classical weight prefactor collapses to
    // w_k = 1 / ((1 - x_k²) P_q'(x_k)²) with x_k the root on [-1,1].
    let mut nodes = Vec::with_capacity(q);
    let mut weights = Vec::with_capacity(q);
    for &x in &roots {
        let (_, dp) = jacobi_eval(q, a, x);
        nodes.push(0.5 * (1.0 + x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    GaussJacobiRule {
        exponent: a,
        nodes,
        weights,
    }
}

/// Duffy map from the cube point `t ∈ [0,1]^d` to barycentric coordinates
/// `λ ∈ R^{d+1}`: `λ_0 = t_1`, then each later direction splits the mass
/// left over by the earlier ones, `λ_i = t_{i+1} (1 - λ_0 - … - λ_{i-1})`,
/// with `λ_d` the remainder.
pub fn duffy(t: &[f64]) -> Vec<f64> {
    let d = t.len();
    let mut lambda = vec![0.0; d + 1];
    let mut rest = 1.0;
    for i in 0..d {
        lambda[i] = t[i] * rest;
        rest -= lambda[i];
    }
    lambda[d] = rest;
    lambda
}

/// Tensor-product simplex quadrature: `q` Gauss–Jacobi points per
/// direction, direction `i` (1-based) carrying the Duffy weight exponent
/// `d - i`. Grid points are stored row-major with the first direction
/// slowest. Weights sum to `1/d!`, the volume of the unit simplex.
#[derive(Clone, Debug)]
pub struct StroudRule {
    d: usize,
    q: usize,
    directions: Vec<GaussJacobiRule>,
    weights: Vec<f64>,
}

impl StroudRule {
    pub fn new(d: usize, q: usize) -> Self {
        assert!(q >= 1, "quadrature needs at least one point per direction");
        let directions: Vec<GaussJacobiRule> =
            (1..=d).map(|i| gauss_jacobi(q, d - i)).collect();
        let npts = q.pow(d as u32);
        let mut weights = vec![1.0; npts];
        for (k, w) in weights.iter_mut().enumerate() {
            let mut rest = k;
            for dir in (0..d).rev() {
                *w *= directions[dir].weights[rest % q];
                rest /= q;
            }
        }
        Self {
            d,
            q,
            directions,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Points per direction.
    pub fn points_per_direction(&self) -> usize {
        self.q
    }

    /// Total number of grid points, `q^d`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn direction(&self, i: usize) -> &GaussJacobiRule {
        &self.directions[i]
    }

    /// Cube coordinates `t` of grid point `k` (first direction slowest).
    pub fn node(&self, k: usize) -> Vec<f64> {
        let mut t = vec![0.0; self.d];
        let mut rest = k;
        for dir in (0..self.d).rev() {
            t[dir] = self.directions[dir].nodes[rest % self.q];
            rest /= self.q;
        }
        t
    }

    /// Barycentric coordinates of grid point `k` under the Duffy map.
    pub fn barycentric(&self, k: usize) -> Vec<f64> {
        duffy(&self.node(k))
    }
}

/// Precomputed univariate Bernstein values on a Stroud grid: for every
/// direction and node, the values `B^m_j(t)` for all degrees `m` up to a
/// maximum. One table serves every degree `≤ max_degree`, so a single
/// instance covers both a solution field and its lower-degree derivative
/// data.
#[derive(Clone, Debug)]
pub struct EvalTables {
    d: usize,
    q: usize,
    max_degree: usize,
    /// Per direction: `q × (max_degree+1)(max_degree+2)/2` values, node-major,
    /// degrees packed by triangular offsets.
    dirs: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[inline]
fn tri_offset(m: usize) -> usize {
    m * (m + 1) / 2
}

impl EvalTables {
    pub fn new(rule: &StroudRule, max_degree: usize) -> Self {
        let stride = tri_offset(max_degree + 1);
        let dirs = (0..rule.d)
            .map(|dir| {
                let nodes = rule.direction(dir).nodes();
                let mut table = vec![0.0; rule.q * stride];
                for (k, &t) in nodes.iter().enumerate() {
                    let row = &mut table[k * stride..(k + 1) * stride];
                    row[0] = 1.0;
                    for m in 1..=max_degree {
                        let (lo, hi) = row.split_at_mut(tri_offset(m));
                        let prev = &lo[tri_offset(m - 1)..];
                        for j in (0..=m).rev() {
                            let keep = if j <= m - 1 { (1.0 - t) * prev[j] } else { 0.0 };
                            let climb = if j >= 1 { t * prev[j - 1] } else { 0.0 };
                            hi[j] = keep + climb;
                        }
                    }
                }
                table
            })
            .collect();
        Self {
            d: rule.d,
            q: rule.q,
            max_degree,
            dirs,
            weights: rule.weights.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points_per_direction(&self) -> usize {
        self.q
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Number of grid points, `q^d`.
    pub fn grid_len(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `B^m_j` at node `k` of direction `dir`.
    #[inline]
    pub fn value(&self, dir: usize, k: usize, m: usize, j: usize) -> f64 {
        self.dirs[dir][k * tri_offset(self.max_degree + 1) + tri_offset(m) + j]
    }

    #[inline]
    fn degree_row(&self, dir: usize, k: usize, m: usize) -> &[f64] {
        let base = k * tri_offset(self.max_degree + 1) + tri_offset(m);
        &self.dirs[dir][base..base + m + 1]
    }
}

/// Evaluates a degree-`n` Bernstein form on the full Stroud grid by
/// sum factorization: peel the leading index against direction 1, recurse
/// on the tail blocks, and combine. Returns `q^d` values in grid order.
pub fn eval_with_tables(tables: &EvalTables, n: usize, coeffs: &[f64]) -> Vec<f64> {
    let mut madds = 0;
    eval_with_tables_counted(tables, n, coeffs, &mut madds)
}

/// [`eval_with_tables`], adding one to `madds` per multiply-add.
pub fn eval_with_tables_counted(
    tables: &EvalTables,
    n: usize,
    coeffs: &[f64],
    madds: &mut u64,
) -> Vec<f64> {
    assert!(n <= tables.max_degree, "tables too small for degree {n}");
    assert_eq!(coeffs.len(), dim(tables.d, n), "coefficient count mismatch");
    let mut out = vec![0.0; tables.grid_len()];
    eval_rec(tables, 0, tables.d, n, coeffs, &mut out, madds);
    out
}

fn eval_rec(
    tables: &EvalTables,
    dir: usize,
    d_rem: usize,
    n_rem: usize,
    coeffs: &[f64],
    out: &mut [f64],
    madds: &mut u64,
) {
    let q = tables.q;
    if d_rem == 0 {
        out[0] += coeffs[0];
        return;
    }
    if d_rem == 1 {
        for k in 0..q {
            let row = tables.degree_row(dir, k, n_rem);
            let mut acc = 0.0;
            for j in 0..=n_rem {
                acc += row[j] * coeffs[j];
            }
            out[k] += acc;
        }
        *madds += (q * (n_rem + 1)) as u64;
        return;
    }
    let sub_grid = q.pow((d_rem - 1) as u32);
    let mut sub = vec![0.0; sub_grid];
    for a in 0..=n_rem {
        let off = block_offset(d_rem, n_rem, a);
        let len = dim(d_rem - 1, n_rem - a);
        sub.fill(0.0);
        eval_rec(
            tables,
            dir + 1,
            d_rem - 1,
            n_rem - a,
            &coeffs[off..off + len],
            &mut sub,
            madds,
        );
        for k in 0..q {
            let w = tables.value(dir, k, n_rem, a);
            let dst = &mut out[k * sub_grid..(k + 1) * sub_grid];
            for (o, s) in dst.iter_mut().zip(&sub) {
                *o += w * s;
            }
        }
        *madds += (q * sub_grid) as u64;
    }
}

/// Adjoint of [`eval_with_tables`] with the quadrature weights folded in:
/// given values `g` on the grid, returns the moments
/// `m_α = Σ_k W_k B^n_α(λ_k) g_k ≈ ∫ B^n_α g` over the unit simplex.
pub fn moments_with_tables(tables: &EvalTables, n: usize, values: &[f64]) -> Vec<f64> {
    let mut madds = 0;
    moments_with_tables_counted(tables, n, values, &mut madds)
}

/// [`moments_with_tables`], adding one to `madds` per multiply-add
/// (including the initial weighting pass).
pub fn moments_with_tables_counted(
    tables: &EvalTables,
    n: usize,
    values: &[f64],
    madds: &mut u64,
) -> Vec<f64> {
    assert!(n <= tables.max_degree, "tables too small for degree {n}");
    assert_eq!(values.len(), tables.grid_len(), "grid value count mismatch");
    let weighted: Vec<f64> = values
        .iter()
        .zip(&tables.weights)
        .map(|(v, w)| v * w)
        .collect();
    *madds += weighted.len() as u64;
    let mut out = vec![0.0; dim(tables.d, n)];
    moment_rec(tables, 0, tables.d, n, &weighted, &mut out, madds);
    out
}

fn moment_rec(
    tables: &EvalTables,
    dir: usize,
    d_rem: usize,
    n_rem: usize,
    grid: &[f64],
    out: &mut [f64],
    madds: &mut u64,
) {
    let q = tables.q;
    if d_rem == 0 {
        out[0] += grid[0];
        return;
    }
    if d_rem == 1 {
        for k in 0..q {
            let row = tables.degree_row(dir, k, n_rem);
            let g = grid[k];
            for j in 0..=n_rem {
                out[j] += row[j] * g;
            }
        }
        *madds += (q * (n_rem + 1)) as u64;
        return;
    }
    let sub_grid = q.pow((d_rem - 1) as u32);
    let mut sub = vec![0.0; sub_grid];
    for a in 0..=n_rem {
        sub.fill(0.0);
        for k in 0..q {
            let w = tables.value(dir, k, n_rem, a);
            let src = &grid[k * sub_grid..(k + 1) * sub_grid];
            for (s, g) in sub.iter_mut().zip(src) {
                *s += w * g;
            }
        }
        *madds += (q * sub_grid) as u64;
        let off = block_offset(d_rem, n_rem, a);
        let len = dim(d_rem - 1, n_rem - a);
        moment_rec(
            tables,
            dir + 1,
            d_rem - 1,
            n_rem - a,
            &sub,
            &mut out[off..off + len],
            madds,
        );
    }
}
