//! Bernstein–Bézier forms on a `d`-simplex.
//!
//! A polynomial of degree `n` is stored as its coefficient vector against
//! the Bernstein basis `B_α = (n!/α!)·b^α`, where `b = (b_0, …, b_d)` are
//! barycentric coordinates and `α` runs over the canonical index order of
//! [`crate::multiindex`]. The basis is a partition of unity, so coefficient
//! vectors inherit convex-hull bounds, and the coefficients with `α_v = 0`
//! are exactly the Bernstein coefficients of the trace on the facet opposite
//! vertex `v`.
//!
//! This module provides the reference operations on coefficient vectors:
//! de Casteljau evaluation, degree elevation and its transpose (as an
//! explicit sparse [`ElevationPlan`]), the index pattern of barycentric
//! gradients, and the exact rational scale factor of the product rule.
//! The quadrature-grid kernels with better complexity live in
//! [`crate::stroud`]; everything here is the plain, obviously-correct form
//! the fast paths are tested against.

use alloc::vec;
use alloc::vec::Vec;

use crate::multiindex::{binom_mi, binomial, dim, enumerate, rank, MultiIndex};
use crate::Rational;

/// A point in barycentric coordinates: `d + 1` weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct BarycentricPoint {
    coords: Vec<f64>,
}

impl BarycentricPoint {
    /// Wraps barycentric coordinates; the sum must equal one to `1e-12`.
    /// Entries may be negative (points outside the simplex are legal).
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty());
        let sum: f64 = coords.iter().sum();
        assert!(
            libm::fabs(sum - 1.0) <= 1e-12,
            "barycentric coordinates must sum to 1, got {sum}"
        );
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// A polynomial in Bernstein form: degree, simplex dimension, and one
/// coefficient per canonical multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct BForm {
    d: usize,
    n: usize,
    coeffs: Vec<f64>,
}

impl BForm {
    pub fn new(d: usize, n: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(
            coeffs.len(),
            dim(d, n),
            "coefficient count must be dim({d}, {n})"
        );
        Self { d, n, coeffs }
    }

    /// The constant polynomial `v` (all coefficients equal, by the
    /// partition of unity).
    pub fn constant(d: usize, n: usize, v: f64) -> Self {
        Self::new(d, n, vec![v; dim(d, n)])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Evaluates by the de Casteljau recurrence: `n` rounds of convex
    /// combinations, numerically stable and used as the reference for every
    /// faster evaluation path.
    pub fn eval(&self, p: &BarycentricPoint) -> f64 {
        assert_eq!(p.dim(), self.d, "point/form dimension mismatch");
        let b = p.coords();
        let mut level = self.coeffs.clone();
        for k in (1..=self.n).rev() {
            let lower = enumerate(self.d, k - 1);
            let mut next = vec![0.0; lower.len()];
            for (r, beta) in lower.iter().enumerate() {
                let mut acc = 0.0;
                for (i, &bi) in b.iter().enumerate() {
                    acc += bi * level[rank(&beta.add_unit(i))];
                }
                next[r] = acc;
            }
            level = next;
        }
        level[0]
    }
}

/// Values of every degree-`n` Bernstein basis function at `p`, in canonical
/// order, via the degree recurrence `B^n_α = Σ_i b_i B^{n-1}_{α-e_i}`.
pub fn eval_basis(d: usize, n: usize, p: &BarycentricPoint) -> Vec<f64> {
    assert_eq!(p.dim(), d);
    let b = p.coords();
    let mut level = vec![1.0];
    for k in 1..=n {
        let idx = enumerate(d, k);
        let mut next = vec![0.0; idx.len()];
        for (r, alpha) in idx.iter().enumerate() {
            let mut acc = 0.0;
            for (i, &bi) in b.iter().enumerate() {
                if let Some(down) = alpha.sub_unit(i) {
                    acc += bi * level[rank(&down)];
                }
            }
            next[r] = acc;
        }
        level = next;
    }
    level
}

/// Sparse form of the single-step degree elevation `E^{d,m}`, which rewrites
/// a degree-`m-1` form as the identical degree-`m` polynomial:
/// each source coefficient `c_α` adds `(α_i + 1)/m · c_α` into target
/// `α + e_i` for every direction `i`, i.e. exactly `d + 1` multiply-adds per
/// source coefficient.
#[derive(Clone, Debug)]
pub struct ElevationPlan {
    d: usize,
    /// Target degree `m`; the source degree is `m - 1`.
    degree: usize,
    source_dim: usize,
    target_dim: usize,
    /// `(source rank, target rank, weight)`, grouped by source.
    entries: Vec<(u32, u32, f64)>,
}

impl ElevationPlan {
    pub fn new(d: usize, m: usize) -> Self {
        assert!(m >= 1, "elevation target degree must be at least 1");
        let source = enumerate(d, m - 1);
        let mut entries = Vec::with_capacity(source.len() * (d + 1));
        for (r, alpha) in source.iter().enumerate() {
            for i in 0..=d {
                let dst = rank(&alpha.add_unit(i));
                let w = (alpha.entry(i) + 1) as f64 / m as f64;
                entries.push((r as u32, dst as u32, w));
            }
        }
        Self {
            d,
            degree: m,
            source_dim: source.len(),
            target_dim: dim(d, m),
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Target degree `m` (source degree is `m - 1`).
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The sparse entries `(source, target, weight)`, for tests that want
    /// the materialized operator.
    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    /// `y = E·x` (degree `m-1` coefficients to degree `m`).
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut madds = 0;
        self.apply_counted(x, &mut madds)
    }

    /// `y = E·x`, adding one to `madds` per multiply-add executed.
    pub fn apply_counted(&self, x: &[f64], madds: &mut u64) -> Vec<f64> {
        assert_eq!(x.len(), self.source_dim, "elevation shape mismatch");
        let mut y = vec![0.0; self.target_dim];
        for &(s, t, w) in &self.entries {
            y[t as usize] += w * x[s as usize];
        }
        *madds += self.entries.len() as u64;
        y
    }

    /// `y = Eᵀ·x` (degree `m` data down to degree `m-1`).
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut madds = 0;
        self.apply_transpose_counted(x, &mut madds)
    }

    pub fn apply_transpose_counted(&self, x: &[f64], madds: &mut u64) -> Vec<f64> {
        assert_eq!(x.len(), self.target_dim, "elevation shape mismatch");
        let mut y = vec![0.0; self.source_dim];
        for &(s, t, w) in &self.entries {
            y[s as usize] += w * x[t as usize];
        }
        *madds += self.entries.len() as u64;
        y
    }
}

/// Rewrites `f` as the identical polynomial of degree `n + 1`.
pub fn elevate(f: &BForm) -> BForm {
    let plan = ElevationPlan::new(f.d, f.n + 1);
    BForm::new(f.d, f.n + 1, plan.apply(&f.coeffs))
}

/// Rewrites `f` as the identical polynomial of degree `n2 ≥ n`, by
/// composing single-step elevations.
pub fn elevate_to(f: &BForm, n2: usize) -> BForm {
    assert!(n2 >= f.n, "cannot elevate degree {} down to {}", f.n, n2);
    let mut g = f.clone();
    while g.n < n2 {
        g = elevate(&g);
    }
    g
}

/// Applies `(E^{d,m})ᵀ` to degree-`m` data, producing degree-`m-1` data.
pub fn elevate_transpose(d: usize, m: usize, x: &[f64]) -> Vec<f64> {
    ElevationPlan::new(d, m).apply_transpose(x)
}

/// Index pattern of barycentric gradients at degree `n`:
/// `∇B^n_α = n · Σ_{i : α_i > 0} B^{n-1}_{α-e_i} ∇b_i`, stored per target
/// `α` as the pairs `(rank of α - e_i at degree n-1, i)`.
///
/// The caller supplies the constant vectors `∇b_i` of a concrete simplex;
/// the pattern itself is geometry-free.
#[derive(Clone, Debug)]
pub struct GradientPattern {
    d: usize,
    n: usize,
    terms: Vec<Vec<(usize, usize)>>,
}

impl GradientPattern {
    pub fn new(d: usize, n: usize) -> Self {
        assert!(n >= 1, "gradients need degree at least 1");
        let idx = enumerate(d, n);
        let terms = idx
            .iter()
            .map(|alpha| {
                (0..=d)
                    .filter_map(|i| alpha.sub_unit(i).map(|down| (rank(&down), i)))
                    .collect()
            })
            .collect();
        Self { d, n, terms }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// The `(lower-degree rank, direction)` pairs for target rank `r`.
    pub fn terms(&self, r: usize) -> &[(usize, usize)] {
        &self.terms[r]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Exact scale factor of the Bernstein product rule:
/// `B^{n1}_α · B^{n2}_β = scale(α, β) · B^{n1+n2}_{α+β}` with
/// `scale = C(α+β, α) / C(n1+n2, n1)`.
pub fn product_scale(alpha: &MultiIndex, beta: &MultiIndex) -> Rational {
    assert_eq!(alpha.dim(), beta.dim(), "dimension mismatch");
    let num = binom_mi(&alpha.add(beta), alpha);
    let den = binomial((alpha.order() + beta.order()) as u64, alpha.order() as u64);
    Rational::new(u128_to_big(num), u128_to_big(den))
}

pub(crate) fn u128_to_big(v: u128) -> num_bigint::BigInt {
    num_bigint::BigInt::from(v)
}
