//! Multi-indices over the vertices of a `d`-simplex.
//!
//! A multi-index `α = (α_0, …, α_d)` of order `|α| = α_0 + … + α_d = n`
//! labels one Bernstein basis function of degree `n` on a `d`-simplex, so
//! the index set of order `n` enumerates a basis of the polynomial space of
//! degree `n` in `d` variables, which has dimension `C(n + d, d)`.
//!
//! # Canonical order
//!
//! Every coefficient vector in this crate uses one fixed order: ascending
//! lexicographic in `(α_0, α_1, …)`, i.e. sorted by `α_0`, ties broken by
//! recursively ordering the tail `(α_1, …, α_d)` the same way. Two
//! properties of this order are load-bearing:
//!
//! * indices with `α_0 = a` form one contiguous run of length
//!   `dim(d - 1, n - a)`, located after all runs with smaller `α_0`;
//! * within that run, the tails `(α_1, …, α_d)` appear exactly in the
//!   canonical order of the `(d-1)`-simplex index set of order `n - a`.
//!
//! So a coefficient vector for dimension `d` is, viewed blockwise, a ragged
//! list of coefficient vectors for dimension `d - 1`, one per leading entry.
//! The blockwise mass solvers and the sum-factored kernels rely on this.
//!
//! All counting here is exact integer arithmetic in `u128` with checked
//! multiplication; every quantity is exact for orders `n ≤ 30` in any
//! dimension this crate supports (`d ≤ 3`), far below `u128` overflow, and
//! an overflow beyond that panics rather than silently wrapping.

use alloc::vec::Vec;

/// A multi-index `(α_0, …, α_d)`: the exponent tuple of one barycentric
/// monomial, with `d + 1` entries for a `d`-simplex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    entries: Vec<usize>,
}

impl MultiIndex {
    /// Wraps an exponent tuple. `entries.len()` must be `d + 1 ≥ 1`.
    pub fn new(entries: Vec<usize>) -> Self {
        assert!(!entries.is_empty(), "multi-index needs at least one entry");
        Self { entries }
    }

    /// Simplex dimension `d` (one less than the number of entries).
    pub fn dim(&self) -> usize {
        self.entries.len() - 1
    }

    /// Order `|α| = α_0 + … + α_d`.
    pub fn order(&self) -> usize {
        self.entries.iter().sum()
    }

    /// The exponent entries.
    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Entry `α_i`.
    pub fn entry(&self, i: usize) -> usize {
        self.entries[i]
    }

    /// Entry-wise sum `α + β` (same dimension required).
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// `α - e_i` if `α_i > 0`, else `None`.
    pub fn sub_unit(&self, i: usize) -> Option<Self> {
        if self.entries[i] == 0 {
            return None;
        }
        let mut entries = self.entries.clone();
        entries[i] -= 1;
        Some(Self::new(entries))
    }

    /// `α + e_i`.
    pub fn add_unit(&self, i: usize) -> Self {
        let mut entries = self.entries.clone();
        entries[i] += 1;
        Self::new(entries)
    }
}

/// Dimension of the degree-`n` polynomial space on a `d`-simplex:
/// `C(n + d, d)`, the number of multi-indices of order `n` with `d + 1`
/// entries.
///
/// ```
/// use berndg_core::multiindex::dim;
/// assert_eq!(dim(2, 3), 10);
/// ```
pub fn dim(d: usize, n: usize) -> usize {
    binomial((n + d) as u64, d as u64) as usize
}

/// Binomial coefficient `C(n, k)` in exact integer arithmetic.
///
/// Panics on `u128` overflow (not reachable for the orders this crate
/// guarantees, `n ≤ 30` on simplices of dimension `≤ 3`).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Multiply first, divide second: the running value is always an
        // exact binomial, so the division by `i + 1` is exact.
        acc = acc
            .checked_mul((n - i) as u128)
            .expect("binomial overflows u128");
        acc /= (i + 1) as u128;
    }
    acc
}

/// Multinomial coefficient `n! / (α_0! ⋯ α_d!)` for `|α| = n`.
///
/// Computed as a product of binomials of the partial sums, so intermediate
/// values never exceed the result times one binomial factor.
pub fn multinomial(n: usize, alpha: &MultiIndex) -> u128 {
    assert_eq!(alpha.order(), n, "multinomial needs |α| = n");
    let mut acc: u128 = 1;
    let mut partial = 0u64;
    for &a in alpha.entries() {
        partial += a as u64;
        acc = acc
            .checked_mul(binomial(partial, a as u64))
            .expect("multinomial overflows u128");
    }
    acc
}

/// Multi-index binomial `C(α, β) = Π_i C(α_i, β_i)`.
///
/// Zero when any `β_i > α_i`, matching the scalar convention.
pub fn binom_mi(alpha: &MultiIndex, beta: &MultiIndex) -> u128 {
    assert_eq!(alpha.dim(), beta.dim(), "dimension mismatch");
    let mut acc: u128 = 1;
    for (&a, &b) in alpha.entries().iter().zip(beta.entries()) {
        acc = acc
            .checked_mul(binomial(a as u64, b as u64))
            .expect("binom_mi overflows u128");
    }
    acc
}

/// All multi-indices of order `n` on a `d`-simplex, in canonical order.
///
/// ```
/// use berndg_core::multiindex::{enumerate, MultiIndex};
/// let idx: Vec<Vec<usize>> = enumerate(1, 2)
///     .iter()
///     .map(|a| a.entries().to_vec())
///     .collect();
/// assert_eq!(idx, [[0, 2], [1, 1], [2, 0]]);
/// ```
pub fn enumerate(d: usize, n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(dim(d, n));
    let mut current = Vec::with_capacity(d + 1);
    fill(d, n, &mut current, &mut out);
    debug_assert_eq!(out.len(), dim(d, n));
    out
}

fn fill(d: usize, n: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if d == 0 {
        current.push(n);
        out.push(MultiIndex::new(current.clone()));
        current.pop();
        return;
    }
    for a in 0..=n {
        current.push(a);
        fill(d - 1, n - a, current, out);
        current.pop();
    }
}

/// Position of `α` in the canonical order of its own index set
/// (order `|α|`, dimension `α.dim()`).
///
/// Runs in `O(d · n)` time; inverse of [`unrank`].
pub fn rank(alpha: &MultiIndex) -> usize {
    let d = alpha.dim();
    let mut remaining = alpha.order();
    let mut r = 0;
    for i in 0..d {
        for a in 0..alpha.entry(i) {
            r += dim(d - 1 - i, remaining - a);
        }
        remaining -= alpha.entry(i);
    }
    r
}

/// The multi-index at position `r` in the canonical order of the order-`n`
/// index set on a `d`-simplex. Inverse of [`rank`].
pub fn unrank(d: usize, n: usize, r: usize) -> MultiIndex {
    assert!(r < dim(d, n), "rank {r} out of range for dim({d}, {n})");
    let mut entries = Vec::with_capacity(d + 1);
    let mut remaining = n;
    let mut r = r;
    for i in 0..d {
        let mut a = 0;
        loop {
            let run = dim(d - 1 - i, remaining - a);
            if r < run {
                break;
            }
            r -= run;
            a += 1;
        }
        entries.push(a);
        remaining -= a;
    }
    entries.push(remaining);
    MultiIndex::new(entries)
}

/// Offset of the contiguous run of indices with leading entry `α_0 = a`
/// inside the canonical order of the `(d, n)` index set. The run has length
/// `dim(d - 1, n - a)`.
pub fn block_offset(d: usize, n: usize, a: usize) -> usize {
    assert!(d >= 1 && a <= n);
    (0..a).map(|b| dim(d - 1, n - b)).sum()
}
