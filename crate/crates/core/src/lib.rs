//! Finite element kernels for the Bernstein polynomial basis on simplices,
//! plus a small discontinuous Galerkin solver for 2-D linear acoustics built
//! on top of them.
//!
//! The crate provides, bottom up:
//!
//! * [`multiindex`] — multi-index enumeration, ranking and combinatorics for
//!   the degree-`n` polynomial space on a `d`-simplex;
//! * [`bernstein`] — Bernstein–Bézier forms: de Casteljau evaluation, degree
//!   elevation (and its transpose), barycentric gradient patterns, and the
//!   coefficient-wise product rule;
//! * [`stroud`] — collapsed-coordinate (Duffy / Stroud) conical quadrature
//!   and sum-factored evaluation and moment kernels whose operation count is
//!   `O(n^{d+1})` instead of the naive `O(n^{2d})`;
//! * [`mass`] — the exact rational Bernstein mass matrix, its block
//!   recurrence, its closed-form spectrum, a fast quadrature-based
//!   matrix-free apply, and a conjugate gradient solver;
//! * [`mass_solve`] — direct block solvers for the mass matrix: a blockwise
//!   Gaussian elimination and a reusable block `L·Δ·Lᵀ` factorization whose
//!   solves cost `O(n^{d+1})` operations;
//! * [`dg`] — a triangulated unit-square mesh, trace/flux/volume kernels and
//!   SSP Runge–Kutta steppers for the first-order acoustic system.
//!
//! Everything outside the test suite is `no_std` (with `alloc`); all
//! floating point math goes through [`libm`] so results do not depend on the
//! host math library.
//!
//! # Coefficient ordering
//!
//! All coefficient vectors in this crate are ordered by the canonical
//! multi-index order defined in [`multiindex`]: ascending lexicographic in
//! `(α_0, …, α_d)`. Its key property is that the slice of indices sharing a
//! leading entry `α_0 = a` is contiguous and is itself canonically ordered
//! as a `(d-1)`-simplex index set of degree `n - a`, which is what makes the
//! blockwise mass algorithms and the ragged sum-factorization work on plain
//! sub-slices.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bernstein;
pub mod dg;
pub mod linalg;
pub mod mass;
pub mod mass_solve;
pub mod multiindex;
pub mod stroud;

/// Exact rational scalar used by the structural (non-float) API surface.
pub type Rational = num_rational::BigRational;

/// Convenience: build a `Rational` from an integer pair.
pub fn rational(num: i128, den: i128) -> Rational {
    Rational::new(num.into(), den.into())
}
