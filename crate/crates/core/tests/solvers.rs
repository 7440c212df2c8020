//! Cross-checks of the three mass-solver routes (block factorization,
//! blockwise Gaussian elimination, dense Cholesky) and of conjugate
//! gradients on the fast operator, plus the operation-count identities and
//! the documented error-growth behavior of the dense route.

mod common;

use berndg_core::linalg::{rel_err_inf, Cholesky};
use berndg_core::mass::{cg_solve, mass_matrix_f64, FastMassOperator};
use berndg_core::mass_solve::{
    base_solve_ops_2d, block_gauss_solve, forward_elevation_ops_2d, BlockLdlt, OpCounts,
};
use berndg_core::multiindex::dim;
use common::{pseudo, slope};

#[test]
fn all_three_solver_routes_agree() {
    for d in 1..=3 {
        for n in [1, 2, 4, 6] {
            let y = pseudo(dim(d, n), 31 * d as u64 + n as u64);
            let dense = Cholesky::new(&mass_matrix_f64(d, n)).solve(&y);
            let ldlt = BlockLdlt::new(d, n).solve(&y);
            let gauss = block_gauss_solve(d, n, &y);
            assert!(rel_err_inf(&ldlt, &dense) < 1e-9, "ldlt d={d} n={n}");
            assert!(rel_err_inf(&gauss, &dense) < 1e-9, "gauss d={d} n={n}");
        }
    }
}

#[test]
fn factorization_reproduces_the_fast_operator() {
    for d in 1..=3 {
        for n in [1, 3, 5] {
            let f = BlockLdlt::new(d, n);
            let fast = FastMassOperator::new(d, n);
            let x = pseudo(f.len(), 7 + n as u64);
            assert!(
                rel_err_inf(&f.apply_mass(&x), &fast.apply(&x)) < 1e-12,
                "d={d} n={n}"
            );
        }
    }
}

#[test]
fn triangular_sweeps_invert_each_other_at_high_degree() {
    let f = BlockLdlt::new(2, 10);
    let x = pseudo(f.len(), 99);
    assert!(rel_err_inf(&f.apply_l_inv(&f.apply_l(&x)), &x) < 1e-12);
    assert!(rel_err_inf(&f.apply_lt_inv(&f.apply_lt(&x)), &x) < 1e-12);
    assert!(rel_err_inf(&f.solve(&f.apply_mass(&x)), &x) < 1e-9);
}

#[test]
fn operation_counts_match_their_closed_forms() {
    for n in 2..=10usize {
        let f = BlockLdlt::new(2, n);
        let mut ops = OpCounts::default();
        f.solve_counted(&vec![1.0; f.len()], &mut ops);
        assert_eq!(ops.elevations_forward, forward_elevation_ops_2d(n), "n={n}");
        assert_eq!(ops.base_solve, base_solve_ops_2d(n), "n={n}");
    }
}

/// Solve errors of the factorization stay small through degree ten and
/// grow on a log-scale trend beyond it, while the dense route deteriorates
/// much faster — measured with the same right-hand sides.
#[test]
fn error_growth_trends_with_degree() {
    let mut block_errs = Vec::new();
    let mut dense_errs = Vec::new();
    for n in 1..=16usize {
        let m = mass_matrix_f64(2, n);
        let x_true = pseudo(dim(2, n), n as u64);
        let y = m.matvec(&x_true);
        block_errs.push((n as f64, rel_err_inf(&BlockLdlt::new(2, n).solve(&y), &x_true)));
        dense_errs.push((n as f64, rel_err_inf(&Cholesky::new(&m).solve(&y), &x_true)));
    }
    for &(n, e) in block_errs.iter().take(10) {
        assert!(e <= 1e-9, "block error {e:e} at degree {n}");
    }
    let log_block: Vec<(f64, f64)> = block_errs.iter().map(|&(n, e)| (n, e.ln())).collect();
    let log_dense: Vec<(f64, f64)> = dense_errs.iter().map(|&(n, e)| (n, e.ln())).collect();
    assert!(slope(&log_block) > 0.0, "block errors should trend upward");
    assert!(slope(&log_dense) > slope(&log_block), "dense should deteriorate faster");
}

#[test]
fn cg_converges_to_tolerance_through_degree_ten() {
    for d in 2..=3 {
        for n in 1..=10 {
            let nb = dim(d, n);
            let fast = FastMassOperator::new(d, n);
            let y = mass_matrix_f64(d, n).matvec(&pseudo(nb, 5 * n as u64));
            let res = cg_solve(|v| fast.apply(v), &y, 1e-12, 1000.max(4 * nb));
            assert!(res.converged, "d={d} n={n}: {} iters", res.iterations);
            assert!(res.rel_residual <= 1e-12);
        }
    }
}

#[test]
fn truncating_cg_at_the_cluster_count_costs_accuracy() {
    let d = 2;
    let n = 10;
    let nb = dim(d, n);
    let fast = FastMassOperator::new(d, n);
    let x_true = pseudo(nb, 77);
    let y = mass_matrix_f64(d, n).matvec(&x_true);
    let full = cg_solve(|v| fast.apply(v), &y, 1e-12, 1000);
    let fixed = cg_solve(|v| fast.apply(v), &y, 0.0, n + 1);
    let err_full = rel_err_inf(&full.x, &x_true);
    let err_fixed = rel_err_inf(&fixed.x, &x_true);
    assert_eq!(fixed.iterations, n + 1);
    assert!(
        err_fixed >= 1e2 * err_full,
        "fixed {err_fixed:e} vs full {err_full:e}"
    );
}

#[test]
fn cg_iteration_counts_are_dimension_insensitive() {
    // The iteration count tracks the number of distinct eigenvalues (n+1),
    // not the matrix size, so d=2 and d=3 land close together.
    for n in [2usize, 4, 6] {
        let mut iters = [0usize; 2];
        for (k, d) in [2usize, 3].into_iter().enumerate() {
            let nb = dim(d, n);
            let fast = FastMassOperator::new(d, n);
            let y = mass_matrix_f64(d, n).matvec(&pseudo(nb, 11 * n as u64));
            iters[k] = cg_solve(|v| fast.apply(v), &y, 1e-12, 1000).iterations;
        }
        let hi = iters[0].max(iters[1]) as f64;
        let lo = iters[0].min(iters[1]) as f64;
        assert!(hi / lo <= 1.2, "n={n}: iterations {iters:?} differ by more than 20%");
    }
}
