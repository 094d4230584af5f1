use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;

use polyspec::algebra::{
    chebyshev_sum_holds, chi_lambda_member, generalized_chebyshev_holds, power_mean_holds, ChiLambdaCouple,
    ExponentPair, MonotoneTriple, Tolerance,
};
use polyspec::bounds::{auto_grid, generalized_yang, yang_second, BoundOptions, BoundParams};
use polyspec::eigensolve::{rayleigh_quotient, smallest_eigenpairs, SolverOptions, Strategy as SolveStrategy};
use polyspec::harness::checks::clamped_operator;
use polyspec::operators::{commutator_residual, laplacian_on, polyharmonic_on};
use polyspec::{DomainSpec, Grid, GridFunction};

fn tol() -> Tolerance {
    Tolerance::relative(1e-12)
}

/// Positive descending `a`, ascending `b` and `c`.
fn triple() -> impl Strategy<Value = MonotoneTriple> {
    (1usize..10).prop_flat_map(|n| {
        (
            prop::collection::vec(0.01f64..100.0, n),
            prop::collection::vec(0.0f64..10.0, n),
            prop::collection::vec(0.0f64..10.0, n),
        )
            .prop_map(|(mut a, mut b, mut c)| {
                a.sort_by(|x, y| y.total_cmp(x));
                b.sort_by(f64::total_cmp);
                c.sort_by(f64::total_cmp);
                MonotoneTriple::new(a, b, c).unwrap()
            })
    })
}

fn admissible() -> impl Strategy<Value = ExponentPair> {
    (-3.0f64..3.0, 0.0f64..3.0).prop_map(|(alpha, extra)| ExponentPair {
        alpha,
        beta: alpha * alpha / 2.0 + extra,
    })
}

proptest! {
    #[test]
    fn generalized_chebyshev_never_fails(t in triple(), e in admissible()) {
        let r = generalized_chebyshev_holds(&t, e, tol()).unwrap();
        prop_assert!(r.holds, "lhs {} rhs {}", r.lhs, r.rhs);
    }

    #[test]
    fn power_mean_never_fails(s in prop::collection::vec(0.0f64..50.0, 1..20), gamma in 1.0f64..6.0) {
        prop_assert!(power_mean_holds(&s, gamma, tol()).unwrap().holds);
    }

    #[test]
    fn chebyshev_sum_on_opposite_orderings(mut a in prop::collection::vec(-10.0f64..10.0, 1..20), seed in any::<u64>()) {
        a.sort_by(f64::total_cmp);
        let mut b: Vec<f64> = a.iter().map(|x| -x * (1.0 + (seed % 7) as f64)).collect();
        b.iter_mut().for_each(|x| *x += 0.5);
        prop_assert!(chebyshev_sum_holds(&a, &b, Tolerance::relative(1e-12)).unwrap().holds);
    }

    #[test]
    fn chi_lambda_sampling_matches_closed_form(alpha in -3.0f64..3.0, beta in 0.0f64..5.0, lambda in 0.1f64..100.0) {
        // stay clear of the boundary, where sampling cannot be conclusive
        prop_assume!((alpha * alpha - 2.0 * beta).abs() > 0.2);
        let c = ChiLambdaCouple::new(lambda, ExponentPair { alpha, beta }).unwrap();
        let v = chi_lambda_member(&c, 60, Tolerance::default()).unwrap();
        prop_assert!(v.agrees_with_closed_form, "({alpha}, {beta}): sampled {}", v.holds_on_samples);
    }

    #[test]
    fn generalized_bound_is_scale_covariant(e in admissible(), scale in 1e-3f64..1e3, k in 1usize..8) {
        let lam: Vec<f64> = (1..=9).map(|j| (j * j) as f64).collect();
        let scaled: Vec<f64> = lam.iter().map(|x| x * scale).collect();
        let p = BoundParams::plain(1, 1, k).unwrap().with_exponents(e);
        let a = generalized_yang(&lam, &p, &BoundOptions::default()).unwrap();
        let b = generalized_yang(&scaled, &p, &BoundOptions::default()).unwrap();
        prop_assert!(a.holds && b.holds);
        prop_assert!((a.ratio() - b.ratio()).abs() <= 1e-9 * a.ratio());
    }

    #[test]
    fn operators_are_symmetric_and_positive(seed in any::<u64>(), l in 1u32..4) {
        let grid = DomainSpec::rectangle([1.0, 2.0], 9, l).build_grid().unwrap();
        let op = polyharmonic_on(&grid, l);
        let x = random_vector(&grid, seed);
        let y = random_vector(&grid, seed.wrapping_add(1));
        let lhs = Grid::dot(&op.apply(&x), &y);
        let rhs = Grid::dot(&x, &op.apply(&y));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * op.norm_estimate() * Grid::norm(&x) * Grid::norm(&y));
        prop_assert!(rayleigh_quotient(&op, &x).unwrap() > 0.0);
    }

    #[test]
    fn commutator_exact_on_random_interior_vectors(seed in any::<u64>(), l in 1u32..4, axis in 0usize..2) {
        let spec = DomainSpec::rectangle([1.0, 1.0], 16, l);
        let grid = spec.build_grid().unwrap();
        let margin = l as usize + 1;
        let values: Vec<f64> = random_vector(&grid, seed)
            .into_iter()
            .enumerate()
            .map(|(i, v)| if grid.has_margin(i, margin) { v } else { 0.0 })
            .collect();
        let u = GridFunction::from_values(&grid, values).unwrap();
        prop_assert!(commutator_residual(&spec, &u, axis).unwrap().relative <= 1e-10);
    }
}

fn random_vector(grid: &Arc<Grid>, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn auto_grid_is_admissible() {
    let grid = auto_grid();
    assert!(!grid.is_empty());
    assert!(grid.iter().all(|e| e.beta >= 0.0 && e.is_admissible()));
}

#[test]
fn krylov_agrees_with_dense() {
    for spec in [
        DomainSpec::rectangle([1.0, 1.5], 19, 1),
        DomainSpec::rectangle([1.0, 1.0], 14, 2),
        DomainSpec::l_shape(17, 1),
        // few points: for l = 3 the forward Rayleigh quotient loses about ‖A‖ε/λ₁
        DomainSpec::interval(1.0, 60, 3),
    ] {
        let grid = spec.build_grid().unwrap();
        assert!(grid.len() <= 400);
        let op = clamped_operator(&grid);
        let solve = |strategy| {
            let opts = SolverOptions { strategy, ..SolverOptions::default() };
            smallest_eigenpairs(&op, 6, &opts).unwrap()
        };
        let dense = solve(SolveStrategy::Dense);
        let krylov = solve(SolveStrategy::Krylov);
        for (d, k) in dense.eigenvalues.iter().zip(&krylov.eigenvalues) {
            assert_relative_eq!(d, k, max_relative = 1e-8);
        }
        for (v, lambda) in krylov.eigenvectors.unwrap().iter().zip(&krylov.eigenvalues) {
            assert_relative_eq!(rayleigh_quotient(&op, v).unwrap(), lambda, max_relative = 1e-8);
        }
    }
}

#[test]
fn discrete_spectra_satisfy_the_inequalities_exactly() {
    // for l = 1 the discrete operator is a genuine instance of the setting
    let grid = DomainSpec::rectangle([1.0, 1.3], 24, 1).build_grid().unwrap();
    let s = smallest_eigenpairs(&laplacian_on(&grid), 12, &SolverOptions::default()).unwrap();
    for k in 1..12 {
        let p = BoundParams::plain(1, 2, k).unwrap();
        assert!(yang_second(&s.eigenvalues, &p, &BoundOptions::default()).unwrap().holds, "k = {k}");
        for e in auto_grid() {
            let r = generalized_yang(&s.eigenvalues, &p.with_exponents(e), &BoundOptions::default()).unwrap();
            assert!(r.passes(), "k = {k}, {e:?}");
        }
    }
}
