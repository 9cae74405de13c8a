mod common;

use approx::assert_relative_eq;
use olsform::oracle::{gauss_inverse, gauss_solve_normal_equations, gauss_solve_weighted};
use olsform::weighted::{diagonal_weights, weighted_coeffs, weighted_geninv};
use olsform::{
    coeff_single, coeffs_projected, generalized_inverse, gram, interaction_stat, lu_upper,
    lu_upper_augmented, pairwise_scan, permutation_pvalue, precision_element, sgso, solve_all,
    weighted_sgso, DenseMatrix, Error, InteractionModel, PairOutcome, DEFAULT_PIVOT_FLOOR,
};
use proptest::prelude::*;

fn design_strategy() -> impl Strategy<Value = (DenseMatrix, Vec<f64>)> {
    (1usize..6, 0usize..20, any::<u64>()).prop_map(|(p, extra, seed)| {
        let mut rng = common::rng(seed);
        let n = p + 1 + extra;
        let (x, _) = common::design(&mut rng, n, p, 1e6);
        let b = common::beta(&mut rng, p);
        let y = common::response(&mut rng, &x, &b, 0.1);
        (x, y)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recursion_and_chain_agree((x, y) in design_strategy()) {
        let f = lu_upper_augmented(&x, &y, DEFAULT_PIVOT_FLOOR).unwrap();
        let b = sgso(&x, DEFAULT_PIVOT_FLOOR).unwrap();
        let a = solve_all(&f).unwrap();
        let c = coeffs_projected(&x, &y, &b).unwrap();
        for i in 0..x.ncols() {
            prop_assert!(common::rel(a[i], c[i]) < 1e-9);
        }
    }

    #[test]
    fn upper_factor_is_qt_x((x, _y) in design_strategy()) {
        let u = lu_upper(&x, DEFAULT_PIVOT_FLOOR).unwrap();
        let b = sgso(&x, DEFAULT_PIVOT_FLOOR).unwrap();
        let qtx = b.q().transpose().matmul(&x).unwrap();
        prop_assert!(u.u().max_abs_diff(&qtx).unwrap() <= 1e-10 * u.u().max_abs());
        for i in 0..x.ncols() {
            prop_assert!(u.u().get(i, i) > 0.0);
            prop_assert_eq!(u.u().get(i, i), u.pivots()[i]);
        }
    }

    #[test]
    fn basis_is_orthogonal((x, _y) in design_strategy()) {
        let b = sgso(&x, DEFAULT_PIVOT_FLOOR).unwrap();
        let qtq = b.q().transpose().matmul(b.q()).unwrap();
        for i in 0..x.ncols() {
            for j in 0..x.ncols() {
                let tol = 1e-10 * (b.d()[i] * b.d()[j]).sqrt();
                if i == j {
                    prop_assert!((qtq.get(i, i) - b.d()[i]).abs() <= tol);
                } else {
                    prop_assert!(qtq.get(i, j).abs() <= tol);
                }
            }
        }
    }

    #[test]
    fn pseudoinverse_is_left_inverse((x, y) in design_strategy()) {
        let pinv = generalized_inverse(&x).unwrap();
        let eye = pinv.to_matrix().matmul(&x).unwrap();
        prop_assert!(eye.max_abs_diff(&DenseMatrix::identity(x.ncols())).unwrap() < 1e-9);
        let oracle = gauss_solve_normal_equations(&x, &y).unwrap().beta;
        let got = pinv.apply(&y).unwrap();
        prop_assert!(common::max_rel(&got, &oracle) < 1e-8);
    }

    #[test]
    fn precision_is_symmetric_bitwise((x, _y) in design_strategy()) {
        let pinv = generalized_inverse(&x).unwrap();
        let p = x.ncols();
        for i in 1..=p {
            prop_assert!(precision_element(i, i, &pinv).unwrap() > 0.0);
            for j in 1..=p {
                prop_assert_eq!(
                    precision_element(i, j, &pinv).unwrap().to_bits(),
                    precision_element(j, i, &pinv).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn weighted_matches_oracle((x, y) in design_strategy(), seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = common::rng(seed);
        let w: Vec<f64> = (0..x.nrows()).map(|_| rng.gen_range(0.2..5.0)).collect();
        let w = diagonal_weights(&w);
        let wb = weighted_sgso(&x, &w, DEFAULT_PIVOT_FLOOR).unwrap();
        let got = weighted_coeffs(&x, &y, &wb).unwrap();
        let oracle = gauss_solve_weighted(&x, &w, &y).unwrap();
        prop_assert!(common::max_rel(&got, &oracle) < 1e-8);
        let g = weighted_geninv(&x, &w, DEFAULT_PIVOT_FLOOR).unwrap();
        let via_inverse = g.apply(&y).unwrap();
        prop_assert!(common::max_rel(&via_inverse, &oracle) < 1e-8);
    }

    #[test]
    fn coefficients_scale_with_response((x, y) in design_strategy(), s in 0.1f64..10.0) {
        let b = sgso(&x, DEFAULT_PIVOT_FLOOR).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v * s).collect();
        for i in 1..=x.ncols() {
            let a = coeff_single(i, &x, &y, &b).unwrap();
            let c = coeff_single(i, &x, &ys, &b).unwrap();
            prop_assert!((c - s * a).abs() <= 1e-10 * (s * a).abs().max(1e-300));
        }
    }
}

#[test]
fn precision_matches_inverse_gram() {
    let mut rng = common::rng(41);
    let (x, _) = common::design(&mut rng, 30, 5, 1e6);
    let pinv = generalized_inverse(&x).unwrap();
    let s = gauss_inverse(&gram(&x)).unwrap();
    for i in 1..=5 {
        for j in 1..=5 {
            assert_relative_eq!(
                precision_element(i, j, &pinv).unwrap(),
                s.get(i - 1, j - 1),
                epsilon = 1e-10 * s.max_abs(),
                max_relative = 1e-8
            );
        }
    }
}

#[test]
fn column_scaling_rescales_coefficient() {
    let mut rng = common::rng(42);
    let (x, _, y) = common::instance(&mut rng, 40, 4, 1e6);
    let mut xs = x.clone();
    for r in 0..40 {
        xs.set(r, 2, 1e6 * x.get(r, 2));
    }
    let a = solve_all(&lu_upper_augmented(&x, &y, DEFAULT_PIVOT_FLOOR).unwrap()).unwrap();
    let b = solve_all(&lu_upper_augmented(&xs, &y, DEFAULT_PIVOT_FLOOR).unwrap()).unwrap();
    assert_relative_eq!(b[2] * 1e6, a[2], max_relative = 1e-9);
    assert_relative_eq!(b[0], a[0], max_relative = 1e-9);
}

#[test]
fn near_collinear_column_is_rejected() {
    let mut rng = common::rng(43);
    let (x, _) = common::design(&mut rng, 20, 2, 1e6);
    let third: Vec<f64> = (0..20).map(|r| x.get(r, 0) - 2.0 * x.get(r, 1)).collect();
    let x = x.hcat_column(&third).unwrap();
    assert!(matches!(
        sgso(&x, DEFAULT_PIVOT_FLOOR),
        Err(Error::RankDeficient { column: 3, .. })
    ));
    assert!(matches!(
        lu_upper(&x, DEFAULT_PIVOT_FLOOR),
        Err(Error::RankDeficient { column: 3, .. })
    ));
}

#[test]
fn indefinite_weights_solve_normal_equations() {
    let mut rng = common::rng(44);
    let (x, _, y) = common::instance(&mut rng, 25, 3, 1e4);
    let w: Vec<f64> = (0..25).map(|r| if r % 4 == 0 { -0.5 } else { 1.5 }).collect();
    let w = diagonal_weights(&w);
    let wb = weighted_sgso(&x, &w, DEFAULT_PIVOT_FLOOR).unwrap();
    assert!(wb.pivots().iter().all(|p| p.is_finite() && *p != 0.0));
    let got = weighted_coeffs(&x, &y, &wb).unwrap();
    let oracle = gauss_solve_weighted(&x, &w, &y).unwrap();
    assert!(common::max_rel(&got, &oracle) < 1e-8);
}

#[test]
fn interaction_matches_classical_regression() {
    let mut rng = common::rng(45);
    let m = 80;
    let (gi, gj) = common::locus_pair(&mut rng, m);
    let e = common::noise(&mut rng, m);
    let p: Vec<f64> = (0..m).map(|k| 0.5 * gi[k] * gj[k] + e[k]).collect();
    let s = interaction_stat(&gi, &gj, &p).unwrap();
    let ones = vec![1.0; m];
    let gij: Vec<f64> = gi.iter().zip(&gj).map(|(a, b)| a * b).collect();
    let x = DenseMatrix::from_columns(&[&ones[..], &gi[..], &gj[..], &gij[..]]).unwrap();
    let oracle = gauss_solve_normal_equations(&x, &p).unwrap().beta;
    assert_relative_eq!(s.beta3, oracle[3], max_relative = 1e-9);
    assert_eq!(s.dof, m - 4);
}

#[test]
fn permutation_pvalue_is_reproducible_and_bounded() {
    let mut rng = common::rng(46);
    let m = 50;
    let (gi, gj) = common::locus_pair(&mut rng, m);
    let p = common::noise(&mut rng, m);
    let a = permutation_pvalue(&gi, &gj, &p, 99, 5).unwrap();
    assert_eq!(a, permutation_pvalue(&gi, &gj, &p, 99, 5).unwrap());
    assert!((1.0 / 100.0..=1.0).contains(&a));
    let model = InteractionModel::new(&gi, &gj).unwrap();
    // identity permutation always ties with the observed statistic
    let ident: Vec<usize> = (0..m).collect();
    assert_eq!(model.pvalue_with(&p, &[ident]).unwrap(), 1.0);
}

#[test]
fn scan_is_thread_count_independent() {
    let mut rng = common::rng(47);
    let m = 40;
    let cols: Vec<Vec<f64>> = (0..5).map(|_| common::genotypes(&mut rng, m, 0.3)).collect();
    let g = DenseMatrix::from_columns(&cols).unwrap();
    let p = common::noise(&mut rng, m);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| pairwise_scan(&g, &p, 49, 8).unwrap())
    };
    let one = run(1);
    assert_eq!(one.len(), 10);
    assert_eq!(one, run(4));
    let pairs: Vec<(usize, usize)> = one.iter().map(PairOutcome::pair).collect();
    let mut sorted = pairs.clone();
    sorted.sort();
    assert_eq!(pairs, sorted);
}

#[test]
fn rank_floor_ignores_overall_scale() {
    let mut rng = common::rng(48);
    let (x, _, y) = common::instance(&mut rng, 20, 3, 1e4);
    let base = coeffs_projected(&x, &y, &sgso(&x, DEFAULT_PIVOT_FLOOR).unwrap()).unwrap();
    for s in [1e-9, 1e9] {
        let xs = x.scale(s);
        let b = sgso(&xs, DEFAULT_PIVOT_FLOOR).unwrap();
        lu_upper(&xs, DEFAULT_PIVOT_FLOOR).unwrap();
        weighted_sgso(&xs, &DenseMatrix::identity(20), DEFAULT_PIVOT_FLOOR).unwrap();
        let got = coeffs_projected(&xs, &y, &b).unwrap();
        for i in 0..3 {
            assert_relative_eq!(got[i] * s, base[i], max_relative = 1e-10);
        }
    }
}
