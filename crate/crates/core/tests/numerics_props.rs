mod common;

use common::{c, complex};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use thetalab::numerics::{integrate_path, lm_fit, svd_rank, ComplexMatrix, IntegrateOptions, LmOptions};
use thetalab::C64;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(complex(1.0, 1.0), rows * cols)
}

fn product(a: &[C64], b: &[C64], m: usize, r: usize, n: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            out[(i, j)] = (0..r).map(|k| a[i * r + k] * b[k * n + j]).sum();
        }
    }
    out
}

/// `m x n` matrix of rank at most `r`, as a product of random factors.
fn low_rank() -> impl Strategy<Value = ComplexMatrix> {
    (2usize..6, 2usize..6, 1usize..5).prop_flat_map(|(m, n, r)| {
        (matrix(m, r), matrix(r, n)).prop_map(move |(a, b)| product(&a, &b, m, r, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_ignores_permutation_and_unitary_scaling(
        m in low_rank(),
        seed in any::<u64>(),
        phases in prop::collection::vec(0.0..std::f64::consts::TAU, 12),
        scale in 0.1f64..10.0,
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (rows, cols) = (m.rows(), m.cols());
        let mut rp: Vec<usize> = (0..rows).collect();
        let mut cp: Vec<usize> = (0..cols).collect();
        rp.shuffle(&mut rng);
        cp.shuffle(&mut rng);
        let mut moved = ComplexMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let phase = C64::from_polar(scale, phases[i] + phases[6 + j]);
                moved[(i, j)] = phase * m[(rp[i], cp[j])];
            }
        }
        let before = svd_rank(&m, 1e-8).unwrap();
        let after = svd_rank(&moved, 1e-8).unwrap();
        prop_assert_eq!(before.rank, after.rank);
        prop_assert!(before.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let top = before.singular_values[0];
        let counted = before.singular_values.iter().filter(|&&s| s >= 1e-8 * top).count();
        prop_assert_eq!(before.rank, counted);
    }

    #[test]
    fn linear_least_squares_matches_normal_equations(
        (m, n, a, b) in (3usize..7, 1usize..4).prop_flat_map(|(m, n)| {
            (Just(m), Just(n), matrix(m, n), prop::collection::vec(complex(2.0, 2.0), m))
        })
    ) {
        let am = DMatrix::from_row_slice(m, n, &a);
        let normal = am.adjoint() * &am;
        // Skip nearly rank-deficient draws: the normal equations lose accuracy there.
        let sv = am.singular_values();
        prop_assume!(sv.min() > 0.05 * sv.max());
        let direct = normal.lu().solve(&(am.adjoint() * DVector::from_column_slice(&b))).unwrap();
        let fit = lm_fit(
            |x: &[C64]| Ok((0..m).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum::<C64>() - b[i]).collect()),
            &vec![c(0.0, 0.0); n],
            &LmOptions::default(),
        )
        .unwrap();
        for j in 0..n {
            prop_assert!((fit.solution[j] - direct[j]).norm() <= 1e-10 * direct.norm().max(1.0), "gap {:e} iters {} conv {}", (fit.solution[j] - direct[j]).norm(), fit.iterations, fit.converged);
        }
        let r: f64 = (0..m)
            .map(|i| ((0..n).map(|j| a[i * n + j] * fit.solution[j]).sum::<C64>() - b[i]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!((r - fit.residual_norm).abs() <= 1e-12 * r.max(1.0));
    }

    #[test]
    fn halving_the_step_gains_fourth_order(k in complex(2.0, 2.0).prop_filter("not tiny", |k| k.norm() > 0.5)) {
        let end = |h: f64| {
            let path = integrate_path(
                |_, y: &[C64]| vec![k * y[0]],
                &[c(1.0, 0.0)],
                0.0,
                1.0,
                &IntegrateOptions { step: h, ..IntegrateOptions::default() },
            )
            .unwrap();
            (path.last().unwrap().1[0] - k.exp()).norm()
        };
        let (coarse, fine) = (end(0.1), end(0.05));
        prop_assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
    }
}
