mod common;

use std::f64::consts::PI;

use common::{box_theta, c, period, period_and_point, period_upto};
use proptest::prelude::*;
use thetalab::theta::{
    reduce, theta2_eval, theta_eval, theta_eval_with_plan, theta_with_scale, truncation_radius, DEFAULT_ABS_TOL,
};
use thetalab::{DerivativeSpec, PeriodMatrix, C64};

fn theta(z: &[C64], p: &PeriodMatrix) -> C64 {
    theta_eval(z, p, &DerivativeSpec::none(), DEFAULT_ABS_TOL).unwrap()
}

fn shifts(g: usize) -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (prop::collection::vec(-2i64..=2, g), prop::collection::vec(-2i64..=2, g))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quasi_periodicity(
        ((p, z), (a, b)) in period_and_point(3).prop_flat_map(|(p, z)| {
            let g = p.g();
            (Just((p, z)), shifts(g))
        })
    ) {
        let g = p.g();
        let moved: Vec<C64> = (0..g)
            .map(|i| z[i] + a[i] as f64 + (0..g).map(|j| p.entry(i, j) * b[j] as f64).sum::<C64>())
            .collect();
        let mut exponent = c(0.0, 0.0);
        for i in 0..g {
            exponent += 2.0 * b[i] as f64 * z[i];
            for j in 0..g {
                exponent += p.entry(i, j) * (b[i] * b[j]) as f64;
            }
        }
        let expected = (c(0.0, -PI) * exponent).exp() * theta(&z, &p);
        let got = theta(&moved, &p);
        prop_assert!((got - expected).norm() <= 1e-9 * expected.norm().max(1.0));
    }

    #[test]
    fn evenness((p, z) in period_and_point(3)) {
        let minus: Vec<C64> = z.iter().map(|w| -w).collect();
        let (plus, neg) = (theta(&z, &p), theta(&minus, &p));
        prop_assert!((plus - neg).norm() <= 1e-10 * plus.norm().max(1e-300));
        let none = DerivativeSpec::none();
        for index in 0..(1usize << p.g()) {
            let eps = thetalab::kummer::characteristic(index, p.g());
            let a = theta2_eval(&eps, &z, &p, &none, DEFAULT_ABS_TOL).unwrap();
            let b = theta2_eval(&eps, &minus, &p, &none, DEFAULT_ABS_TOL).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * a.norm());
        }
    }

    #[test]
    fn heat_equation(
        ((p, z), (i, j)) in period_and_point(2).prop_flat_map(|(p, z)| {
            let g = p.g();
            (Just((p, z)), (0..g, 0..g))
        })
    ) {
        let h = 1e-4;
        let value = |q: &PeriodMatrix| theta(&z, q);
        let fd = (value(&p.perturbed(i, j, c(h, 0.0)).unwrap()) - value(&p.perturbed(i, j, c(-h, 0.0)).unwrap()))
            / (2.0 * h);
        let second = theta_eval(&z, &p, &DerivativeSpec::axes(p.g(), &[i, j]).unwrap(), DEFAULT_ABS_TOL).unwrap();
        let expected = second / c(0.0, if i == j { 4.0 } else { 2.0 } * PI);
        // O(h^2) truncation plus differencing roundoff of theta itself.
        let bound = 1e-6 * expected.norm() + 1e-9 * theta(&z, &p).norm().max(1.0);
        prop_assert!((fd - expected).norm() <= bound, "{} > {}", (fd - expected).norm(), bound);
    }

    #[test]
    fn matches_naive_box_sum((p, z) in period_and_point(3)) {
        let z: Vec<C64> = z.iter().map(|w| w * 1.5).collect();
        let got = theta(&z, &p);
        let reference = box_theta(&z, &p, 12);
        prop_assert!((got - reference).norm() <= 1e-9 * reference.norm());
    }

    /// Summing over twice the planned radius changes the value by less than the
    /// tolerance, measured in the scale of the reduced sum.
    #[test]
    fn doubling_the_radius_changes_nothing((p, z) in period_and_point(2)) {
        let (value, plan) = theta_eval_with_plan(&z, &p, &DerivativeSpec::none(), DEFAULT_ABS_TOL).unwrap();
        let bound = (2.0 * plan.lattice_radius).ceil() as i64 + 2;
        let reference = box_theta(&z, &p, bound);
        let factor = reduce(&z, &p).log_factor.exp().norm();
        prop_assert!((value - reference).norm() <= 10.0 * DEFAULT_ABS_TOL * factor.max(1.0));
    }

    #[test]
    fn reduction_identity((p, z) in period_and_point(3)) {
        let z: Vec<C64> = z.iter().map(|w| w * 3.0).collect();
        let r = reduce(&z, &p);
        let g = p.g();
        for i in 0..g {
            let rebuilt = r.z_red[i] + r.a[i] as f64 + (0..g).map(|j| p.entry(i, j) * r.b[j] as f64).sum::<C64>();
            prop_assert!((rebuilt - z[i]).norm() <= 1e-12 * (1.0 + z[i].norm()));
        }
        let (direct, scale) = theta_with_scale(&z, &p, DEFAULT_ABS_TOL).unwrap();
        let via = r.log_factor.exp() * theta(&r.z_red, &p);
        prop_assert!((direct - via).norm() <= 1e-10 * scale.max(direct.norm()));
    }

    #[test]
    fn looser_tolerance_never_widens_the_plan(p in period_upto(3), order in 0usize..=4) {
        let tight = truncation_radius(&p, 1e-12, order, 1.0).unwrap();
        let loose = truncation_radius(&p, 1e-3, order, 1.0).unwrap();
        prop_assert!(loose.radius <= tight.radius);
        prop_assert!(loose.term_count <= tight.term_count);
    }

    #[test]
    fn doubling_lambda_min_never_grows_the_lattice_radius(p in period(2)) {
        let g = p.g();
        let doubled: Vec<C64> = p.entries().iter().map(|w| c(w.re, 2.0 * w.im)).collect();
        let q = PeriodMatrix::new(g, doubled).unwrap();
        prop_assert!((q.lambda_min() - 2.0 * p.lambda_min()).abs() <= 1e-9 * p.lambda_min());
        let a = truncation_radius(&p, 1e-12, 0, 0.0).unwrap();
        let b = truncation_radius(&q, 1e-12, 0, 0.0).unwrap();
        prop_assert!(b.lattice_radius <= a.lattice_radius);
        prop_assert!(b.term_count <= a.term_count);
    }
}
