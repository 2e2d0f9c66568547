//! Strategies and oracles shared by the property tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use proptest::prelude::*;
use thetalab::io::random_siegel;
use thetalab::{PeriodMatrix, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn complex(re: f64, im: f64) -> impl Strategy<Value = C64> {
    (-re..re, -im..im).prop_map(|(a, b)| C64::new(a, b))
}

pub fn point(g: usize, re: f64, im: f64) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(complex(re, im), g)
}

/// Random period matrix with `lambda_min >= 0.5`.
pub fn period(g: usize) -> impl Strategy<Value = PeriodMatrix> {
    any::<u64>().prop_map(move |seed| random_siegel(g, 0.5, seed).unwrap())
}

/// Genus and a matching period matrix, `g` in `1..=max_g`.
pub fn period_upto(max_g: usize) -> impl Strategy<Value = PeriodMatrix> {
    (1..=max_g).prop_flat_map(period)
}

/// Period matrix with a point in `C^g`.
pub fn period_and_point(max_g: usize) -> impl Strategy<Value = (PeriodMatrix, Vec<C64>)> {
    period_upto(max_g).prop_flat_map(|p| {
        let g = p.g();
        (Just(p), point(g, 1.0, 0.5))
    })
}

/// Naive sum over the box `|n_i| <= bound`.
pub fn box_theta(z: &[C64], p: &PeriodMatrix, bound: i64) -> C64 {
    let g = p.g();
    let side = (2 * bound + 1) as usize;
    let mut n = vec![0i64; g];
    let mut acc = c(0.0, 0.0);
    for idx in 0..side.pow(g as u32) {
        let mut k = idx;
        for slot in n.iter_mut() {
            *slot = (k % side) as i64 - bound;
            k /= side;
        }
        let mut phase = c(0.0, 0.0);
        for i in 0..g {
            phase += 2.0 * n[i] as f64 * z[i];
            for j in 0..g {
                phase += p.entry(i, j) * (n[i] * n[j]) as f64;
            }
        }
        acc += (c(0.0, PI) * phase).exp();
    }
    acc
}
