//! Fixed inputs shared by the benches.

use thetalab::io::{generate_example, random_siegel, ExampleKind};
use thetalab::kp::divisor_point;
use thetalab::{PeriodMatrix, C64};

/// A well-conditioned period matrix of genus `g`.
pub fn period(g: usize) -> PeriodMatrix {
    random_siegel(g, 0.5, 7).expect("fixed seed gives a valid matrix")
}

/// A generic evaluation point of dimension `g`.
pub fn point(g: usize) -> Vec<C64> {
    (0..g).map(|i| C64::new(0.3 + 0.1 * i as f64, -0.2 + 0.05 * i as f64)).collect()
}

pub fn genus2() -> PeriodMatrix {
    generate_example(ExampleKind::Genus2Indecomposable, 0)
        .and_then(|d| d.to_period())
        .expect("built-in example")
}

/// A point on the theta divisor of `p`, found along a fixed line.
pub fn divisor_start(p: &PeriodMatrix) -> Vec<C64> {
    let base = point(p.g());
    let dir: Vec<C64> = (0..p.g()).map(|i| C64::new(1.0, 0.25 * i as f64)).collect();
    divisor_point(p, &base, &dir).expect("line meets the divisor")
}
