//! Fixtures shared by the benchmarks in `benches/`.

use phasebound_core::{ConstraintSet, Grid, Measure, WeightField};

/// A lumpy nonnegative field supported in the disc of radius 2.5.
pub fn lumpy_field(n: usize) -> WeightField {
    let grid = Grid::square(3.0, n).expect("valid grid");
    WeightField::from_real_fn(grid, Measure::Lebesgue, |x, y| {
        let v = (-(x - 0.7).powi(2) - 3.0 * (y + 0.4).powi(2)).exp() + 0.6 * (-(x + 1.0).powi(2) - (y - 0.8).powi(2)).exp();
        if x.hypot(y) < 2.5 { v } else { 0.0 }
    })
    .expect("finite field")
}

/// One constraint set per regime and transform.
pub fn constraint_sets() -> Vec<(&'static str, ConstraintSet)> {
    let inf = f64::INFINITY;
    vec![
        ("gabor/ball", ConstraintSet::gabor(1.0, 1.0, 1.0, 1).expect("valid")),
        ("gabor/gaussian", ConstraintSet::gabor(2.0, inf, 1.0, 1).expect("valid")),
        ("gabor/truncated", ConstraintSet::gabor(2.0, 1.0, 1.0, 1).expect("valid")),
        ("gabor/truncated-d3", ConstraintSet::gabor(2.5, 1.0, 1.0, 3).expect("valid")),
        ("wavelet/gaussian", ConstraintSet::wavelet(2.0, inf, 1.0, 1.0).expect("valid")),
        ("wavelet/truncated", ConstraintSet::wavelet(2.0, 1.0, 2.0, 1.0).expect("valid")),
    ]
}
