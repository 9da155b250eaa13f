//! Shared setup for the benchmark suite.

use isslab_core::grid::GridFunction;
use isslab_core::rng::Rng;

/// Deterministic rough grid function for solver benchmarks.
pub fn bench_grid(n: usize, seed: u64) -> GridFunction<f64> {
    let mut rng = Rng::new(seed);
    GridFunction::new((0..n).map(|_| rng.symmetric()).collect()).unwrap()
}
