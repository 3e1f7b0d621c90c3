#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topocube_core::dataset::{synth_gaussian_mixture, Column, SampleTable};

/// Uniform points in the unit cube with a constant dummy measure.
pub fn uniform(n: usize, d: usize, seed: u64) -> SampleTable<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (0..d)
        .map(|k| Column::new(format!("x{k}"), (0..n).map(|_| rng.random::<f64>()).collect()))
        .collect();
    SampleTable::from_columns(cols, vec![Column::new("f", vec![0.0; n])]).unwrap()
}

/// Points on a coarse lattice so that distance ties and duplicates occur.
pub fn lattice(n: usize, d: usize, seed: u64) -> SampleTable<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (0..d)
        .map(|k| Column::new(format!("x{k}"), (0..n).map(|_| rng.random_range(0..6) as f64).collect()))
        .collect();
    SampleTable::from_columns(cols, vec![Column::new("f", vec![0.0; n])]).unwrap()
}

/// Random mixture of `m` bumps with distinct amplitudes.
pub fn mixture(n: usize, d: usize, m: usize, seed: u64) -> SampleTable<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let centers: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..d).map(|_| rng.random_range(0.15..0.85)).collect())
        .collect();
    let amplitudes: Vec<f64> = (0..m).map(|i| 1.0 - 0.12 * i as f64).collect();
    let widths = vec![0.25; m];
    synth_gaussian_mixture(d, &centers, &amplitudes, &widths, n, seed).unwrap()
}

pub fn two_gaussians(n: usize, seed: u64) -> SampleTable<f64> {
    synth_gaussian_mixture(
        2,
        &[vec![0.25, 0.5], vec![0.75, 0.5]],
        &[1.0, 0.6],
        &[0.1, 0.1],
        n,
        seed,
    )
    .unwrap()
}
