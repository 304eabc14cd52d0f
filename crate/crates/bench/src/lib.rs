//! Shared fixtures for the benchmarks.

use trajdist_core::synth::{generate_pair, GenConfig};
use trajdist_core::{pair_distances, DistanceMatrixSequence, ExtendedMetricParams};

/// Distance matrices for a synthetic pair with moderate noise and a few swaps.
pub fn synthetic_distances(n_traj: usize, t_horizon: usize, del_prob: f64, seed: u64) -> DistanceMatrixSequence {
    let cfg = GenConfig { n_traj, t_horizon, amp_noise: 1.0, del_prob, swi_dist: 2.0, seed, ..Default::default() };
    let (a, b) = generate_pair(&cfg).expect("valid generator config");
    pair_distances(&a, &b, &ExtendedMetricParams::euclidean(10.0).expect("positive penalty")).expect("aligned pair")
}
