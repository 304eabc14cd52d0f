#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajdist_core::{DistanceMatrixSequence, NormKind, SquareMatrix, Trajectory, TrajectorySet};

pub fn set(tracks: &[&[Option<f64>]]) -> TrajectorySet {
    tracks.iter().map(|v| Trajectory::from_series(v).unwrap()).collect()
}

pub fn full(v: &[f64]) -> Vec<Option<f64>> {
    v.iter().copied().map(Some).collect()
}

pub fn scenario1() -> (TrajectorySet, TrajectorySet) {
    (
        set(&[&full(&[-1.0, -0.6, -0.2, 0.2, 0.6, 1.0])]),
        set(&[&full(&[-0.9, -0.54, -0.18, 0.18, 0.54, 0.9])]),
    )
}

pub fn scenario2() -> (TrajectorySet, TrajectorySet) {
    (
        set(&[&[Some(-1.0), None, Some(-0.2), Some(0.2), Some(0.6), None]]),
        set(&[&[None, Some(-0.54), Some(-0.18), Some(0.18), Some(0.54), None]]),
    )
}

pub fn scenario3() -> (TrajectorySet, TrajectorySet) {
    (
        set(&[&full(&[-0.90, -0.78, -0.66, -0.54, -0.42, -0.30]), &full(&[-0.7, -0.42, -0.14, 0.14, 0.42, 0.70])]),
        set(&[&full(&[-1.00, -0.64, -0.28, 0.08, 0.44, 0.80]), &full(&[-0.60, -0.56, -0.52, -0.48, -0.44, -0.40])]),
    )
}

/// Two objects crossing (`A`), a tracker that swaps them at the crossing (`B`), and a
/// tracker reporting both objects at rest at the origin (`C`).
pub fn scenario4() -> (TrajectorySet, TrajectorySet, TrajectorySet) {
    (
        set(&[&full(&[1.0, 0.6, 0.2, -0.2, -0.6, -1.0]), &full(&[-1.0, -0.6, -0.2, 0.2, 0.6, 1.0])]),
        set(&[&full(&[1.0, 0.6, 0.2, 0.2, 0.6, 1.0]), &full(&[-1.0, -0.6, -0.2, -0.2, -0.6, -1.0])]),
        set(&[&full(&[0.0; 6]), &full(&[0.0; 6])]),
    )
}

/// Random sets of `k` and `l` 1-D trajectories on frames `1..=t` with each point present
/// with probability `presence`; states are integers in `[-range, range]`.
pub fn random_pair(rng: &mut ChaCha8Rng, k: usize, l: usize, t: usize, presence: f64, range: i32) -> (TrajectorySet, TrajectorySet) {
    let mut one = |n: usize| -> TrajectorySet {
        (0..n)
            .filter_map(|_| {
                let series: Vec<Option<f64>> = (0..t)
                    .map(|_| rng.random_bool(presence).then(|| f64::from(rng.random_range(-range..=range))))
                    .collect();
                Trajectory::from_series(&series).ok()
            })
            .collect()
    };
    (one(k), one(l))
}

/// Random distance matrices with entries uniform in `[0, cap]`.
pub fn random_d(m: usize, t: usize, cap: f64, seed: u64) -> DistanceMatrixSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = (0..t).map(|_| SquareMatrix::from_fn(m, |_, _| rng.random::<f64>() * cap)).collect();
    DistanceMatrixSequence::from_matrices(m, frames, cap).unwrap()
}

/// The convex problem solved by an off-the-shelf LP solver, formulated here from scratch:
/// `min Σ_t ⟨D(t), W(t)⟩ + α Σ_t ‖W(t+1) − W(t)‖` over doubly stochastic `W(t)`.
pub fn reference_lp(d: &DistanceMatrixSequence, alpha: f64, norm: NormKind) -> f64 {
    let (m, t) = (d.m(), d.t_horizon());
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let w: Vec<Vec<_>> = (0..t)
        .map(|s| (0..m * m).map(|ij| p.add_var(d.frame(s).as_slice()[ij], (0.0, 1.0))).collect())
        .collect();
    for wt in &w {
        for i in 0..m {
            let row: Vec<_> = (0..m).map(|j| (wt[i * m + j], 1.0)).collect();
            p.add_constraint(&row, ComparisonOp::Eq, 1.0);
            let col: Vec<_> = (0..m).map(|j| (wt[j * m + i], 1.0)).collect();
            p.add_constraint(&col, ComparisonOp::Eq, 1.0);
        }
    }
    for s in 0..t.saturating_sub(1) {
        let h_cost = if norm == NormKind::Entrywise { alpha } else { 0.0 };
        let h: Vec<_> = (0..m * m).map(|_| p.add_var(h_cost, (0.0, f64::INFINITY))).collect();
        for ij in 0..m * m {
            p.add_constraint([(h[ij], 1.0), (w[s + 1][ij], -1.0), (w[s][ij], 1.0)], ComparisonOp::Ge, 0.0);
            p.add_constraint([(h[ij], 1.0), (w[s + 1][ij], 1.0), (w[s][ij], -1.0)], ComparisonOp::Ge, 0.0);
        }
        if norm == NormKind::ColumnSum {
            let e = p.add_var(alpha, (0.0, f64::INFINITY));
            for j in 0..m {
                let mut col: Vec<_> = (0..m).map(|i| (h[i * m + j], 1.0)).collect();
                col.push((e, -1.0));
                p.add_constraint(&col, ComparisonOp::Le, 0.0);
            }
        }
    }
    p.solve().expect("reference LP is feasible and bounded").objective()
}

/// Relative difference with an absolute floor.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-9)
}
