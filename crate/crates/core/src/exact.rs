//! OSPA, MOTP with the CLEAR MOT association, and exhaustive minimization over
//! permutation sequences.

use crate::assignment;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::permutation::{Permutation, PermutationSequence};
use crate::result::{Association, MetricResult};
use crate::switch_cost::{Cost, SwitchCost, SwitchCostKind};
use crate::trajectory::{pair_distances, DistanceMatrixSequence, ExtendedMetricParams, TrajectorySet};

/// Default limit on `(m!)^T` for exhaustive search.
pub const DEFAULT_ENUMERATION_CAP: f64 = 1e7;

pub fn ospa(a: &TrajectorySet, b: &TrajectorySet, params: &ExtendedMetricParams) -> Result<MetricResult> {
    Ok(ospa_matrices(&pair_distances(a, b, params)?))
}

/// Best single assignment held for every frame.
pub fn ospa_matrices(d: &DistanceMatrixSequence) -> MetricResult {
    if d.m() == 0 || d.t_horizon() == 0 {
        return MetricResult::empty();
    }
    let sol = assignment::solve(&d.summed());
    let p = Permutation::new(sol.mapping).expect("assignment is a permutation");
    let sigma = PermutationSequence::constant(p, d.t_horizon()).expect("T >= 1");
    let value = d.assignment_cost(sigma.mappings());
    MetricResult::exact(value, value, 0.0, 0.0, Association::Permutations { sigma, anchored: None })
}

fn check_thr(thr: f64) -> Result<()> {
    if thr.is_finite() && thr > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("thr must be positive and finite, got {thr}")))
    }
}

/// The CLEAR MOT sequential association: frame 1 is a minimum-cost assignment; at
/// each later frame the previous matches with `d⁺ < thr` are kept (anchored) and the
/// remaining rows are completed by a minimum-cost assignment over the free columns.
/// Ties go to the lexicographically smallest assignment.
pub fn clear_mot_association(d: &DistanceMatrixSequence, thr: f64) -> Result<(PermutationSequence, Vec<Vec<bool>>)> {
    check_thr(thr)?;
    let (m, t_horizon) = (d.m(), d.t_horizon());
    if t_horizon == 0 {
        return Err(Error::invalid("association needs at least one frame"));
    }
    let first = assignment::solve(d.frame(0)).mapping;
    let mut frames = vec![Permutation::new(first).expect("assignment is a permutation")];
    let mut anchored = vec![vec![false; m]];
    for t in 1..t_horizon {
        let dt = d.frame(t);
        let prev = frames[t - 1].as_slice();
        let mut mapping = vec![usize::MAX; m];
        let mut col_taken = vec![false; m];
        let mut anchors = vec![false; m];
        for (i, &j) in prev.iter().enumerate() {
            if dt[(i, j)] < thr {
                mapping[i] = j;
                col_taken[j] = true;
                anchors[i] = true;
            }
        }
        let free_rows: Vec<usize> = (0..m).filter(|&i| !anchors[i]).collect();
        let free_cols: Vec<usize> = (0..m).filter(|&j| !col_taken[j]).collect();
        if !free_rows.is_empty() {
            let sub = SquareMatrix::from_fn(free_rows.len(), |r, c| dt[(free_rows[r], free_cols[c])]);
            for (r, c) in assignment::solve(&sub).mapping.into_iter().enumerate() {
                mapping[free_rows[r]] = free_cols[c];
            }
        }
        frames.push(Permutation::new(mapping).expect("anchors and completion form a permutation"));
        anchored.push(anchors);
    }
    Ok((PermutationSequence::new(frames)?, anchored))
}

pub fn motp(a: &TrajectorySet, b: &TrajectorySet, thr: f64, params: &ExtendedMetricParams) -> Result<MetricResult> {
    motp_matrices(&pair_distances(a, b, params)?, thr)
}

/// Sum of `d⁺` along the CLEAR MOT association. `raw_switch` is the number of association changes.
pub fn motp_matrices(d: &DistanceMatrixSequence, thr: f64) -> Result<MetricResult> {
    check_thr(thr)?;
    if d.m() == 0 || d.t_horizon() == 0 {
        return Ok(MetricResult::empty());
    }
    let (sigma, anchored) = clear_mot_association(d, thr)?;
    let value = d.assignment_cost(sigma.mappings());
    let switches = sigma.switch_count() as f64;
    Ok(MetricResult::exact(value, value, 0.0, switches, Association::Permutations { sigma, anchored: Some(anchored) }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwiDist {
    /// Fraction of frame transitions where the association changes; 0 when `T = 1`.
    pub swi: f64,
    /// Average per-frame matched distance `(1/T) Σ_t Σ_i d⁺(A⁺_i(t), B⁺_{σ_i(t)}(t))`.
    pub dist: f64,
}

pub fn swi_dist(sigma: &PermutationSequence, d: &DistanceMatrixSequence) -> Result<SwiDist> {
    if sigma.len() != d.t_horizon() {
        return Err(Error::SizeMismatch { left: sigma.len(), right: d.t_horizon() });
    }
    if sigma.m() != d.m() {
        return Err(Error::SizeMismatch { left: sigma.m(), right: d.m() });
    }
    let t = d.t_horizon() as f64;
    let swi = if d.t_horizon() > 1 { sigma.switch_count() as f64 / (t - 1.0) } else { 0.0 };
    Ok(SwiDist { swi, dist: d.assignment_cost(sigma.mappings()) / t })
}

/// Exact optimum over permutation sequences of `Σ_t step(σ(t), σ(t+1)) + Σ_t Σ_i D(t)_{iσ_i(t)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOptimum {
    pub value: f64,
    pub dist_term: f64,
    pub swi_term: f64,
    pub sigma: PermutationSequence,
}

fn enumeration_count(m: usize, t_horizon: usize) -> f64 {
    let factorial: f64 = (1..=m).map(|i| i as f64).product();
    factorial.powi(t_horizon as i32)
}

/// Depth-first branch-and-bound over `Π^T`. `step` may return `f64::INFINITY`; when
/// `budget` is set, partial sequences whose accumulated step cost exceeds it are infeasible.
/// Among exact ties the lexicographically first sequence is returned.
pub fn min_over_permutation_sequences(
    d: &DistanceMatrixSequence,
    step: impl Fn(&Permutation, &Permutation) -> f64,
    budget: Option<f64>,
    cap: f64,
) -> Result<SequenceOptimum> {
    let (m, t_horizon) = (d.m(), d.t_horizon());
    if t_horizon == 0 {
        return Err(Error::invalid("search needs at least one frame"));
    }
    let evaluations = enumeration_count(m, t_horizon);
    if evaluations > cap {
        return Err(Error::InstanceTooLarge { evaluations, cap });
    }
    let perms = Permutation::all(m);
    let np = perms.len();
    let frame_cost: Vec<Vec<f64>> = d
        .frames()
        .iter()
        .map(|dt| {
            perms
                .iter()
                .map(|p| p.as_slice().iter().enumerate().map(|(i, &j)| dt[(i, j)]).sum())
                .collect()
        })
        .collect();
    let step_table: Vec<f64> = if t_horizon > 1 {
        perms.iter().flat_map(|a| perms.iter().map(|b| step(a, b))).collect()
    } else {
        Vec::new()
    };
    let mut suffix = vec![0.0; t_horizon + 1];
    for t in (0..t_horizon).rev() {
        suffix[t] = suffix[t + 1] + frame_cost[t].iter().copied().fold(f64::INFINITY, f64::min);
    }

    // A constant sequence is always feasible; it seeds the bound.
    let constant_best = (0..np)
        .map(|p| frame_cost.iter().map(|fc| fc[p]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let mut search = Search {
        frame_cost: &frame_cost,
        step_table: &step_table,
        suffix: &suffix,
        np,
        budget,
        bound: constant_best * (1.0 + 1e-12),
        best: None,
        path: Vec::with_capacity(t_horizon),
    };
    search.dfs(0, None, 0.0, 0.0);
    let (value, dist_term, swi_term, path) = search.best.expect("a constant sequence is within the bound");
    let sigma = PermutationSequence::new(path.into_iter().map(|p| perms[p].clone()).collect())?;
    Ok(SequenceOptimum { value, dist_term, swi_term, sigma })
}

struct Search<'a> {
    frame_cost: &'a [Vec<f64>],
    step_table: &'a [f64],
    suffix: &'a [f64],
    np: usize,
    budget: Option<f64>,
    bound: f64,
    best: Option<(f64, f64, f64, Vec<usize>)>,
    path: Vec<usize>,
}

impl Search<'_> {
    fn dfs(&mut self, t: usize, prev: Option<usize>, dist: f64, swi: f64) {
        if t == self.frame_cost.len() {
            let value = dist + swi;
            if self.best.as_ref().is_none_or(|b| value < b.0) {
                self.best = Some((value, dist, swi, self.path.clone()));
                self.bound = self.bound.min(value);
            }
            return;
        }
        for p in 0..self.np {
            let s = match prev {
                Some(q) => swi + self.step_table[q * self.np + p],
                None => swi,
            };
            if !s.is_finite() || self.budget.is_some_and(|b| s > b) {
                continue;
            }
            let dd = dist + self.frame_cost[t][p];
            if dd + s + self.suffix[t + 1] > self.bound {
                continue;
            }
            self.path.push(p);
            self.dfs(t + 1, Some(p), dd, s);
            self.path.pop();
        }
    }
}

pub fn d_nat_bruteforce(a: &TrajectorySet, b: &TrajectorySet, k: &SwitchCost, params: &ExtendedMetricParams) -> Result<MetricResult> {
    d_nat_matrices(&pair_distances(a, b, params)?, k, DEFAULT_ENUMERATION_CAP)
}

/// `min_Σ K(Σ) + Σ_t Σ_i D(t)_{iσ_i(t)}` by exhaustive search.
pub fn d_nat_matrices(d: &DistanceMatrixSequence, k: &SwitchCost, cap: f64) -> Result<MetricResult> {
    if d.m() == 0 || d.t_horizon() == 0 {
        return Ok(MetricResult::empty());
    }
    let budget = match k.kind() {
        SwitchCostKind::Maxcount => Some(f64::from(k.beta())),
        _ => None,
    };
    let opt = min_over_permutation_sequences(
        d,
        |p, q| match k.from_units(k.step_units(p, q)) {
            Cost::Finite(v) => v,
            Cost::Infinite => f64::INFINITY,
        },
        budget,
        cap,
    )?;
    let units: usize = opt.sigma.frames().windows(2).map(|w| k.step_units(&w[0], &w[1])).sum();
    Ok(MetricResult::exact(
        opt.value,
        opt.dist_term,
        opt.swi_term,
        units as f64,
        Association::Permutations { sigma: opt.sigma, anchored: None },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::Trajectory;

    fn set(series: &[&[Option<f64>]]) -> TrajectorySet {
        series.iter().map(|s| Trajectory::from_series(s).unwrap()).collect()
    }

    fn full(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn ospa_of_identical_sets_is_zero() {
        let a = set(&[&full(&[0.0, 1.0]), &full(&[3.0, 2.0])]);
        let r = ospa(&a, &a, &ExtendedMetricParams::euclidean(1.0).unwrap()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn empty_sets() {
        let p = ExtendedMetricParams::euclidean(1.0).unwrap();
        let e = TrajectorySet::empty();
        assert_eq!(ospa(&e, &e, &p).unwrap().value, 0.0);
        assert_eq!(motp(&e, &e, 0.5, &p).unwrap().value, 0.0);
        assert_eq!(d_nat_bruteforce(&e, &e, &SwitchCost::count(1.0).unwrap(), &p).unwrap().value, 0.0);
    }

    #[test]
    fn one_empty_side_costs_m_per_point() {
        let p = ExtendedMetricParams::euclidean(2.0).unwrap();
        let a = set(&[&[Some(0.0), None, Some(1.0)]]);
        let e = TrajectorySet::empty();
        assert_eq!(ospa(&a, &e, &p).unwrap().value, 4.0);
        assert_eq!(ospa(&e, &a, &p).unwrap().value, 4.0);
    }

    #[test]
    fn motp_rejects_bad_threshold() {
        let a = set(&[&full(&[0.0])]);
        let p = ExtendedMetricParams::euclidean(1.0).unwrap();
        assert!(motp(&a, &a, 0.0, &p).is_err());
        assert!(motp(&a, &a, f64::NAN, &p).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let d = DistanceMatrixSequence::from_matrices(4, vec![SquareMatrix::zeros(4); 6], 2.0).unwrap();
        let err = d_nat_matrices(&d, &SwitchCost::count(1.0).unwrap(), 1e7).unwrap_err();
        assert!(matches!(err, Error::InstanceTooLarge { .. }));
    }

    #[test]
    fn swi_dist_constant_sequence() {
        let a = set(&[&full(&[0.0, 0.0, 0.0])]);
        let b = set(&[&full(&[1.0, 0.0, 0.5])]);
        let d = pair_distances(&a, &b, &ExtendedMetricParams::euclidean(5.0).unwrap()).unwrap();
        let sigma = PermutationSequence::constant(Permutation::identity(2), 3).unwrap();
        let sd = swi_dist(&sigma, &d).unwrap();
        assert_eq!(sd.swi, 0.0);
        assert_eq!(sd.dist, 0.5);
    }
}
