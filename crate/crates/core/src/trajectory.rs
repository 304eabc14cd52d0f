//! Trajectories, padding to a common horizon, and the extended point metric.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// A state at one time instant: a point in ℝᵖ or the absent symbol `*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StatePoint {
    Absent,
    Present(Vec<f64>),
}

impl StatePoint {
    pub fn is_absent(&self) -> bool {
        matches!(self, StatePoint::Absent)
    }

    pub fn as_slice(&self) -> Option<&[f64]> {
        match self {
            StatePoint::Absent => None,
            StatePoint::Present(v) => Some(v),
        }
    }
}

impl From<f64> for StatePoint {
    fn from(x: f64) -> Self {
        StatePoint::Present(vec![x])
    }
}

/// Point metric `d` underlying the extended metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseMetric {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl BaseMetric {
    pub fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
        match self {
            BaseMetric::Euclidean => {
                if x.len() == 1 {
                    (x[0] - y[0]).abs()
                } else {
                    diffs.map(|d| d * d).sum::<f64>().sqrt()
                }
            }
            BaseMetric::Manhattan => diffs.sum(),
            BaseMetric::Chebyshev => diffs.fold(0.0, f64::max),
        }
    }
}

/// Miss penalty `M` and base metric of `d⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedMetricParams {
    miss_penalty: f64,
    base: BaseMetric,
}

impl ExtendedMetricParams {
    pub fn new(miss_penalty: f64, base: BaseMetric) -> Result<Self> {
        if !(miss_penalty.is_finite() && miss_penalty > 0.0) {
            return Err(Error::invalid(format!("miss penalty M must be a positive finite number, got {miss_penalty}")));
        }
        Ok(Self { miss_penalty, base })
    }

    pub fn euclidean(miss_penalty: f64) -> Result<Self> {
        Self::new(miss_penalty, BaseMetric::Euclidean)
    }

    pub fn miss_penalty(&self) -> f64 {
        self.miss_penalty
    }

    pub fn base(&self) -> BaseMetric {
        self.base
    }
}

/// The extended metric `d⁺` on ℝᵖ ∪ {*}: `d⁺(*,*) = 0`, `d⁺(x,*) = M`,
/// `d⁺(x,y) = min{2M, d(x,y)}`.
pub fn d_plus(x: &StatePoint, y: &StatePoint, params: &ExtendedMetricParams) -> Result<f64> {
    match (x, y) {
        (StatePoint::Absent, StatePoint::Absent) => Ok(0.0),
        (StatePoint::Absent, _) | (_, StatePoint::Absent) => Ok(params.miss_penalty),
        (StatePoint::Present(a), StatePoint::Present(b)) => {
            if a.len() != b.len() {
                return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
            }
            Ok(d_plus_present(a, b, params))
        }
    }
}

#[inline]
fn d_plus_present(a: &[f64], b: &[f64], params: &ExtendedMetricParams) -> f64 {
    params.base.eval(a, b).min(2.0 * params.miss_penalty)
}

/// A raw trajectory: states at strictly positive frame indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    points: BTreeMap<u32, Vec<f64>>,
}

impl Trajectory {
    pub fn new(points: BTreeMap<u32, Vec<f64>>) -> Result<Self> {
        let mut dim = None;
        if points.is_empty() {
            return Err(Error::invalid("a trajectory needs at least one point"));
        }
        for (&t, x) in &points {
            if t == 0 {
                return Err(Error::invalid("frame indices start at 1"));
            }
            if x.is_empty() {
                return Err(Error::invalid(format!("empty state at frame {t}")));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite state at frame {t}")));
            }
            match dim {
                None => dim = Some(x.len()),
                Some(p) if p != x.len() => return Err(Error::DimensionMismatch { expected: p, found: x.len() }),
                _ => {}
            }
        }
        Ok(Self { points })
    }

    pub fn from_pairs<I, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, V)>,
        V: Into<Vec<f64>>,
    {
        let mut points = BTreeMap::new();
        for (t, x) in pairs {
            if points.insert(t, x.into()).is_some() {
                return Err(Error::invalid(format!("duplicate frame {t}")));
            }
        }
        Self::new(points)
    }

    /// One-dimensional trajectory from `(frame, value)` pairs.
    pub fn from_scalar(pairs: &[(u32, f64)]) -> Result<Self> {
        Self::from_pairs(pairs.iter().map(|&(t, x)| (t, vec![x])))
    }

    /// One-dimensional trajectory sampled at frames `1..=values.len()`; `None` is a hole.
    pub fn from_series(values: &[Option<f64>]) -> Result<Self> {
        Self::from_pairs(
            values
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|x| (i as u32 + 1, vec![x]))),
        )
    }

    pub fn dim(&self) -> usize {
        self.points.values().next().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, t: u32) -> Option<&[f64]> {
        self.points.get(&t).map(Vec::as_slice)
    }

    pub fn points(&self) -> &BTreeMap<u32, Vec<f64>> {
        &self.points
    }

    pub fn first_frame(&self) -> u32 {
        *self.points.keys().next().expect("trajectory is non-empty")
    }

    pub fn last_frame(&self) -> u32 {
        *self.points.keys().next_back().expect("trajectory is non-empty")
    }

    /// Order-independent key used for set comparison.
    fn canonical_key(&self) -> Vec<(u32, Vec<u64>)> {
        self.points
            .iter()
            .map(|(&t, x)| (t, x.iter().map(|v| v.to_bits()).collect()))
            .collect()
    }
}

/// A finite, unordered set of trajectories.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySet {
    trajectories: Vec<Trajectory>,
    labels: Option<Vec<String>>,
}

impl TrajectorySet {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        let mut dim = None;
        for tr in &trajectories {
            match dim {
                None => dim = Some(tr.dim()),
                Some(p) if p != tr.dim() => return Err(Error::DimensionMismatch { expected: p, found: tr.dim() }),
                _ => {}
            }
        }
        Ok(Self { trajectories, labels: None })
    }

    pub fn with_labels(trajectories: Vec<Trajectory>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != trajectories.len() {
            return Err(Error::invalid("one label per trajectory is required"));
        }
        let mut set = Self::new(trajectories)?;
        set.labels = Some(labels);
        Ok(set)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Common state dimension, `None` for the empty set.
    pub fn dim(&self) -> Option<usize> {
        self.trajectories.first().map(Trajectory::dim)
    }

    /// Largest frame index present, 0 for the empty set.
    pub fn last_frame(&self) -> u32 {
        self.trajectories.iter().map(Trajectory::last_frame).max().unwrap_or(0)
    }

    pub fn num_points(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    /// Equality as unordered sets (up to relabeling), with exact state comparison.
    pub fn set_eq(&self, other: &TrajectorySet) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut a: Vec<_> = self.trajectories.iter().map(Trajectory::canonical_key).collect();
        let mut b: Vec<_> = other.trajectories.iter().map(Trajectory::canonical_key).collect();
        a.sort();
        b.sort();
        a == b
    }
}

impl FromIterator<Trajectory> for TrajectorySet {
    /// Panics on mixed dimensions; use [`TrajectorySet::new`] for fallible construction.
    fn from_iter<I: IntoIterator<Item = Trajectory>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect()).expect("trajectories share a state dimension")
    }
}

/// A trajectory padded with `*` so it is defined on every frame `1..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedTrajectory {
    states: Vec<StatePoint>,
}

impl ExtendedTrajectory {
    pub fn absent(t_horizon: usize) -> Self {
        Self { states: vec![StatePoint::Absent; t_horizon] }
    }

    pub fn from_trajectory(tr: &Trajectory, t_horizon: usize) -> Self {
        let mut states = vec![StatePoint::Absent; t_horizon];
        for (&t, x) in tr.points() {
            states[t as usize - 1] = StatePoint::Present(x.clone());
        }
        Self { states }
    }

    /// State at frame `t` (1-based).
    pub fn at(&self, t: usize) -> &StatePoint {
        &self.states[t - 1]
    }

    pub fn states(&self) -> &[StatePoint] {
        &self.states
    }

    pub fn is_all_absent(&self) -> bool {
        self.states.iter().all(StatePoint::is_absent)
    }
}

/// `A⁺` and `B⁺`: both sets padded to `m = k + l` trajectories of length `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedPair {
    pub a_plus: Vec<ExtendedTrajectory>,
    pub b_plus: Vec<ExtendedTrajectory>,
    pub m: usize,
    pub t_horizon: usize,
    /// State dimension; 0 when both sets are empty.
    pub p: usize,
    /// Number of original trajectories in A (`k`) and B (`l`).
    pub k: usize,
    pub l: usize,
}

pub fn extend_pair(a: &TrajectorySet, b: &TrajectorySet) -> Result<ExtendedPair> {
    let p = match (a.dim(), b.dim()) {
        (Some(pa), Some(pb)) if pa != pb => return Err(Error::DimensionMismatch { expected: pa, found: pb }),
        (Some(p), _) | (None, Some(p)) => p,
        (None, None) => 0,
    };
    let t_horizon = a.last_frame().max(b.last_frame()) as usize;
    let (k, l) = (a.len(), b.len());
    let m = k + l;
    let pad = |set: &TrajectorySet, extra: usize| -> Vec<ExtendedTrajectory> {
        set.trajectories()
            .iter()
            .map(|tr| ExtendedTrajectory::from_trajectory(tr, t_horizon))
            .chain(std::iter::repeat_with(|| ExtendedTrajectory::absent(t_horizon)).take(extra))
            .collect()
    };
    Ok(ExtendedPair { a_plus: pad(a, l), b_plus: pad(b, k), m, t_horizon, p, k, l })
}

/// Per-frame matrices `D(t)_{ij} = d⁺(A⁺_i(t), B⁺_j(t))` for `t = 1..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrixSequence {
    matrices: Vec<SquareMatrix>,
    m: usize,
    /// `2M`, the largest possible entry.
    cap: f64,
}

impl DistanceMatrixSequence {
    pub fn from_matrices(m: usize, matrices: Vec<SquareMatrix>, cap: f64) -> Result<Self> {
        for (t, d) in matrices.iter().enumerate() {
            if d.dim() != m {
                return Err(Error::invalid(format!("frame {} matrix is {}x{}, expected {m}x{m}", t + 1, d.dim(), d.dim())));
            }
            if d.as_slice().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::invalid(format!("frame {} has a negative or non-finite distance", t + 1)));
            }
        }
        Ok(Self { matrices, m, cap })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t_horizon(&self) -> usize {
        self.matrices.len()
    }

    /// Matrix at frame `t` (0-based).
    pub fn frame(&self, t: usize) -> &SquareMatrix {
        &self.matrices[t]
    }

    pub fn frames(&self) -> &[SquareMatrix] {
        &self.matrices
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn transpose(&self) -> Self {
        Self {
            matrices: self.matrices.iter().map(SquareMatrix::transpose).collect(),
            m: self.m,
            cap: self.cap,
        }
    }

    /// Sum over frames, the cost matrix of a constant association.
    pub fn summed(&self) -> SquareMatrix {
        let mut s = SquareMatrix::zeros(self.m);
        for d in &self.matrices {
            for (acc, v) in s.as_mut_slice().iter_mut().zip(d.as_slice()) {
                *acc += v;
            }
        }
        s
    }

    /// Total cost of a sequence of assignments, one row-to-column mapping per frame.
    pub fn assignment_cost<'a, I>(&self, mappings: I) -> f64
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        mappings
            .into_iter()
            .zip(&self.matrices)
            .map(|(map, d)| map.iter().enumerate().map(|(i, &j)| d[(i, j)]).sum::<f64>())
            .sum()
    }
}

pub fn distance_matrices(pair: &ExtendedPair, params: &ExtendedMetricParams) -> Result<DistanceMatrixSequence> {
    let m = pair.m;
    let mpen = params.miss_penalty();
    let matrices = (1..=pair.t_horizon)
        .map(|t| {
            SquareMatrix::from_fn(m, |i, j| match (pair.a_plus[i].at(t), pair.b_plus[j].at(t)) {
                (StatePoint::Absent, StatePoint::Absent) => 0.0,
                (StatePoint::Absent, _) | (_, StatePoint::Absent) => mpen,
                (StatePoint::Present(x), StatePoint::Present(y)) => d_plus_present(x, y, params),
            })
        })
        .collect();
    Ok(DistanceMatrixSequence { matrices, m, cap: 2.0 * mpen })
}

/// Shorthand for `distance_matrices(extend_pair(a, b))`.
pub fn pair_distances(a: &TrajectorySet, b: &TrajectorySet, params: &ExtendedMetricParams) -> Result<DistanceMatrixSequence> {
    distance_matrices(&extend_pair(a, b)?, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m01() -> ExtendedMetricParams {
        ExtendedMetricParams::euclidean(0.1).unwrap()
    }

    #[test]
    fn d_plus_definition_cases() {
        let p = m01();
        assert_eq!(d_plus(&StatePoint::Absent, &StatePoint::Absent, &p).unwrap(), 0.0);
        assert_eq!(d_plus(&(-1.0).into(), &StatePoint::Absent, &p).unwrap(), 0.1);
        assert_eq!(d_plus(&StatePoint::Absent, &(-1.0).into(), &p).unwrap(), 0.1);
        // min{2M, |−1.0 − (−0.9)|}
        let v = d_plus(&(-1.0).into(), &(-0.9).into(), &p).unwrap();
        assert!((v - 0.1).abs() < 1e-12);
        assert_eq!(d_plus(&5.0.into(), &(-5.0).into(), &p).unwrap(), 0.2);
    }

    #[test]
    fn d_plus_rejects_mixed_dimensions() {
        let x = StatePoint::Present(vec![0.0, 1.0]);
        let y = StatePoint::Present(vec![0.0]);
        assert!(matches!(d_plus(&x, &y, &m01()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn params_reject_nonpositive_m() {
        assert!(ExtendedMetricParams::euclidean(0.0).is_err());
        assert!(ExtendedMetricParams::euclidean(-1.0).is_err());
        assert!(ExtendedMetricParams::euclidean(f64::NAN).is_err());
    }

    #[test]
    fn extend_pads_to_k_plus_l() {
        let a: TrajectorySet = [
            Trajectory::from_series(&[Some(0.0), Some(1.0)]).unwrap(),
            Trajectory::from_series(&[Some(2.0)]).unwrap(),
        ]
        .into_iter()
        .collect();
        let b = a.clone();
        let pair = extend_pair(&a, &b).unwrap();
        assert_eq!(pair.m, 4);
        assert_eq!(pair.t_horizon, 2);
        assert!(pair.a_plus[2].is_all_absent() && pair.a_plus[3].is_all_absent());
        assert!(pair.b_plus[2].is_all_absent() && pair.b_plus[3].is_all_absent());
        assert_eq!(pair.a_plus[1].at(2), &StatePoint::Absent);
    }

    #[test]
    fn extend_empty_sets() {
        let pair = extend_pair(&TrajectorySet::empty(), &TrajectorySet::empty()).unwrap();
        assert_eq!((pair.m, pair.t_horizon, pair.p), (0, 0, 0));
        let d = distance_matrices(&pair, &m01()).unwrap();
        assert_eq!(d.t_horizon(), 0);
    }

    #[test]
    fn extend_holes_pattern() {
        // A on t ∈ {1,3,4,5}, B on t ∈ {2,3,4}.
        let a: TrajectorySet = [Trajectory::from_scalar(&[(1, 0.0), (3, 0.0), (4, 0.0), (5, 0.0)]).unwrap()].into_iter().collect();
        let b: TrajectorySet = [Trajectory::from_scalar(&[(2, 0.0), (3, 0.0), (4, 0.0)]).unwrap()].into_iter().collect();
        let pair = extend_pair(&a, &b).unwrap();
        assert_eq!(pair.t_horizon, 5);
        let absent_a: Vec<bool> = pair.a_plus[0].states().iter().map(StatePoint::is_absent).collect();
        let absent_b: Vec<bool> = pair.b_plus[0].states().iter().map(StatePoint::is_absent).collect();
        assert_eq!(absent_a, vec![false, true, false, false, false]);
        assert_eq!(absent_b, vec![true, false, false, false, true]);
    }

    #[test]
    fn extend_rejects_mixed_dimension_sets() {
        let a: TrajectorySet = [Trajectory::from_pairs([(1, vec![0.0, 0.0])]).unwrap()].into_iter().collect();
        let b: TrajectorySet = [Trajectory::from_scalar(&[(1, 0.0)]).unwrap()].into_iter().collect();
        assert!(extend_pair(&a, &b).is_err());
        assert!(TrajectorySet::new(vec![a.trajectories()[0].clone(), b.trajectories()[0].clone()]).is_err());
    }

    #[test]
    fn trajectory_invariants() {
        assert!(Trajectory::from_scalar(&[(0, 1.0)]).is_err());
        assert!(Trajectory::from_scalar(&[(1, 1.0), (1, 2.0)]).is_err());
        assert!(Trajectory::from_scalar(&[]).is_err());
        assert!(Trajectory::from_pairs([(1, vec![0.0]), (2, vec![0.0, 1.0])]).is_err());
    }

    #[test]
    fn set_equality_ignores_order() {
        let t1 = Trajectory::from_series(&[Some(1.0)]).unwrap();
        let t2 = Trajectory::from_series(&[Some(2.0)]).unwrap();
        let a = TrajectorySet::new(vec![t1.clone(), t2.clone()]).unwrap();
        let b = TrajectorySet::new(vec![t2, t1.clone()]).unwrap();
        assert!(a.set_eq(&b));
        assert!(!a.set_eq(&TrajectorySet::new(vec![t1]).unwrap()));
    }

    fn arb_state() -> impl Strategy<Value = StatePoint> {
        prop_oneof![
            1 => Just(StatePoint::Absent),
            4 => prop::collection::vec(-3.0f64..3.0, 2).prop_map(StatePoint::Present),
        ]
    }

    fn arb_set(max_tracks: usize, horizon: u32) -> impl Strategy<Value = TrajectorySet> {
        let track = prop::collection::btree_map(1..=horizon, prop::collection::vec(-3.0f64..3.0, 2), 1..=horizon as usize)
            .prop_map(|pts| Trajectory::new(pts).unwrap());
        prop::collection::vec(track, 0..=max_tracks).prop_map(|v| TrajectorySet::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn d_plus_is_a_metric(x in arb_state(), y in arb_state(), z in arb_state(), m in 0.05f64..3.0) {
            let p = ExtendedMetricParams::euclidean(m).unwrap();
            let dxy = d_plus(&x, &y, &p).unwrap();
            let dyx = d_plus(&y, &x, &p).unwrap();
            let dxz = d_plus(&x, &z, &p).unwrap();
            let dyz = d_plus(&y, &z, &p).unwrap();
            prop_assert!(dxy >= 0.0);
            prop_assert_eq!(dxy, dyx);
            prop_assert_eq!(dxy == 0.0, x == y);
            prop_assert!(dxz <= dxy + dyz + 1e-12);
            prop_assert!(dxy <= 2.0 * m);
        }

        #[test]
        fn swapping_sets_transposes_matrices(a in arb_set(3, 4), b in arb_set(3, 4)) {
            let p = ExtendedMetricParams::euclidean(1.0).unwrap();
            let dab = pair_distances(&a, &b, &p).unwrap();
            let dba = pair_distances(&b, &a, &p).unwrap();
            prop_assert_eq!(dab.transpose(), dba);
        }

        #[test]
        fn entries_bounded_and_misses_exact(a in arb_set(3, 4), b in arb_set(3, 4)) {
            let p = ExtendedMetricParams::euclidean(0.7).unwrap();
            let pair = extend_pair(&a, &b).unwrap();
            let d = distance_matrices(&pair, &p).unwrap();
            for t in 1..=pair.t_horizon {
                for i in 0..pair.m {
                    for j in 0..pair.m {
                        let v = d.frame(t - 1)[(i, j)];
                        prop_assert!(v <= 1.4);
                        let (x, y) = (pair.a_plus[i].at(t), pair.b_plus[j].at(t));
                        if x.is_absent() != y.is_absent() {
                            prop_assert_eq!(v, 0.7);
                        }
                    }
                }
            }
        }
    }
}
