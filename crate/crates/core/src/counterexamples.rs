//! Concrete instances on which MOTP or the budgeted switch count misbehave.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::permutation::{Permutation, PermutationSequence};
use crate::trajectory::{ExtendedMetricParams, Trajectory, TrajectorySet};

/// Threshold the unscaled crossing construction is built for; any `1 < thr < 2` works.
const BASE_THR: f64 = 1.5;
/// Frame (1-based) at which the `B` tracks jump.
const JUMP_FRAME: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Counterexample {
    /// MOTP prefers a late identity switch over a nearly perfect constant association.
    MotpSwitch,
    /// MOTP violates the triangle inequality.
    MotpTriangle,
    /// The budgeted switch count is not subadditive under composition.
    MaxcountComposition,
    /// The budgeted switch count yields a distance violating the triangle inequality.
    MaxcountTriangle,
}

impl Counterexample {
    pub const ALL: [Counterexample; 4] = [
        Counterexample::MotpSwitch,
        Counterexample::MotpTriangle,
        Counterexample::MaxcountComposition,
        Counterexample::MaxcountTriangle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Counterexample::MotpSwitch => "motp-switch",
            Counterexample::MotpTriangle => "motp-triangle",
            Counterexample::MaxcountComposition => "maxcount-composition",
            Counterexample::MaxcountTriangle => "maxcount-triangle",
        }
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Counterexample {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown counterexample '{s}'")))
    }
}

/// Three sets together with the miss penalty and spatial scale they were built for.
#[derive(Debug, Clone)]
pub struct CrossingSets {
    pub a: TrajectorySet,
    pub b: TrajectorySet,
    pub c: TrajectorySet,
    /// `thr / 1.5`: every distance in the construction is a multiple of this.
    pub scale: f64,
    pub params: ExtendedMetricParams,
    /// Number of crossing pairs stacked in the instance.
    pub pairs: usize,
}

/// Two tracks at 0 and 1 whose `B` counterparts jump to 2 and −1 for a single frame.
///
/// With `1 < thr < 2` (before scaling) the CLEAR MOT association for `(A, B)` swaps at the
/// jump and then stays anchored to the swapped pairing at distance 1 per track, while the
/// constant pairing only pays for the jump. `C` keeps `A`'s first track and `B`'s second,
/// so `(A, C)` and `(C, B)` each differ at a single point.
///
/// Coordinates are scaled by `thr / 1.5` so the construction works for any `thr > 0`.
/// For `m > 2` each crossing pair is placed on its own horizontal line far from the
/// others (2-D states); odd `m` adds one identical far-away track to every set.
pub fn motp_crossing(thr: f64, t_horizon: usize, m: usize) -> Result<CrossingSets> {
    if !(thr.is_finite() && thr > 0.0) {
        return Err(Error::invalid(format!("thr must be positive, got {thr}")));
    }
    if t_horizon < 13 {
        return Err(Error::invalid("the crossing construction needs T >= 13"));
    }
    if m < 2 {
        return Err(Error::invalid("the crossing construction needs at least two trajectories per set"));
    }
    let s = thr / BASE_THR;
    let pairs = m / 2;
    let planar = m > 2;
    let spacing = 100.0 * s;
    let track = |k: usize, f: &dyn Fn(u32) -> f64| -> Trajectory {
        let pts = (1..=t_horizon as u32).map(|t| {
            let x = s * f(t);
            if planar {
                (t, vec![x, spacing * k as f64])
            } else {
                (t, vec![x])
            }
        });
        Trajectory::from_pairs(pts).expect("valid construction")
    };
    let a1 = |_: u32| 0.0;
    let a2 = |_: u32| 1.0;
    let b1 = |t: u32| if t == JUMP_FRAME { 2.0 } else { 0.0 };
    let b2 = |t: u32| if t == JUMP_FRAME { -1.0 } else { 1.0 };
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..pairs {
        a.extend([track(k, &a1), track(k, &a2)]);
        b.extend([track(k, &b1), track(k, &b2)]);
        c.extend([track(k, &a1), track(k, &b2)]);
    }
    if m % 2 == 1 {
        for set in [&mut a, &mut b, &mut c] {
            set.push(track(pairs, &a1));
        }
    }
    Ok(CrossingSets {
        a: TrajectorySet::new(a)?,
        b: TrajectorySet::new(b)?,
        c: TrajectorySet::new(c)?,
        scale: s,
        params: ExtendedMetricParams::euclidean(10.0 * s)?,
        pairs,
    })
}

/// `Σ = (I, σ₀, σ₀)` and `Σ' = (I, I, σ₀)` with `σ₀ = (2,1)`: each switches once but
/// `Σ' ∘ Σ` switches twice.
pub fn maxcount_sequences() -> (PermutationSequence, PermutationSequence) {
    let id = Permutation::identity(2);
    let s0 = Permutation::from_one_based(&[2, 1]).expect("valid");
    let sigma = PermutationSequence::new(vec![id.clone(), s0.clone(), s0.clone()]).expect("valid");
    let sigma_prime = PermutationSequence::new(vec![id.clone(), id, s0]).expect("valid");
    (sigma, sigma_prime)
}

/// Three two-track sets on frames 1..3 where `A`→`B` and `B`→`C` each need one switch
/// to match exactly but `A`→`C` needs two.
pub fn maxcount_triangle() -> (TrajectorySet, TrajectorySet, TrajectorySet, ExtendedMetricParams) {
    let set = |tracks: [[f64; 3]; 2]| -> TrajectorySet {
        tracks
            .iter()
            .map(|v| Trajectory::from_series(&v.map(Some)).expect("valid"))
            .collect()
    };
    (
        set([[2.0, -2.0, -2.0], [-2.0, 2.0, 2.0]]),
        set([[2.0, 2.0, 2.0], [-2.0, -2.0, -2.0]]),
        set([[2.0, 2.0, -2.0], [-2.0, -2.0, 2.0]]),
        ExtendedMetricParams::euclidean(10.0).expect("valid"),
    )
}
