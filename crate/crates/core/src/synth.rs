//! Synthetic ground truth and distorted hypotheses with four distortion knobs.
//!
//! Ground-truth tracks are born uniformly on `[1, T/2]`, die uniformly on
//! `[birth + T/4, T]`, start uniformly in `[0, 100]ᵖ` and move at a per-track speed drawn
//! from `[0.5, 2]` along a heading that is redrawn with probability 0.1 at every step.
//!
//! The hypothesis is derived in a fixed order: fragmentation, fragment removal, point
//! deletion, additive noise, identity swaps. Each stage draws from its own ChaCha8 stream
//! and the first four consume the same number of draws whatever the knob values, so two
//! configurations that differ in one knob share all other randomness.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comp::tradeoff::{default_alpha_grid, default_threshold_grid, motp_curve_matrices, normalized_auc, tradeoff_curve_matrices};
use crate::comp::CompParams;
use crate::error::{Error, Result};
use crate::trajectory::{pair_distances, DistanceMatrixSequence, ExtendedMetricParams, Trajectory, TrajectorySet};

const BOX_SIZE: f64 = 100.0;
const SPEED_RANGE: (f64, f64) = (0.5, 2.0);
const HEADING_CHANGE_PROB: f64 = 0.1;

const STREAM_TRUTH: u64 = 0;
const STREAM_FRAGMENT: u64 = 1;
const STREAM_DROP: u64 = 2;
const STREAM_DELETE: u64 = 3;
const STREAM_NOISE: u64 = 4;
const STREAM_SWAP: u64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub n_traj: usize,
    pub t_horizon: usize,
    pub state_dim: usize,
    /// Half-width of the per-coordinate uniform noise.
    pub amp_noise: f64,
    /// Probability of splitting a track at each interior instant.
    pub frag_prob: f64,
    /// Probability of deleting each point.
    pub del_prob: f64,
    /// Tracks closer than this may exchange identities.
    pub swi_dist: f64,
    /// Probability of removing each fragment.
    pub frag_drop_prob: f64,
    /// Probability that an encounter exchanges identities.
    pub swap_prob: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            n_traj: 25,
            t_horizon: 50,
            state_dim: 2,
            amp_noise: 0.0,
            frag_prob: 0.0,
            del_prob: 0.0,
            swi_dist: 0.0,
            frag_drop_prob: 0.0,
            swap_prob: 0.5,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::invalid("n_traj must be at least 1"));
        }
        if self.t_horizon < 2 {
            return Err(Error::invalid("t_horizon must be at least 2"));
        }
        if self.t_horizon > u32::MAX as usize {
            return Err(Error::invalid("t_horizon is too large"));
        }
        if self.state_dim == 0 {
            return Err(Error::invalid("state_dim must be at least 1"));
        }
        for (name, v) in [("amp_noise", self.amp_noise), ("swi_dist", self.swi_dist)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be nonnegative and finite, got {v}")));
            }
        }
        for (name, p) in [
            ("frag_prob", self.frag_prob),
            ("del_prob", self.del_prob),
            ("frag_drop_prob", self.frag_drop_prob),
            ("swap_prob", self.swap_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    pub fn with_knob(&self, knob: Knob, value: f64) -> Self {
        let mut c = self.clone();
        match knob {
            Knob::AmpNoise => c.amp_noise = value,
            Knob::FragProb => c.frag_prob = value,
            Knob::DelProb => c.del_prob = value,
            Knob::SwiDist => c.swi_dist = value,
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knob {
    AmpNoise,
    FragProb,
    DelProb,
    SwiDist,
}

impl Knob {
    pub const ALL: [Knob; 4] = [Knob::AmpNoise, Knob::FragProb, Knob::DelProb, Knob::SwiDist];

    pub fn name(self) -> &'static str {
        match self {
            Knob::AmpNoise => "amp_noise",
            Knob::FragProb => "frag_prob",
            Knob::DelProb => "del_prob",
            Knob::SwiDist => "swi_dist",
        }
    }
}

impl FromStr for Knob {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "amp_noise" | "amp" | "noise" => Ok(Knob::AmpNoise),
            "frag_prob" | "frag" => Ok(Knob::FragProb),
            "del_prob" | "del" => Ok(Knob::DelProb),
            "swi_dist" | "swi" | "swap" => Ok(Knob::SwiDist),
            _ => Err(Error::invalid(format!("unknown knob '{s}'"))),
        }
    }
}

impl fmt::Display for Knob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn random_heading(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

type Track = BTreeMap<u32, Vec<f64>>;

fn ground_truth(cfg: &GenConfig) -> Vec<Track> {
    let mut rng = stream(cfg.seed, STREAM_TRUTH);
    let t = cfg.t_horizon as u32;
    (0..cfg.n_traj)
        .map(|_| {
            let birth = rng.random_range(1..=(t / 2).max(1));
            let death = rng.random_range((birth + t / 4).min(t)..=t);
            let mut pos: Vec<f64> = (0..cfg.state_dim).map(|_| rng.random_range(0.0..=BOX_SIZE)).collect();
            let speed = rng.random_range(SPEED_RANGE.0..=SPEED_RANGE.1);
            let mut heading = random_heading(&mut rng, cfg.state_dim);
            let mut track = Track::new();
            for frame in birth..=death {
                track.insert(frame, pos.clone());
                if rng.random_bool(HEADING_CHANGE_PROB) {
                    heading = random_heading(&mut rng, cfg.state_dim);
                }
                pos.iter_mut().zip(&heading).for_each(|(x, h)| *x += speed * h);
            }
            track
        })
        .collect()
}

fn to_set(tracks: Vec<Track>) -> Result<TrajectorySet> {
    let trajectories = tracks.into_iter().filter(|t| !t.is_empty()).map(Trajectory::new).collect::<Result<Vec<_>>>()?;
    TrajectorySet::new(trajectories)
}

/// Ground truth `A` and distorted hypothesis `B`; a pure function of `cfg`.
pub fn generate_pair(cfg: &GenConfig) -> Result<(TrajectorySet, TrajectorySet)> {
    cfg.validate()?;
    let truth = ground_truth(cfg);

    let mut frag_rng = stream(cfg.seed, STREAM_FRAGMENT);
    let mut drop_rng = stream(cfg.seed, STREAM_DROP);
    let mut del_rng = stream(cfg.seed, STREAM_DELETE);
    let mut noise_rng = stream(cfg.seed, STREAM_NOISE);

    let mut hyp: Vec<Track> = Vec::new();
    for track in &truth {
        let mut fragments = vec![Track::new()];
        for (k, (&frame, x)) in track.iter().enumerate() {
            let split = k > 0 && frag_rng.random::<f64>() < cfg.frag_prob;
            if split {
                fragments.push(Track::new());
            }
            let deleted = del_rng.random::<f64>() < cfg.del_prob;
            let noise: Vec<f64> = x.iter().map(|_| noise_rng.random_range(-1.0..=1.0)).collect();
            if !deleted {
                let noisy = x.iter().zip(&noise).map(|(v, n)| v + cfg.amp_noise * n).collect();
                fragments.last_mut().expect("nonempty").insert(frame, noisy);
            }
        }
        // One draw per potential fragment keeps the stream aligned across `frag_prob`.
        let drops: Vec<bool> = (0..track.len()).map(|_| drop_rng.random::<f64>() < cfg.frag_drop_prob).collect();
        hyp.extend(fragments.into_iter().zip(drops).filter(|(f, dropped)| !dropped && !f.is_empty()).map(|(f, _)| f));
    }

    if cfg.swi_dist > 0.0 && cfg.swap_prob > 0.0 {
        apply_swaps(&mut hyp, cfg);
    }
    Ok((to_set(truth)?, to_set(hyp)?))
}

/// Exchanges the remainders of two tracks, from the first instant of each encounter
/// closer than `swi_dist`, with probability `swap_prob`.
fn apply_swaps(hyp: &mut [Track], cfg: &GenConfig) {
    let mut rng = stream(cfg.seed, STREAM_SWAP);
    let n = hyp.len();
    let mut close_before = vec![false; n * n];
    for frame in 1..=cfg.t_horizon as u32 {
        for i in 0..n {
            for j in i + 1..n {
                let close = match (hyp[i].get(&frame), hyp[j].get(&frame)) {
                    (Some(x), Some(y)) => {
                        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() < cfg.swi_dist
                    }
                    _ => false,
                };
                if close && !close_before[i * n + j] && rng.random::<f64>() < cfg.swap_prob {
                    let tail_i = hyp[i].split_off(&frame);
                    let tail_j = hyp[j].split_off(&frame);
                    hyp[i].extend(tail_j);
                    hyp[j].extend(tail_i);
                }
                close_before[i * n + j] = close;
            }
        }
    }
}

/// Evaluation settings for [`knob_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub params: ExtendedMetricParams,
    /// Solver settings for the convex metric; `alpha` is replaced by the grid.
    pub comp: CompParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSample {
    pub value: f64,
    pub repeat: usize,
    pub seed: u64,
    pub auc_comp: f64,
    pub auc_motp: f64,
    /// Whether every point of the convex curve met the solver tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub n: usize,
    pub mean_auc_comp: f64,
    pub se_auc_comp: f64,
    pub mean_auc_motp: f64,
    pub se_auc_motp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub knob: Knob,
    pub rows: Vec<SweepRow>,
    pub samples: Vec<SweepSample>,
}

/// Normalized AUC of the convex-metric curve and of the CLEAR MOT curve for one pair,
/// plus whether every convex solve converged.
pub fn pair_aucs(a: &TrajectorySet, b: &TrajectorySet, settings: &SweepSettings) -> Result<(f64, f64, bool)> {
    pair_aucs_matrices(&pair_distances(a, b, &settings.params)?, settings)
}

/// [`pair_aucs`] on precomputed distance matrices.
pub fn pair_aucs_matrices(d: &DistanceMatrixSequence, settings: &SweepSettings) -> Result<(f64, f64, bool)> {
    let norm = settings.comp.norm;
    let comp = tradeoff_curve_matrices(d, &default_alpha_grid(d), &settings.comp)?;
    if let Some(failed) = comp.points.iter().find_map(|p| p.error.clone()) {
        return Err(Error::invalid(format!("convex solve failed: {failed}")));
    }
    let motp = motp_curve_matrices(d, &default_threshold_grid(settings.params.miss_penalty()), norm)?;
    let converged = comp.points.iter().all(|p| p.converged);
    Ok((normalized_auc(&comp, d, norm)?, normalized_auc(&motp, d, norm)?, converged))
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sweeps one knob over `values`; repeat `r` uses seed `base.seed + r` at every value.
pub fn knob_sweep(base: &GenConfig, knob: Knob, values: &[f64], n_repeats: usize, settings: &SweepSettings) -> Result<SweepReport> {
    if values.is_empty() || n_repeats == 0 {
        return Err(Error::invalid("knob sweep needs at least one value and one repeat"));
    }
    let cells: Vec<(f64, usize)> = values.iter().flat_map(|&v| (0..n_repeats).map(move |r| (v, r))).collect();
    let samples = cells
        .par_iter()
        .map(|&(value, repeat)| {
            let cfg = GenConfig { seed: base.seed.wrapping_add(repeat as u64), ..base.with_knob(knob, value) };
            let (a, b) = generate_pair(&cfg)?;
            let (auc_comp, auc_motp, converged) = pair_aucs(&a, &b, settings)?;
            Ok(SweepSample { value, repeat, seed: cfg.seed, auc_comp, auc_motp, converged })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = samples
        .chunks(n_repeats)
        .map(|chunk| {
            let comp: Vec<f64> = chunk.iter().map(|s| s.auc_comp).collect();
            let motp: Vec<f64> = chunk.iter().map(|s| s.auc_motp).collect();
            let (mean_auc_comp, se_auc_comp) = mean_se(&comp);
            let (mean_auc_motp, se_auc_motp) = mean_se(&motp);
            SweepRow { value: chunk[0].value, n: chunk.len(), mean_auc_comp, se_auc_comp, mean_auc_motp, se_auc_motp }
        })
        .collect();
    Ok(SweepReport { knob, rows, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> GenConfig {
        GenConfig { n_traj: 6, t_horizon: 30, seed: 11, ..Default::default() }
    }

    #[test]
    fn lifetimes_follow_the_documented_ranges() {
        let c = GenConfig { n_traj: 200, t_horizon: 40, ..cfg() };
        for tr in ground_truth(&c) {
            let (&b, &d) = (tr.keys().next().unwrap(), tr.keys().next_back().unwrap());
            assert!((1..=20).contains(&b), "birth {b}");
            assert!(d >= b + 10 && d <= 40, "death {d} birth {b}");
            assert_eq!(tr.len() as u32, d - b + 1);
        }
    }

    #[test]
    fn no_distortion_copies_the_truth() {
        let (a, b) = generate_pair(&cfg()).unwrap();
        assert!(a.set_eq(&b));
        assert_eq!(a.len(), 6);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = GenConfig { amp_noise: 1.0, frag_prob: 0.1, del_prob: 0.1, swi_dist: 5.0, ..cfg() };
        assert_eq!(generate_pair(&c).unwrap(), generate_pair(&c).unwrap());
        let other = GenConfig { seed: 12, ..c.clone() };
        assert_ne!(generate_pair(&c).unwrap().0, generate_pair(&other).unwrap().0);
    }

    #[test]
    fn full_deletion_empties_the_hypothesis() {
        let (a, b) = generate_pair(&GenConfig { del_prob: 1.0, ..cfg() }).unwrap();
        assert!(b.is_empty());
        assert_eq!(a.len(), 6);
    }

    #[test]
    fn fragmentation_keeps_every_point() {
        let c = GenConfig { frag_prob: 0.3, ..cfg() };
        let (a, b) = generate_pair(&c).unwrap();
        assert!(b.len() > a.len());
        assert_eq!(a.num_points(), b.num_points());
    }

    #[test]
    fn swaps_preserve_points_per_frame() {
        let c = GenConfig { n_traj: 15, swi_dist: 30.0, swap_prob: 1.0, ..cfg() };
        let (a, b) = generate_pair(&c).unwrap();
        assert!(!a.set_eq(&b));
        let frames = |s: &TrajectorySet| {
            let mut all: Vec<(u32, Vec<u64>)> = s
                .trajectories()
                .iter()
                .flat_map(|t| t.points().iter().map(|(&f, x)| (f, x.iter().map(|v| v.to_bits()).collect())))
                .collect();
            all.sort();
            all
        };
        assert_eq!(frames(&a), frames(&b));
    }

    #[test]
    fn config_validation() {
        assert!(GenConfig { t_horizon: 1, ..cfg() }.validate().is_err());
        assert!(GenConfig { del_prob: 1.5, ..cfg() }.validate().is_err());
        assert!(GenConfig { amp_noise: -1.0, ..cfg() }.validate().is_err());
        assert_eq!("del".parse::<Knob>().unwrap(), Knob::DelProb);
    }
}
