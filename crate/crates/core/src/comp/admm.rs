//! Consensus ADMM for the convex association problem.
//!
//! Every frame matrix `Z(t)` has local copies: one constrained to have rows on the
//! probability simplex, one with columns on the simplex (each carrying half of the
//! linear cost), and, for each temporal edge `(t, t+1)`, a pair of copies coupled by the
//! norm penalty `α‖U − L‖`. All local steps are closed-form projections or proximal maps.
//!
//! Progress is certified by a duality gap: the primal side evaluates an exactly feasible
//! rounding of `Z`, the dual side turns the edge multipliers into a feasible point of the
//! dual norm ball and solves one assignment problem per frame.

use rayon::prelude::*;
use serde::Serialize;

use super::project::{
    dual_norm, project_simplex, project_simplex_masked, prox_norm, round_to_doubly_stochastic, sinkhorn_masked,
    ColsumWork,
};
use super::{feasible_mask, weights_result, CompParams, DoublyStochasticSequence, NormKind};
use crate::assignment;
use crate::error::Result;
use crate::matrix::SquareMatrix;
use crate::result::MetricResult;
use crate::trajectory::DistanceMatrixSequence;

/// One row of the optional iteration trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    /// Objective at the consensus iterate (not necessarily feasible).
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone)]
pub struct AdmmOutcome {
    pub result: MetricResult,
    pub trace: Vec<TraceRow>,
    /// Certified upper minus lower bound at exit.
    pub gap: f64,
}

/// Relative residual ratio that triggers a penalty update, and the update factor.
const BALANCE_RATIO: f64 = 3.0;
const BALANCE_FACTOR: f64 = 2.0;
/// Iterations between penalty updates, and the last iteration that may update it.
/// Stopping the updates keeps the usual convergence guarantee of fixed-penalty ADMM.
const BALANCE_EVERY: usize = 10;
const BALANCE_UNTIL: usize = 100;
/// Over-relaxation factor.
const RELAXATION: f64 = 1.5;

struct Problem<'a> {
    m: usize,
    t_horizon: usize,
    d: &'a [f64],
    alpha: f64,
    norm: NormKind,
    mask: Option<Vec<bool>>,
}

impl Problem<'_> {
    fn m2(&self) -> usize {
        self.m * self.m
    }

    fn edges(&self) -> usize {
        if self.alpha > 0.0 {
            self.t_horizon.saturating_sub(1)
        } else {
            0
        }
    }

    fn mask_frame(&self, t: usize) -> Option<&[bool]> {
        self.mask.as_deref().map(|mk| &mk[t * self.m2()..(t + 1) * self.m2()])
    }

    fn objective(&self, w: &[f64]) -> f64 {
        let m2 = self.m2();
        let dist: f64 = w.iter().zip(self.d).map(|(a, b)| a * b).sum();
        if self.alpha == 0.0 {
            return dist;
        }
        let swi: f64 = (0..self.t_horizon.saturating_sub(1))
            .map(|t| {
                let diff: Vec<f64> = w[(t + 1) * m2..(t + 2) * m2]
                    .iter()
                    .zip(&w[t * m2..(t + 1) * m2])
                    .map(|(a, b)| a - b)
                    .collect();
                self.norm.eval_slice(self.m, &diff)
            })
            .sum();
        dist + self.alpha * swi
    }

    /// Feasible rounding of a consensus iterate.
    fn round(&self, z: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut w = z.to_vec();
        w.par_chunks_mut(self.m2()).enumerate().for_each(|(t, frame)| match self.mask_frame(t) {
            Some(mk) => {
                sinkhorn_masked(frame, mk, m, 1e-12, 10_000);
            }
            None => round_to_doubly_stochastic(frame, m),
        });
        self.polish(&mut w);
        w
    }

    /// Greedy local improvement: copy a neighbouring frame's matrix whenever that lowers
    /// the objective. Merges the near-constant runs that rounding leaves slightly apart.
    fn polish(&self, w: &mut [f64]) {
        let (m, m2, t_horizon) = (self.m, self.m2(), self.t_horizon);
        if self.alpha == 0.0 || t_horizon < 2 {
            return;
        }
        let norm_diff = |w: &[f64], a: usize, b: usize, scratch: &mut Vec<f64>| {
            scratch.clear();
            scratch.extend(w[a * m2..(a + 1) * m2].iter().zip(&w[b * m2..(b + 1) * m2]).map(|(x, y)| x - y));
            self.norm.eval_slice(m, scratch)
        };
        let mut scratch = Vec::with_capacity(m2);
        // Replace frame `t` by frame `src` if that lowers the objective.
        let mut try_copy = |w: &mut [f64], t: usize, src: usize| {
            let (ft, fs) = (t * m2, src * m2);
            let dist_delta: f64 =
                self.d[ft..ft + m2].iter().zip(w[fs..fs + m2].iter().zip(&w[ft..ft + m2])).map(|(d, (a, b))| d * (a - b)).sum();
            let mut swi_delta = 0.0;
            for nb in [t.wrapping_sub(1), t + 1] {
                if nb < t_horizon {
                    let before = norm_diff(w, t, nb, &mut scratch);
                    let after = if nb == src { 0.0 } else { norm_diff(w, src, nb, &mut scratch) };
                    swi_delta += after - before;
                }
            }
            if dist_delta + self.alpha * swi_delta < 0.0 {
                w.copy_within(fs..fs + m2, ft);
            }
        };
        for t in 1..t_horizon {
            try_copy(w, t, t - 1);
        }
        for t in (0..t_horizon - 1).rev() {
            try_copy(w, t, t + 1);
        }
    }

    /// Lower bound `Σ_t min_{W ∈ 𝒫} ⟨D(t) + Y(t−1) − Y(t), W⟩` for edge multipliers `y`
    /// already scaled into the dual-norm ball of radius `α`.
    fn lower_bound(&self, y: &[f64]) -> f64 {
        let (m, m2) = (self.m, self.m2());
        let edges = self.edges();
        let big = self.mask.as_ref().map(|_| {
            let span = self.d.iter().fold(0.0f64, |a, v| a.max(v.abs())) + 2.0 * self.alpha.max(1.0);
            10.0 * span * m as f64 + 1.0
        });
        let per_frame: Vec<f64> = (0..self.t_horizon)
            .into_par_iter()
            .map(|t| {
                let mut c = self.d[t * m2..(t + 1) * m2].to_vec();
                if t > 0 && t - 1 < edges {
                    c.iter_mut().zip(&y[(t - 1) * m2..t * m2]).for_each(|(a, b)| *a += b);
                }
                if t < edges {
                    c.iter_mut().zip(&y[t * m2..(t + 1) * m2]).for_each(|(a, b)| *a -= b);
                }
                if let (Some(mk), Some(big)) = (self.mask_frame(t), big) {
                    c.iter_mut().zip(mk).filter(|(_, &a)| !a).for_each(|(v, _)| *v = big);
                }
                assignment::solve_any(&SquareMatrix::from_row_major(m, c)).cost
            })
            .collect();
        per_frame.iter().sum()
    }
}

/// Best feasible candidates that need no iteration: the best constant assignment and the
/// frame-wise optimal assignments.
fn permutation_candidates(p: &Problem<'_>, d: &DistanceMatrixSequence) -> Vec<Vec<f64>> {
    let (m, m2) = (p.m, p.m2());
    let frame_perms: Vec<Vec<usize>> = d.frames().par_iter().map(|dt| assignment::solve(dt).mapping).collect();
    let constant = assignment::solve(&d.summed()).mapping;
    let to_flat = |perms: &mut dyn Iterator<Item = &Vec<usize>>| {
        let mut w = vec![0.0; p.t_horizon * m2];
        for (t, perm) in perms.enumerate() {
            for (i, &j) in perm.iter().enumerate() {
                w[t * m2 + i * m + j] = 1.0;
            }
        }
        w
    };
    let mut out = vec![
        to_flat(&mut std::iter::repeat_n(&constant, p.t_horizon)),
        to_flat(&mut frame_perms.iter()),
    ];
    if let Some(mk) = &p.mask {
        out.retain(|w| w.iter().zip(mk).all(|(&v, &a)| a || v == 0.0));
    }
    out
}

fn default_rho(d: &[f64], alpha: f64) -> f64 {
    let mean = d.iter().sum::<f64>() / d.len().max(1) as f64;
    let rho = mean.max(alpha);
    if rho > 0.0 {
        rho
    } else {
        1.0
    }
}

/// What a solve at one `α` passes to the next, larger one on the same data. The objective
/// is nondecreasing in `α`, so the certified lower bound carries over, and the best point
/// stays feasible.
#[derive(Debug, Clone)]
pub struct AdmmState {
    alpha: f64,
    norm: NormKind,
    lower_bound: f64,
    best_w: Vec<f64>,
}

pub fn admm_solve(d: &DistanceMatrixSequence, cp: &CompParams) -> Result<AdmmOutcome> {
    Ok(admm_solve_from(d, cp, None)?.0)
}

/// [`admm_solve`] reusing the state of a solve at a smaller `α` on the same data.
pub fn admm_solve_from(
    d: &DistanceMatrixSequence,
    cp: &CompParams,
    warm: Option<&AdmmState>,
) -> Result<(AdmmOutcome, AdmmState)> {
    cp.validate()?;
    let (m, t_horizon) = (d.m(), d.t_horizon());
    if m == 0 || t_horizon == 0 {
        return Ok((
            AdmmOutcome { result: MetricResult::empty(), trace: Vec::new(), gap: 0.0 },
            AdmmState { alpha: cp.alpha, norm: cp.norm, lower_bound: 0.0, best_w: Vec::new() },
        ));
    }
    let mask = match cp.sparsify_threshold {
        Some(th) => Some(feasible_mask(d, th, cp.repair_sparsity)?),
        None => None,
    };
    let dflat: Vec<f64> = d.frames().iter().flat_map(|f| f.as_slice().iter().copied()).collect();
    let p = Problem { m, t_horizon, d: &dflat, alpha: cp.alpha, norm: cp.norm, mask };
    let m2 = p.m2();
    let n = t_horizon * m2;
    let edges = p.edges();
    let ne = edges * m2;

    let mut best_w: Option<Vec<f64>> = None;
    let mut best_p = f64::INFINITY;
    for w in permutation_candidates(&p, d) {
        let v = p.objective(&w);
        if v < best_p {
            best_p = v;
            best_w = Some(w);
        }
    }
    let mut best_lb = p.lower_bound(&vec![0.0; ne]);
    let warm = warm.filter(|w| w.alpha <= cp.alpha && w.norm == cp.norm && w.best_w.len() == n && p.mask.is_none());
    if let Some(w) = warm {
        best_lb = best_lb.max(w.lower_bound);
        let v = p.objective(&w.best_w);
        if v < best_p {
            best_p = v;
            best_w = Some(w.best_w.clone());
        }
    }
    let scale: f64 = d.frames().iter().map(|f| f.as_slice().iter().fold(0.0f64, |a, &v| a.max(v))).sum();
    let abs_eps = 1e-12 * scale.max(1.0);
    let gap_ok = |upper: f64, lower: f64| upper - lower <= cp.tol * upper.max(0.0) + abs_eps;

    let mut trace = Vec::new();
    let mut iterations = 0;
    if !gap_ok(best_p, best_lb) {
        let mut rho = cp.rho.unwrap_or_else(|| default_rho(&dflat, cp.alpha));
        let mut z = vec![1.0 / m as f64; n];
        if let Some(mk) = &p.mask {
            z.par_chunks_mut(m2).enumerate().for_each(|(t, frame)| {
                sinkhorn_masked(frame, &mk[t * m2..(t + 1) * m2], m, 1e-12, 10_000);
            });
        }
        let (mut ur, mut uc) = (vec![0.0; n], vec![0.0; n]);
        let (mut ul, mut uu) = (vec![0.0; ne], vec![0.0; ne]);
        let mut r = z.clone();
        let mut c = z.clone();
        let mut lo: Vec<f64> = z[..ne].to_vec();
        let mut up: Vec<f64> = z[m2..m2 + ne].to_vec();
        let mut z_prev = z.clone();
        let mut y = vec![0.0; ne];

        for iter in 1..=cp.max_iter {
            iterations = iter;
            let half = 0.5 / rho;

            // Row-simplex copies.
            r.par_chunks_mut(m2)
                .zip(ur.par_chunks(m2))
                .enumerate()
                .for_each_init(
                    || Vec::with_capacity(m),
                    |buf, (t, (rt, urt))| {
                        let zt = &z[t * m2..(t + 1) * m2];
                        let dt = &dflat[t * m2..(t + 1) * m2];
                        for k in 0..m2 {
                            rt[k] = zt[k] - urt[k] - half * dt[k];
                        }
                        let mk = p.mask_frame(t);
                        for i in 0..m {
                            let row = &mut rt[i * m..(i + 1) * m];
                            match mk {
                                Some(mk) => project_simplex_masked(row, &mk[i * m..(i + 1) * m], buf),
                                None => project_simplex(row),
                            }
                        }
                    },
                );

            // Column-simplex copies.
            c.par_chunks_mut(m2)
                .zip(uc.par_chunks(m2))
                .enumerate()
                .for_each_init(
                    || (vec![0.0; m], vec![false; m], Vec::with_capacity(m)),
                    |(col, colmask, buf), (t, (ct, uct))| {
                        let zt = &z[t * m2..(t + 1) * m2];
                        let dt = &dflat[t * m2..(t + 1) * m2];
                        let mk = p.mask_frame(t);
                        for j in 0..m {
                            for i in 0..m {
                                let k = i * m + j;
                                col[i] = zt[k] - uct[k] - half * dt[k];
                            }
                            match mk {
                                Some(mk) => {
                                    for i in 0..m {
                                        colmask[i] = mk[i * m + j];
                                    }
                                    project_simplex_masked(col, colmask, buf);
                                }
                                None => project_simplex(col),
                            }
                            for i in 0..m {
                                ct[i * m + j] = col[i];
                            }
                        }
                    },
                );

            // Edge copies: (L, U) minimizing α‖U − L‖ + ρ/2 (‖L − a‖² + ‖U − b‖²).
            if edges > 0 {
                let lambda = 2.0 * cp.alpha / rho;
                lo.par_chunks_mut(m2)
                    .zip(up.par_chunks_mut(m2))
                    .zip(ul.par_chunks(m2).zip(uu.par_chunks(m2)))
                    .enumerate()
                    .for_each_init(
                        || (vec![0.0; m2], ColsumWork::default()),
                        |(delta, work), (e, ((le, ue), (ule, uue)))| {
                            let za = &z[e * m2..(e + 1) * m2];
                            let zb = &z[(e + 1) * m2..(e + 2) * m2];
                            for k in 0..m2 {
                                let a = za[k] - ule[k];
                                let b = zb[k] - uue[k];
                                delta[k] = b - a;
                                le[k] = 0.5 * (a + b);
                            }
                            prox_norm(p.norm, delta, m, lambda, work);
                            for k in 0..m2 {
                                let s = le[k];
                                le[k] = s - 0.5 * delta[k];
                                ue[k] = s + 0.5 * delta[k];
                            }
                        },
                    );
            }

            // Over-relaxation.
            let relax = |x: &mut [f64], zz: &[f64]| {
                x.par_iter_mut().zip(zz).for_each(|(v, w)| *v = RELAXATION * *v + (1.0 - RELAXATION) * w)
            };
            relax(&mut r, &z);
            relax(&mut c, &z);
            relax(&mut lo, &z[..ne]);
            relax(&mut up, &z[m2..m2 + ne]);

            // Consensus average.
            std::mem::swap(&mut z, &mut z_prev);
            z.par_chunks_mut(m2).enumerate().for_each(|(t, zt)| {
                let a = t * m2;
                let mut count = 2.0;
                for k in 0..m2 {
                    zt[k] = r[a + k] + ur[a + k] + c[a + k] + uc[a + k];
                }
                if t < edges {
                    count += 1.0;
                    for k in 0..m2 {
                        zt[k] += lo[a + k] + ul[a + k];
                    }
                }
                if t > 0 && t - 1 < edges {
                    count += 1.0;
                    let e0 = (t - 1) * m2;
                    for k in 0..m2 {
                        zt[k] += up[e0 + k] + uu[e0 + k];
                    }
                }
                zt.iter_mut().for_each(|v| *v /= count);
            });

            // Dual updates and residuals.
            let frame_stats: Vec<[f64; 4]> = ur
                .par_chunks_mut(m2)
                .zip(uc.par_chunks_mut(m2))
                .enumerate()
                .map(|(t, (urt, uct))| {
                    let (a, b) = (t * m2, (t + 1) * m2);
                    let (zt, zp) = (&z[a..b], &z_prev[a..b]);
                    let mut st = [0.0; 4];
                    let copies = 2.0 + f64::from(u8::from(t < edges)) + f64::from(u8::from(t > 0 && t - 1 < edges));
                    for k in 0..m2 {
                        let dr = r[a + k] - zt[k];
                        let dc = c[a + k] - zt[k];
                        urt[k] += dr;
                        uct[k] += dc;
                        st[0] += dr * dr + dc * dc;
                        st[1] += copies * (zt[k] - zp[k]).powi(2);
                        st[2] += r[a + k].powi(2) + c[a + k].powi(2);
                        st[3] += urt[k].powi(2) + uct[k].powi(2);
                    }
                    st
                })
                .collect();
            let edge_stats: Vec<[f64; 3]> = ul
                .par_chunks_mut(m2)
                .zip(uu.par_chunks_mut(m2))
                .enumerate()
                .map(|(e, (ule, uue))| {
                    let (a, b) = (e * m2, (e + 1) * m2);
                    let (za, zb) = (&z[a..b], &z[b..b + m2]);
                    let mut st = [0.0; 3];
                    for k in 0..m2 {
                        let dl = lo[a + k] - za[k];
                        let du = up[a + k] - zb[k];
                        ule[k] += dl;
                        uue[k] += du;
                        st[0] += dl * dl + du * du;
                        st[1] += lo[a + k].powi(2) + up[a + k].powi(2);
                        st[2] += ule[k].powi(2) + uue[k].powi(2);
                    }
                    st
                })
                .collect();
            let mut primal_sq = 0.0;
            let mut dual_sq = 0.0;
            let mut x_sq = 0.0;
            let mut u_sq = 0.0;
            for s in &frame_stats {
                primal_sq += s[0];
                dual_sq += s[1];
                x_sq += s[2];
                u_sq += s[3];
            }
            for s in &edge_stats {
                primal_sq += s[0];
                x_sq += s[1];
                u_sq += s[2];
            }
            let z_sq: f64 = z.iter().map(|v| v * v).sum();
            let primal = primal_sq.sqrt();
            let dual = rho * dual_sq.sqrt();

            if cp.record_trace {
                trace.push(TraceRow { iter, objective: p.objective(&z), primal_residual: primal, dual_residual: dual });
            }

            if iter % cp.check_every == 0 || iter == cp.max_iter {
                let w = p.round(&z);
                let v = p.objective(&w);
                if v < best_p {
                    best_p = v;
                    best_w = Some(w);
                }
                if edges > 0 {
                    y.par_chunks_mut(m2)
                        .zip(ul.par_chunks(m2).zip(uu.par_chunks(m2)))
                        .for_each(|(ye, (ule, uue))| {
                            for k in 0..m2 {
                                ye[k] = 0.5 * rho * (ule[k] - uue[k]);
                            }
                            let nrm = dual_norm(p.norm, ye, m);
                            if nrm > cp.alpha {
                                let s = cp.alpha / nrm;
                                ye.iter_mut().for_each(|v| *v *= s);
                            }
                        });
                }
                best_lb = best_lb.max(p.lower_bound(&y));
                if gap_ok(best_p, best_lb) {
                    break;
                }
            }

            // Residual balancing on scale-free residuals.
            let rel_primal = primal / x_sq.max(z_sq).sqrt().max(1e-300);
            let rel_dual = dual / (rho * u_sq.sqrt()).max(1e-300);
            let factor = if iter % BALANCE_EVERY != 0 || iter > BALANCE_UNTIL {
                1.0
            } else if rel_primal > BALANCE_RATIO * rel_dual {
                BALANCE_FACTOR
            } else if rel_dual > BALANCE_RATIO * rel_primal {
                1.0 / BALANCE_FACTOR
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                for u in [&mut ur, &mut uc, &mut ul, &mut uu] {
                    u.par_iter_mut().for_each(|v| *v /= factor);
                }
            }
        }
    }

    let converged = gap_ok(best_p, best_lb);
    let w = DoublyStochasticSequence::from_flat(m, t_horizon, best_w.as_deref().expect("a candidate always exists"));
    let gap = (best_p - best_lb).max(0.0);
    let result = weights_result(w, d, cp, converged, Some(iterations), Some(best_lb.min(best_p)));
    let state = AdmmState {
        alpha: cp.alpha,
        norm: cp.norm,
        lower_bound: best_lb.min(best_p),
        best_w: best_w.expect("a candidate always exists"),
    };
    Ok((AdmmOutcome { result, trace, gap }, state))
}
