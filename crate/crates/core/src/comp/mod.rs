//! The convex relaxation: association by sequences of doubly stochastic matrices
//! with a matrix-norm penalty on their change over time.

mod admm;
pub mod lp;
mod project;
pub mod simplex;
pub mod tradeoff;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::result::{Association, MetricResult};
use crate::trajectory::{pair_distances, DistanceMatrixSequence, ExtendedMetricParams, TrajectorySet};

pub use admm::{admm_solve, admm_solve_from, AdmmOutcome, AdmmState, TraceRow};
pub use lp::{lp_build, CompLp, LinearProgram, LpLayout, Sense};
pub use project::{feasible_mask, round_to_doubly_stochastic};

/// Feasibility tolerance for returned weight matrices.
pub const FEASIBILITY_EPS: f64 = 1e-6;

/// Norm used for `‖W(t+1) − W(t)‖`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `max_j Σ_i |X_ij|`, the operator norm induced by the vector 1-norm.
    #[default]
    ColumnSum,
    /// `Σ_ij |X_ij|`. Not submultiplicative with `‖W‖ ≤ 1` on doubly stochastic
    /// matrices, so the metric property is not guaranteed.
    Entrywise,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::ColumnSum => "colsum",
            NormKind::Entrywise => "entrywise",
        }
    }

    pub fn eval(self, x: &SquareMatrix) -> f64 {
        self.eval_slice(x.dim(), x.as_slice())
    }

    pub(crate) fn eval_slice(self, m: usize, x: &[f64]) -> f64 {
        match self {
            NormKind::Entrywise => x.iter().map(|v| v.abs()).sum(),
            NormKind::ColumnSum => {
                let mut cols = vec![0.0; m];
                for row in x.chunks_exact(m.max(1)) {
                    for (c, v) in cols.iter_mut().zip(row) {
                        *c += v.abs();
                    }
                }
                cols.into_iter().fold(0.0, f64::max)
            }
        }
    }

    /// `‖W − W'‖` over pairs of doubly stochastic `m×m` matrices is at most this.
    pub fn max_difference(self, m: usize) -> f64 {
        match self {
            NormKind::ColumnSum => 2.0,
            NormKind::Entrywise => 2.0 * m as f64,
        }
    }
}

impl FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "colsum" | "column-sum" | "operator" | "op" => Ok(NormKind::ColumnSum),
            "entrywise" | "l1" => Ok(NormKind::Entrywise),
            _ => Err(Error::invalid(format!("unknown norm '{s}' (expected colsum or entrywise)"))),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Admm,
    /// Dense simplex on the explicit linear program; small instances only.
    Simplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompParams {
    pub alpha: f64,
    pub norm: NormKind,
    /// Relative optimality gap accepted by the iterative solver.
    pub tol: f64,
    pub max_iter: usize,
    /// Entries with `D(t)_ij` above this are fixed to zero.
    pub sparsify_threshold: Option<f64>,
    /// Re-enable the cheapest assignment's entries when the zero pattern admits no feasible point.
    pub repair_sparsity: bool,
    pub backend: Backend,
    /// Initial ADMM penalty; chosen from the data when unset.
    pub rho: Option<f64>,
    /// Iterations between duality-gap certificates.
    pub check_every: usize,
    pub record_trace: bool,
}

impl Default for CompParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            norm: NormKind::ColumnSum,
            tol: 0.01,
            max_iter: 1000,
            sparsify_threshold: None,
            repair_sparsity: true,
            backend: Backend::Admm,
            rho: None,
            check_every: 10,
            record_trace: false,
        }
    }
}

impl CompParams {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { alpha, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid(format!("alpha must be nonnegative and finite, got {}", self.alpha)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 || self.check_every == 0 {
            return Err(Error::invalid("max_iter and check_every must be positive"));
        }
        if let Some(th) = self.sparsify_threshold {
            if !(th >= 0.0) {
                return Err(Error::invalid(format!("sparsify threshold must be nonnegative, got {th}")));
            }
        }
        if let Some(rho) = self.rho {
            if !(rho.is_finite() && rho > 0.0) {
                return Err(Error::invalid(format!("rho must be positive, got {rho}")));
            }
        }
        Ok(())
    }
}

/// `T` matrices of size `m×m`, each doubly stochastic up to [`FEASIBILITY_EPS`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublyStochasticSequence {
    m: usize,
    weights: Vec<SquareMatrix>,
}

impl DoublyStochasticSequence {
    pub fn new(weights: Vec<SquareMatrix>) -> Result<Self> {
        let m = weights.first().map_or(0, SquareMatrix::dim);
        for (t, w) in weights.iter().enumerate() {
            if w.dim() != m {
                return Err(Error::invalid(format!("frame {} has size {}, expected {m}", t + 1, w.dim())));
            }
            let r = w.doubly_stochastic_residual();
            if !(r <= FEASIBILITY_EPS) {
                return Err(Error::invalid(format!("frame {} is not doubly stochastic (residual {r:.3e})", t + 1)));
            }
        }
        Ok(Self { m, weights })
    }

    pub(crate) fn from_flat(m: usize, t_horizon: usize, flat: &[f64]) -> Self {
        let weights = flat
            .chunks_exact(m * m)
            .take(t_horizon)
            .map(|c| SquareMatrix::from_row_major(m, c.to_vec()))
            .collect();
        Self { m, weights }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn frames(&self) -> &[SquareMatrix] {
        &self.weights
    }

    pub fn max_residual(&self) -> f64 {
        self.weights.iter().map(SquareMatrix::doubly_stochastic_residual).fold(0.0, f64::max)
    }
}

/// `dist = Σ_t tr(W(t)ᵀ D(t))`.
pub fn dist_term(w: &DoublyStochasticSequence, d: &DistanceMatrixSequence) -> f64 {
    w.frames().iter().zip(d.frames()).map(|(wt, dt)| wt.frobenius_dot(dt)).sum()
}

/// Unweighted `swi = Σ_t ‖W(t+1) − W(t)‖`.
pub fn switch_term(w: &DoublyStochasticSequence, norm: NormKind) -> f64 {
    w.frames().windows(2).map(|p| norm.eval(&p[1].sub(&p[0]))).sum()
}

/// `α · swi + dist` at a given point.
pub fn objective(w: &DoublyStochasticSequence, d: &DistanceMatrixSequence, alpha: f64, norm: NormKind) -> f64 {
    alpha * switch_term(w, norm) + dist_term(w, d)
}

pub fn d_comp(a: &TrajectorySet, b: &TrajectorySet, params: &ExtendedMetricParams, cp: &CompParams) -> Result<MetricResult> {
    d_comp_matrices(&pair_distances(a, b, params)?, cp)
}

pub fn d_comp_matrices(d: &DistanceMatrixSequence, cp: &CompParams) -> Result<MetricResult> {
    cp.validate()?;
    if d.m() == 0 || d.t_horizon() == 0 {
        return Ok(MetricResult::empty());
    }
    match cp.backend {
        Backend::Admm => Ok(admm_solve(d, cp)?.result),
        Backend::Simplex => d_comp_simplex(d, cp),
    }
}

fn d_comp_simplex(d: &DistanceMatrixSequence, cp: &CompParams) -> Result<MetricResult> {
    let mask = match cp.sparsify_threshold {
        Some(th) => Some(feasible_mask(d, th, cp.repair_sparsity)?),
        None => None,
    };
    let built = lp_build(d, cp.alpha, cp.norm, mask.as_deref())?;
    let sol = simplex::solve(&built.lp)?;
    let mut flat = built.layout.weights(&sol.x).to_vec();
    // Clean pivoting round-off so the point passes the feasibility check.
    for v in &mut flat {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let w = DoublyStochasticSequence::from_flat(d.m(), d.t_horizon(), &flat);
    Ok(weights_result(w, d, cp, true, None, Some(sol.objective)))
}

pub(crate) fn weights_result(
    w: DoublyStochasticSequence,
    d: &DistanceMatrixSequence,
    cp: &CompParams,
    converged: bool,
    iterations: Option<usize>,
    lower_bound: Option<f64>,
) -> MetricResult {
    let dist = dist_term(&w, d);
    let raw = switch_term(&w, cp.norm);
    let swi = cp.alpha * raw;
    MetricResult {
        value: dist + swi,
        dist_term: dist,
        swi_term: swi,
        raw_switch: raw,
        association: Association::Weights(w),
        converged,
        iterations,
        lower_bound,
    }
}

/// `Σ_t` of the maximum-weight assignment of `D(t)`: no association, fractional or not,
/// accumulates more distance.
pub fn max_distance(d: &DistanceMatrixSequence) -> f64 {
    d.frames().iter().map(|dt| assignment::solve_max(dt).cost).sum()
}

/// `(T − 1) · max ‖W − W'‖`, the largest achievable unweighted switch term.
pub fn max_switch(d: &DistanceMatrixSequence, norm: NormKind) -> f64 {
    d.t_horizon().saturating_sub(1) as f64 * norm.max_difference(d.m())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_of_a_swap() {
        let i = SquareMatrix::identity(2);
        let p = SquareMatrix::permutation_matrix(&[1, 0]);
        assert_eq!(NormKind::ColumnSum.eval(&p.sub(&i)), 2.0);
        assert_eq!(NormKind::Entrywise.eval(&p.sub(&i)), 4.0);
        assert_eq!(NormKind::ColumnSum.eval(&SquareMatrix::filled(3, 1.0 / 3.0)), 1.0);
        assert_eq!(NormKind::Entrywise.eval(&SquareMatrix::identity(3)), 3.0);
    }

    #[test]
    fn params_validation() {
        assert!(CompParams::with_alpha(-1.0).validate().is_err());
        assert!(CompParams::with_alpha(0.0).validate().is_ok());
        assert!(CompParams { tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(CompParams { sparsify_threshold: Some(f64::NAN), ..Default::default() }.validate().is_err());
    }

    #[test]
    fn norm_names_parse() {
        assert_eq!("colsum".parse::<NormKind>().unwrap(), NormKind::ColumnSum);
        assert_eq!("entrywise".parse::<NormKind>().unwrap(), NormKind::Entrywise);
        assert!("frobenius".parse::<NormKind>().is_err());
    }

    #[test]
    fn sequence_rejects_infeasible_frames() {
        assert!(DoublyStochasticSequence::new(vec![SquareMatrix::filled(2, 0.6)]).is_err());
        assert!(DoublyStochasticSequence::new(vec![SquareMatrix::identity(2), SquareMatrix::identity(3)]).is_err());
        assert!(DoublyStochasticSequence::new(vec![SquareMatrix::filled(2, 0.5)]).is_ok());
    }
}
