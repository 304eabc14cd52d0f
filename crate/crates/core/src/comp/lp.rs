//! The convex problem written as an explicit linear program.
//!
//! Variables (all nonnegative), in order: `W(t)_ij` for `t = 1..T`, then
//! `h(t)_ij ≥ |W(t+1)_ij − W(t)_ij|` for `t = 1..T−1`, then (column-sum norm only)
//! `e_t ≥ max_j Σ_i h(t)_ij`.

use serde::Serialize;

use super::NormKind;
use crate::error::{Error, Result};
use crate::trajectory::DistanceMatrixSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `min cᵀx` subject to the constraints and `x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, objective: vec![0.0; n_vars], constraints: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest constraint or bound violation at `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let bounds = x.iter().map(|v| (-v).max(0.0));
        let rows = self.constraints.iter().map(|c| {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            match c.sense {
                Sense::Eq => (lhs - c.rhs).abs(),
                Sense::Le => (lhs - c.rhs).max(0.0),
                Sense::Ge => (c.rhs - lhs).max(0.0),
            }
        });
        bounds.chain(rows).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LpLayout {
    pub m: usize,
    pub t_horizon: usize,
    pub n_w: usize,
    pub n_h: usize,
    pub n_e: usize,
}

impl LpLayout {
    pub fn w(&self, t: usize, i: usize, j: usize) -> usize {
        (t * self.m + i) * self.m + j
    }

    pub fn h(&self, t: usize, i: usize, j: usize) -> usize {
        self.n_w + (t * self.m + i) * self.m + j
    }

    pub fn e(&self, t: usize) -> usize {
        self.n_w + self.n_h + t
    }

    /// The `W` block of a solution vector, frame-major and row-major within a frame.
    pub fn weights<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.n_w]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompLp {
    pub lp: LinearProgram,
    pub layout: LpLayout,
}

/// Builds the linear program. `mask`, if given, holds one flag per `W(t)_ij`
/// (frame-major); entries with a `false` flag are constrained to zero.
pub fn lp_build(d: &DistanceMatrixSequence, alpha: f64, norm: NormKind, mask: Option<&[bool]>) -> Result<CompLp> {
    let (m, t_horizon) = (d.m(), d.t_horizon());
    let m2 = m * m;
    if let Some(mask) = mask {
        if mask.len() != t_horizon * m2 {
            return Err(Error::invalid("mask must hold one flag per weight entry"));
        }
    }
    let edges = t_horizon.saturating_sub(1);
    let layout = LpLayout {
        m,
        t_horizon,
        n_w: t_horizon * m2,
        n_h: edges * m2,
        n_e: if norm == NormKind::ColumnSum { edges } else { 0 },
    };
    let mut lp = LinearProgram::new(layout.n_w + layout.n_h + layout.n_e);

    for (t, dt) in d.frames().iter().enumerate() {
        for i in 0..m {
            for j in 0..m {
                lp.objective[layout.w(t, i, j)] = dt[(i, j)];
            }
        }
    }
    match norm {
        NormKind::ColumnSum => (0..edges).for_each(|t| lp.objective[layout.e(t)] = alpha),
        NormKind::Entrywise => (layout.n_w..layout.n_w + layout.n_h).for_each(|k| lp.objective[k] = alpha),
    }

    for t in 0..t_horizon {
        for i in 0..m {
            lp.add((0..m).map(|j| (layout.w(t, i, j), 1.0)).collect(), Sense::Eq, 1.0);
        }
        for j in 0..m {
            lp.add((0..m).map(|i| (layout.w(t, i, j), 1.0)).collect(), Sense::Eq, 1.0);
        }
    }
    for t in 0..edges {
        for i in 0..m {
            for j in 0..m {
                let (now, next, h) = (layout.w(t, i, j), layout.w(t + 1, i, j), layout.h(t, i, j));
                lp.add(vec![(next, 1.0), (now, -1.0), (h, -1.0)], Sense::Le, 0.0);
                lp.add(vec![(now, 1.0), (next, -1.0), (h, -1.0)], Sense::Le, 0.0);
            }
        }
        if norm == NormKind::ColumnSum {
            for j in 0..m {
                let mut coeffs: Vec<(usize, f64)> = (0..m).map(|i| (layout.h(t, i, j), 1.0)).collect();
                coeffs.push((layout.e(t), -1.0));
                lp.add(coeffs, Sense::Le, 0.0);
            }
        }
    }
    if let Some(mask) = mask {
        for (k, _) in mask.iter().enumerate().filter(|(_, &allowed)| !allowed) {
            lp.add(vec![(k, 1.0)], Sense::Eq, 0.0);
        }
    }
    Ok(CompLp { lp, layout })
}
