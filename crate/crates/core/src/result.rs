use serde::Serialize;

use crate::comp::DoublyStochasticSequence;
use crate::permutation::PermutationSequence;

/// The association an objective value was computed along.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Association {
    /// Both sets empty: no frames or no trajectories to associate.
    Empty,
    Permutations {
        sigma: PermutationSequence,
        /// `anchored[t][i]`: row `i` kept its previous match at frame `t` (MOTP only).
        #[serde(skip_serializing_if = "Option::is_none")]
        anchored: Option<Vec<Vec<bool>>>,
    },
    Weights(DoublyStochasticSequence),
}

impl Association {
    pub fn sigma(&self) -> Option<&PermutationSequence> {
        match self {
            Association::Permutations { sigma, .. } => Some(sigma),
            _ => None,
        }
    }

    pub fn weights(&self) -> Option<&DoublyStochasticSequence> {
        match self {
            Association::Weights(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricResult {
    pub value: f64,
    /// `Σ_t Σ_i d⁺` along the association (`Σ_t tr(W(t)ᵀ D(t))` for weights).
    pub dist_term: f64,
    /// Weighted switch term; 0 for OSPA and MOTP.
    pub swi_term: f64,
    /// Unweighted switch measure: number of changes for permutation sequences,
    /// `Σ_t ‖W(t+1) − W(t)‖` for weights.
    pub raw_switch: f64,
    pub association: Association,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Certified lower bound on the optimum (iterative solvers only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
}

impl MetricResult {
    pub(crate) fn exact(value: f64, dist_term: f64, swi_term: f64, raw_switch: f64, association: Association) -> Self {
        Self {
            value,
            dist_term,
            swi_term,
            raw_switch,
            association,
            converged: true,
            iterations: None,
            lower_bound: None,
        }
    }

    pub(crate) fn empty() -> Self {
        Self::exact(0.0, 0.0, 0.0, 0.0, Association::Empty)
    }
}
