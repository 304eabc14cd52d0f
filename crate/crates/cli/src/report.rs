//! JSON reports. Field order is declaration order, so output is stable for diffing.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};
use trajdist_core::{Association, MetricResult};

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// Reads a file and returns its bytes with a digest entry.
pub fn read_input(path: &Path) -> anyhow::Result<(Vec<u8>, InputFile)> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    Ok((bytes, InputFile { path: path.display().to_string(), sha256: digest }))
}

#[derive(Debug, Serialize)]
pub struct Inputs {
    pub ground_truth: InputFile,
    pub hypothesis: InputFile,
}

#[derive(Debug, Default, Serialize)]
pub struct Params {
    pub miss_penalty: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_cost: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparsify: Option<f64>,
}

/// 1-based association: one mapping per frame, or one weight matrix per frame.
#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssociationOut {
    Permutations(Vec<Vec<usize>>),
    Weights(Vec<Vec<Vec<f64>>>),
}

impl AssociationOut {
    pub fn from_result(a: &Association) -> Option<Self> {
        match a {
            Association::Empty => None,
            Association::Permutations { sigma, .. } => {
                Some(AssociationOut::Permutations(sigma.frames().iter().map(|p| p.to_one_based()).collect()))
            }
            Association::Weights(w) => Some(AssociationOut::Weights(
                w.frames().iter().map(|f| (0..f.dim()).map(|i| f.row(i).to_vec()).collect()).collect(),
            )),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub metric: &'static str,
    pub params: Params,
    pub value: f64,
    pub dist_term: f64,
    pub swi_term: f64,
    pub raw_switch: f64,
    /// Trajectories after padding, `k + l`.
    pub m: usize,
    pub t_horizon: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub association: Option<AssociationOut>,
    pub inputs: Inputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    pub fn new(metric: &'static str, params: Params, r: &MetricResult, shape: (usize, usize), inputs: Inputs) -> Self {
        Self {
            metric,
            params,
            value: r.value,
            dist_term: r.dist_term,
            swi_term: r.swi_term,
            raw_switch: r.raw_switch,
            m: shape.0,
            t_horizon: shape.1,
            converged: r.converged,
            iterations: r.iterations,
            lower_bound: r.lower_bound,
            association: None,
            inputs,
            wall_time_s: None,
        }
    }
}

/// Writes to stdout. A closed pipe (`trajdist ... | head`) is not an error.
pub fn emit(text: &str) -> anyhow::Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(value)?))
}
