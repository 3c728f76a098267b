//! Exact and approximate betweenness centrality.
//!
//! Scores are normalized by `n(n-1)`, the number of ordered node pairs, for
//! both directed and undirected graphs. Endpoints of a path are never
//! credited.

mod brandes;
mod kadabra;
mod rk;
mod sampler;

use std::fmt;

use thiserror::Error;

use crate::graph::GraphError;

pub use brandes::{brandes_exact, brute_force_betweenness, BRUTE_FORCE_LIMIT};
pub use kadabra::{
    deviation_bound, kadabra, non_adaptive_cap, sample_fixed, KadabraParams, DEFAULT_SAMPLES_PER_ROUND,
};
pub use rk::{rk, rk_sample_size};
pub use sampler::{PathSample, PathSampler, SamplerKind};

#[derive(Debug, Error, PartialEq)]
pub enum CentralityError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("graph is not connected; run on its largest component")]
    Disconnected,
    #[error("node {t} is not reachable from node {s}")]
    Unreachable { s: usize, t: usize },
    #[error("source and target coincide (node {0})")]
    SameEndpoints(usize),
    #[error("graph has {node_count} nodes; brute force is limited to {limit}")]
    TooLarge { node_count: usize, limit: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Brandes,
    BruteForce,
    Kadabra,
    Rk,
    FixedSample,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Brandes => "brandes",
            Algorithm::BruteForce => "brute-force",
            Algorithm::Kadabra => "kadabra",
            Algorithm::Rk => "rk",
            Algorithm::FixedSample => "fixed-sample",
        }
    }

    pub fn is_sampling(self) -> bool {
        matches!(self, Algorithm::Kadabra | Algorithm::Rk | Algorithm::FixedSample)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-node betweenness plus the sampling state that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityEstimate {
    pub scores: Vec<f64>,
    /// Number of sampled paths (τ); zero for exact results.
    pub samples_used: u64,
    pub epsilon: f64,
    pub delta: f64,
    /// Non-adaptive sample cap (ω). For RK this is the fixed budget.
    pub omega: u64,
    pub algorithm: Algorithm,
}

impl CentralityEstimate {
    pub(crate) fn exact(scores: Vec<f64>, algorithm: Algorithm) -> Self {
        CentralityEstimate {
            scores,
            samples_used: 0,
            epsilon: 0.0,
            delta: 0.0,
            omega: 0,
            algorithm,
        }
    }

    /// The `k` highest-scoring nodes, ties broken by ascending node id.
    pub fn top_k(&self, k: usize) -> Vec<(usize, f64)> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        order
            .into_iter()
            .take(k)
            .map(|v| (v, self.scores[v]))
            .collect()
    }

    /// Largest absolute deviation from `reference`, node by node.
    pub fn max_error(&self, reference: &[f64]) -> f64 {
        self.scores
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_epsilon_delta(epsilon: f64, delta: f64) -> Result<(), CentralityError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CentralityError::InvalidParams(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CentralityError::InvalidParams(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}
