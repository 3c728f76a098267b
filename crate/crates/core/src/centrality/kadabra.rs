//! Adaptive-sampling betweenness approximation (absolute error variant).
//!
//! Each round draws `c` uniform node pairs, samples one uniform shortest path
//! per pair and credits the interior nodes. Before every round the stopping
//! rule checks, for every node, that a two-sided deviation bound at the
//! current estimate is below ε. The non-adaptive cap ω alone already meets
//! the (ε, δ) guarantee, so the loop never runs past it.
//!
//! Failure budget: δ/2 is spread uniformly over the adaptive check
//! (`δ_L(v) = δ_U(v) = δ/(4n)`), the other δ/2 backs the cap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sampler::{PathSampler, SamplerKind};
use super::{check_epsilon_delta, Algorithm, CentralityError, CentralityEstimate};
use crate::graph::{is_connected, Graph};

/// Samples per round used by the original implementation.
pub const DEFAULT_SAMPLES_PER_ROUND: u64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct KadabraParams {
    /// Absolute error target.
    pub epsilon: f64,
    /// Failure probability.
    pub delta: f64,
    /// Samples drawn between two stopping checks.
    pub c: u64,
    pub seed: u64,
    pub sampler: SamplerKind,
}

impl KadabraParams {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Self {
        KadabraParams {
            epsilon,
            delta,
            c: DEFAULT_SAMPLES_PER_ROUND,
            seed,
            sampler: SamplerKind::Bidirectional,
        }
    }

    pub fn validate(&self) -> Result<(), CentralityError> {
        check_epsilon_delta(self.epsilon, self.delta)?;
        if self.c == 0 {
            return Err(CentralityError::InvalidParams("c must be at least 1".into()));
        }
        Ok(())
    }

    /// Per-node failure probability for each tail, `δ/(4n)`.
    pub fn per_node_delta(&self, node_count: usize) -> f64 {
        self.delta / (4.0 * node_count as f64)
    }
}

/// ω = ⌈ln(4n/δ) / (2ε²)⌉: Hoeffding plus a union bound over nodes and both
/// tails at total budget δ/2.
pub fn non_adaptive_cap(node_count: usize, epsilon: f64, delta: f64) -> u64 {
    ((4.0 * node_count as f64 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64
}

/// Empirical-Bernstein deviation for a Bernoulli mean `estimate` after `tau`
/// samples at failure probability `node_delta`:
/// `sqrt(2·b(1-b)·ln(3/δ_v)/τ) + 3·ln(3/δ_v)/τ`.
pub fn deviation_bound(estimate: f64, node_delta: f64, tau: u64) -> f64 {
    if tau == 0 {
        return f64::INFINITY;
    }
    let log_term = (3.0 / node_delta).ln();
    let tau = tau as f64;
    let variance = (estimate * (1.0 - estimate)).max(0.0);
    (2.0 * variance * log_term / tau).sqrt() + 3.0 * log_term / tau
}

/// Largest deviation bound over all nodes. The bound grows with `b(1-b)`,
/// so only the count closest to τ/2 matters.
fn worst_deviation(occurrences: &[u64], node_delta: f64, tau: u64) -> f64 {
    let half = tau as f64 / 2.0;
    let closest = occurrences
        .iter()
        .map(|&x| x as f64)
        .min_by(|a, b| (a - half).abs().total_cmp(&(b - half).abs()))
        .unwrap_or(0.0);
    deviation_bound(closest / tau as f64, node_delta, tau)
}

fn check_graph(g: &Graph) -> Result<(), CentralityError> {
    if g.node_count() < 2 {
        return Err(CentralityError::InvalidParams(
            "sampling needs at least two nodes".into(),
        ));
    }
    if !is_connected(g) {
        return Err(CentralityError::Disconnected);
    }
    Ok(())
}

/// Draws one ordered pair `s ≠ t` uniformly.
fn sample_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let s = rng.gen_range(0..n);
    let mut t = rng.gen_range(0..n - 1);
    if t >= s {
        t += 1;
    }
    (s, t)
}

/// Shared sampling loop: counts interior occurrences over sampled paths.
pub(super) struct OccurrenceCounter<'g> {
    sampler: PathSampler<'g>,
    rng: ChaCha8Rng,
    pub(super) occurrences: Vec<u64>,
    pub(super) tau: u64,
    n: usize,
}

impl<'g> OccurrenceCounter<'g> {
    pub(super) fn new(g: &'g Graph, kind: SamplerKind, seed: u64) -> Self {
        OccurrenceCounter {
            sampler: PathSampler::new(g, kind),
            rng: ChaCha8Rng::seed_from_u64(seed),
            occurrences: vec![0; g.node_count()],
            tau: 0,
            n: g.node_count(),
        }
    }

    pub(super) fn draw(&mut self, count: u64) -> Result<(), CentralityError> {
        for _ in 0..count {
            let (s, t) = sample_pair(self.n, &mut self.rng);
            let path = self.sampler.sample(s, t, &mut self.rng)?;
            for &v in path.interior() {
                self.occurrences[v] += 1;
            }
            self.tau += 1;
        }
        Ok(())
    }

    pub(super) fn scores(&self) -> Vec<f64> {
        if self.tau == 0 {
            return vec![0.0; self.n];
        }
        self.occurrences
            .iter()
            .map(|&x| x as f64 / self.tau as f64)
            .collect()
    }
}

/// Approximates betweenness within `epsilon` of the truth for every node,
/// with probability at least `1 - delta`. Deterministic for a fixed seed.
pub fn kadabra(g: &Graph, params: &KadabraParams) -> Result<CentralityEstimate, CentralityError> {
    params.validate()?;
    check_graph(g)?;
    let n = g.node_count();
    let omega = non_adaptive_cap(n, params.epsilon, params.delta);
    let node_delta = params.per_node_delta(n);

    let mut counter = OccurrenceCounter::new(g, params.sampler, params.seed);
    while counter.tau < omega {
        if counter.tau > 0 && worst_deviation(&counter.occurrences, node_delta, counter.tau) < params.epsilon {
            break;
        }
        counter.draw(params.c)?;
    }

    Ok(CentralityEstimate {
        scores: counter.scores(),
        samples_used: counter.tau,
        epsilon: params.epsilon,
        delta: params.delta,
        omega,
        algorithm: Algorithm::Kadabra,
    })
}

/// Non-adaptive estimator: exactly `samples` uniform paths, no stopping rule.
pub fn sample_fixed(
    g: &Graph,
    samples: u64,
    seed: u64,
    kind: SamplerKind,
) -> Result<CentralityEstimate, CentralityError> {
    check_graph(g)?;
    let mut counter = OccurrenceCounter::new(g, kind, seed);
    counter.draw(samples)?;
    Ok(CentralityEstimate {
        scores: counter.scores(),
        samples_used: counter.tau,
        epsilon: 0.0,
        delta: 0.0,
        omega: samples,
        algorithm: Algorithm::FixedSample,
    })
}
