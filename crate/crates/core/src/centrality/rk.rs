//! Fixed-budget path sampling with a vertex-diameter sample size.

use super::kadabra::OccurrenceCounter;
use super::sampler::SamplerKind;
use super::{check_epsilon_delta, Algorithm, CentralityError, CentralityEstimate};
use crate::graph::{estimate_diameter, is_connected, Graph};

const VC_CONSTANT: f64 = 0.5;

/// `r = ⌈(0.5/ε²)·(⌊log2(VD−2)⌋ + 1 + ln(1/δ))⌉`, where the log2 term is
/// dropped for `VD ≤ 3`.
pub fn rk_sample_size(vertex_diameter: usize, epsilon: f64, delta: f64) -> u64 {
    let vc_term = if vertex_diameter <= 3 {
        0.0
    } else {
        ((vertex_diameter - 2) as f64).log2().floor()
    };
    (VC_CONSTANT / (epsilon * epsilon) * (vc_term + 1.0 + (1.0 / delta).ln())).ceil() as u64
}

pub fn rk(g: &Graph, epsilon: f64, delta: f64, seed: u64) -> Result<CentralityEstimate, CentralityError> {
    check_epsilon_delta(epsilon, delta)?;
    if g.node_count() < 2 {
        return Err(CentralityError::InvalidParams(
            "sampling needs at least two nodes".into(),
        ));
    }
    if !is_connected(g) {
        return Err(CentralityError::Disconnected);
    }
    let diameter = estimate_diameter(g, seed)?;
    let budget = rk_sample_size(diameter.vertex_diameter_upper, epsilon, delta);

    let mut counter = OccurrenceCounter::new(g, SamplerKind::Bidirectional, seed);
    counter.draw(budget)?;
    Ok(CentralityEstimate {
        scores: counter.scores(),
        samples_used: counter.tau,
        epsilon,
        delta,
        omega: budget,
        algorithm: Algorithm::Rk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::brandes_exact;
    use crate::graph::{path_graph, star_graph};

    #[test]
    fn sample_size_for_path_of_ten() {
        // VD = 10: floor(log2 8) + 1 + ln 10 = 6.3026, times 50 -> 315.13
        assert_eq!(rk_sample_size(10, 0.1, 0.1), 316);
        let est = rk(&path_graph(10), 0.1, 0.1, 0).unwrap();
        assert_eq!(est.samples_used, 316);
        assert_eq!(est.omega, 316);
    }

    #[test]
    fn small_vertex_diameter_drops_log_term() {
        let expected = (0.5 / 0.01 * (1.0 + 10f64.ln())).ceil() as u64;
        assert_eq!(rk_sample_size(3, 0.1, 0.1), expected);
        assert_eq!(rk_sample_size(2, 0.1, 0.1), expected);
    }

    #[test]
    fn star_center_within_epsilon() {
        let g = star_graph(50);
        let exact = brandes_exact(&g).scores[0];
        let hits = (0..200)
            .filter(|&seed| (rk(&g, 0.3, 0.1, seed).unwrap().scores[0] - exact).abs() <= 0.3)
            .count();
        assert!(hits >= 180, "{hits}");
    }
}
