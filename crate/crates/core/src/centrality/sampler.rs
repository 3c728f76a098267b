//! Uniform sampling of one shortest path between two nodes.
//!
//! Two strategies induce the same distribution. The reference sampler runs
//! a forward BFS from `s` that counts shortest paths (σ), then walks back
//! from `t`, picking each predecessor with probability proportional to its
//! σ. The bidirectional sampler grows BFS layers from both ends, always
//! expanding the side whose frontier has fewer outgoing edges, and stops at
//! the first layer where the two searches touch. A meeting node `w` is drawn
//! with weight `σ_s(w)·σ_t(w)` and the path is completed by weighted walks
//! towards both endpoints.

use rand::Rng;

use super::CentralityError;
use crate::graph::Graph;

const UNSEEN: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerKind {
    Reference,
    #[default]
    Bidirectional,
}

/// A shortest path, endpoints included.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathSample {
    pub nodes: Vec<usize>,
}

impl PathSample {
    pub fn source(&self) -> usize {
        self.nodes[0]
    }

    pub fn target(&self) -> usize {
        *self.nodes.last().expect("non-empty path")
    }

    /// Nodes strictly between the endpoints.
    pub fn interior(&self) -> &[usize] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Per-side search state. Arrays are sized once and reset through `touched`.
struct Side {
    dist: Vec<u32>,
    sigma: Vec<f64>,
    touched: Vec<usize>,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl Side {
    fn new(n: usize) -> Self {
        Side {
            dist: vec![UNSEEN; n],
            sigma: vec![0.0; n],
            touched: Vec::new(),
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = UNSEEN;
            self.sigma[v] = 0.0;
        }
        self.touched.clear();
        self.frontier.clear();
        self.next.clear();
    }

    fn seed(&mut self, v: usize) {
        self.dist[v] = 0;
        self.sigma[v] = 1.0;
        self.touched.push(v);
        self.frontier.push(v);
    }
}

/// Reusable shortest-path sampler bound to one graph.
pub struct PathSampler<'g> {
    graph: &'g Graph,
    kind: SamplerKind,
    forward: Side,
    backward: Side,
    meeting: Vec<usize>,
    weights: Vec<f64>,
}

impl<'g> PathSampler<'g> {
    pub fn new(graph: &'g Graph, kind: SamplerKind) -> Self {
        let n = graph.node_count();
        PathSampler {
            graph,
            kind,
            forward: Side::new(n),
            backward: Side::new(if kind == SamplerKind::Bidirectional { n } else { 0 }),
            meeting: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    pub fn sample<R: Rng + ?Sized>(
        &mut self,
        s: usize,
        t: usize,
        rng: &mut R,
    ) -> Result<PathSample, CentralityError> {
        let n = self.graph.node_count();
        for node in [s, t] {
            if node >= n {
                return Err(crate::graph::GraphError::NodeOutOfRange { node, node_count: n }.into());
            }
        }
        if s == t {
            return Err(CentralityError::SameEndpoints(s));
        }
        match self.kind {
            SamplerKind::Reference => self.sample_reference(s, t, rng),
            SamplerKind::Bidirectional => self.sample_bidirectional(s, t, rng),
        }
    }

    fn sample_reference<R: Rng + ?Sized>(
        &mut self,
        s: usize,
        t: usize,
        rng: &mut R,
    ) -> Result<PathSample, CentralityError> {
        let g = self.graph;
        let side = &mut self.forward;
        side.reset();
        side.seed(s);
        // layer-by-layer so σ of t's layer is complete when we stop
        while side.dist[t] == UNSEEN && !side.frontier.is_empty() {
            expand_layer(g, side, true);
        }
        if side.dist[t] == UNSEEN {
            return Err(CentralityError::Unreachable { s, t });
        }
        let mut nodes = vec![t];
        walk_to_root(g, side, t, true, &mut self.weights, rng, &mut nodes);
        nodes.reverse();
        Ok(PathSample { nodes })
    }

    fn sample_bidirectional<R: Rng + ?Sized>(
        &mut self,
        s: usize,
        t: usize,
        rng: &mut R,
    ) -> Result<PathSample, CentralityError> {
        let g = self.graph;
        self.forward.reset();
        self.backward.reset();
        self.forward.seed(s);
        self.backward.seed(t);

        self.meeting.clear();
        loop {
            if self.forward.frontier.is_empty() || self.backward.frontier.is_empty() {
                return Err(CentralityError::Unreachable { s, t });
            }
            let forward_cost: usize = self.forward.frontier.iter().map(|&v| g.out_degree(v)).sum();
            let backward_cost: usize = self.backward.frontier.iter().map(|&v| g.in_degree(v)).sum();
            let (grow, other, outgoing) = if forward_cost <= backward_cost {
                (&mut self.forward, &self.backward, true)
            } else {
                (&mut self.backward, &self.forward, false)
            };
            expand_layer(g, grow, outgoing);
            self.meeting
                .extend(grow.frontier.iter().copied().filter(|&v| other.dist[v] != UNSEEN));
            if !self.meeting.is_empty() {
                break;
            }
        }

        // every shortest path crosses the meeting layer exactly once
        self.weights.clear();
        self.weights.extend(
            self.meeting
                .iter()
                .map(|&w| self.forward.sigma[w] * self.backward.sigma[w]),
        );
        let w = self.meeting[pick_weighted(&self.weights, rng)];

        let mut nodes = vec![w];
        walk_to_root(g, &self.forward, w, true, &mut self.weights, rng, &mut nodes);
        nodes.reverse();
        let mut tail = Vec::new();
        walk_to_root(g, &self.backward, w, false, &mut self.weights, rng, &mut tail);
        nodes.extend(tail);
        Ok(PathSample { nodes })
    }
}

/// Expands one full BFS layer of `side`, replacing its frontier.
/// `outgoing` selects out-edges (search from the source) or in-edges.
fn expand_layer(g: &Graph, side: &mut Side, outgoing: bool) {
    side.next.clear();
    for i in 0..side.frontier.len() {
        let u = side.frontier[i];
        let du = side.dist[u];
        let nbrs = if outgoing { g.out_neighbors(u) } else { g.in_neighbors(u) };
        for &w in nbrs {
            if side.dist[w] == UNSEEN {
                side.dist[w] = du + 1;
                side.touched.push(w);
                side.next.push(w);
            }
            if side.dist[w] == du + 1 {
                side.sigma[w] += side.sigma[u];
            }
        }
    }
    std::mem::swap(&mut side.frontier, &mut side.next);
}

/// Random walk from `start` back to the root of `side`, choosing each step
/// with probability proportional to σ. Pushes the visited nodes (excluding
/// `start`) onto `out`.
fn walk_to_root<R: Rng + ?Sized>(
    g: &Graph,
    side: &Side,
    start: usize,
    rooted_at_source: bool,
    weights: &mut Vec<f64>,
    rng: &mut R,
    out: &mut Vec<usize>,
) {
    let mut current = start;
    let mut candidates = Vec::new();
    while side.dist[current] > 0 {
        // a search from the source reached `current` along out-edges, so its
        // predecessors are in-neighbors, and vice versa
        let nbrs = if rooted_at_source {
            g.in_neighbors(current)
        } else {
            g.out_neighbors(current)
        };
        let want = side.dist[current] - 1;
        candidates.clear();
        weights.clear();
        for &p in nbrs {
            if side.dist[p] == want {
                candidates.push(p);
                weights.push(side.sigma[p]);
            }
        }
        current = candidates[pick_weighted(weights, rng)];
        out.push(current);
    }
}

fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    if weights.len() == 1 {
        return 0;
    }
    let total: f64 = weights.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if r < w {
            return i;
        }
        r -= w;
    }
    weights.len() - 1
}
