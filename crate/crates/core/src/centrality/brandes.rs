use std::collections::VecDeque;

use super::{Algorithm, CentralityError, CentralityEstimate};
use crate::graph::{bfs, Direction, Graph, UNREACHABLE};

/// Largest graph [`brute_force_betweenness`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 12;

fn normalization(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        1.0 / (n as f64 * (n as f64 - 1.0))
    }
}

/// Exact normalized betweenness in `O(nm)`.
///
/// One BFS per source counts shortest paths (σ); dependencies are then
/// accumulated in reverse BFS order:
/// `δ_s(v) = Σ_{w : v ∈ pred(w)} σ(v)/σ(w) · (1 + δ_s(w))`.
pub fn brandes_exact(g: &Graph) -> CentralityEstimate {
    let n = g.node_count();
    let mut scores = vec![0.0; n];
    if n < 3 {
        return CentralityEstimate::exact(scores, Algorithm::Brandes);
    }

    let mut dist = vec![UNREACHABLE; n];
    let mut sigma = vec![0.0f64; n];
    let mut dependency = vec![0.0f64; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        for &v in &order {
            dist[v] = UNREACHABLE;
            sigma[v] = 0.0;
            dependency[v] = 0.0;
        }
        order.clear();

        dist[s] = 0;
        sigma[s] = 1.0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in g.out_neighbors(u) {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[u] + 1 {
                    sigma[w] += sigma[u];
                }
            }
        }

        for &w in order.iter().rev() {
            // predecessors of w are its in-neighbors one layer closer to s
            for &v in g.in_neighbors(w) {
                if dist[v] != UNREACHABLE && dist[v] + 1 == dist[w] {
                    dependency[v] += sigma[v] / sigma[w] * (1.0 + dependency[w]);
                }
            }
            if w != s {
                scores[w] += dependency[w];
            }
        }
    }

    let norm = normalization(n);
    for score in &mut scores {
        *score *= norm;
    }
    CentralityEstimate::exact(scores, Algorithm::Brandes)
}

/// Betweenness by listing every shortest path of every ordered pair.
///
/// Test oracle only: exponential in the worst case, hence the size guard.
pub fn brute_force_betweenness(g: &Graph) -> Result<CentralityEstimate, CentralityError> {
    let n = g.node_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(CentralityError::TooLarge {
            node_count: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut scores = vec![0.0; n];
    for s in 0..n {
        let dist = bfs(g, s, Direction::Forward)?;
        for (t, &d) in dist.iter().enumerate() {
            if t == s || d == UNREACHABLE {
                continue;
            }
            let paths = all_paths_of_length(g, s, t, d);
            let sigma_st = paths.len() as f64;
            let mut through = vec![0usize; n];
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    through[v] += 1;
                }
            }
            for v in 0..n {
                scores[v] += through[v] as f64 / sigma_st;
            }
        }
    }
    let norm = normalization(n);
    for score in &mut scores {
        *score *= norm;
    }
    Ok(CentralityEstimate::exact(scores, Algorithm::BruteForce))
}

/// Every simple path from `s` to `t` with exactly `hops` edges, by depth-limited DFS.
pub(crate) fn all_paths_of_length(g: &Graph, s: usize, t: usize, hops: usize) -> Vec<Vec<usize>> {
    fn extend(
        g: &Graph,
        t: usize,
        hops: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let u = *path.last().expect("non-empty path");
        if path.len() - 1 == hops {
            if u == t {
                out.push(path.clone());
            }
            return;
        }
        for &w in g.out_neighbors(u) {
            if !on_path[w] {
                on_path[w] = true;
                path.push(w);
                extend(g, t, hops, path, on_path, out);
                path.pop();
                on_path[w] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; g.node_count()];
    on_path[s] = true;
    extend(g, t, hops, &mut vec![s], &mut on_path, &mut out);
    out
}
