//! Unweighted graphs in compressed adjacency form.
//!
//! A [`Graph`] is immutable once built. Construction always cleans the edge
//! set: self-loops are dropped, parallel edges are merged and undirected
//! edges are stored in both directions. Directed graphs additionally keep a
//! reverse adjacency so traversals can run against edge direction.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Distance value for nodes a traversal never reached.
pub const UNREACHABLE: usize = usize::MAX;

/// Graphs at or below this size get an exact diameter.
pub const EXACT_DIAMETER_LIMIT: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no edges")]
    NoEdges,
    #[error("node {node} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("cannot place {m} edges on {n} nodes (at most {max})")]
    EdgeCountOutOfRange { n: usize, m: u64, max: u64 },
    #[error("graph is empty")]
    Empty,
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    /// Builds from a list of sorted, deduplicated `(source, target)` pairs.
    fn from_sorted_pairs(node_count: usize, pairs: &[(usize, usize)]) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        for &(u, _) in pairs {
            offsets[u + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.iter().map(|&(_, v)| v).collect();
        Adjacency { offsets, targets }
    }

    #[inline]
    fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    directed: bool,
    forward: Adjacency,
    /// Only populated for directed graphs.
    backward: Option<Adjacency>,
}

impl Graph {
    /// Builds a cleaned graph from raw edges. Ids must be below `node_count`.
    pub fn from_edges(
        node_count: usize,
        directed: bool,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut pairs = Vec::new();
        for (u, v) in edges {
            for node in [u, v] {
                if node >= node_count {
                    return Err(GraphError::NodeOutOfRange { node, node_count });
                }
            }
            if u == v {
                continue;
            }
            pairs.push((u, v));
            if !directed {
                pairs.push((v, u));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let forward = Adjacency::from_sorted_pairs(node_count, &pairs);
        let backward = if directed {
            let mut reversed: Vec<(usize, usize)> = pairs.iter().map(|&(u, v)| (v, u)).collect();
            reversed.sort_unstable();
            Some(Adjacency::from_sorted_pairs(node_count, &reversed))
        } else {
            None
        };
        Ok(Graph {
            node_count,
            directed,
            forward,
            backward,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Number of edges; undirected edges are counted once.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.forward.targets.len()
        } else {
            self.forward.targets.len() / 2
        }
    }

    pub fn offsets(&self) -> &[usize] {
        &self.forward.offsets
    }

    pub fn targets(&self) -> &[usize] {
        &self.forward.targets
    }

    #[inline]
    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        self.forward.neighbors(v)
    }

    #[inline]
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        match &self.backward {
            Some(adj) => adj.neighbors(v),
            None => self.forward.neighbors(v),
        }
    }

    #[inline]
    pub fn neighbors(&self, v: usize, direction: Direction) -> &[usize] {
        match direction {
            Direction::Forward => self.out_neighbors(v),
            Direction::Backward => self.in_neighbors(v),
        }
    }

    #[inline]
    pub fn out_degree(&self, v: usize) -> usize {
        self.forward.offsets[v + 1] - self.forward.offsets[v]
    }

    #[inline]
    pub fn in_degree(&self, v: usize) -> usize {
        match &self.backward {
            Some(adj) => adj.offsets[v + 1] - adj.offsets[v],
            None => self.out_degree(v),
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out_neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges in canonical form: every directed edge, or `u < v` for undirected graphs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count).flat_map(move |u| {
            self.out_neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| self.directed || u < v)
                .map(move |v| (u, v))
        })
    }

    /// Induced subgraph on `nodes` (given in the order that defines the new ids).
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut new_id = vec![UNREACHABLE; self.node_count];
        for (i, &v) in nodes.iter().enumerate() {
            new_id[v] = i;
        }
        let edges: Vec<(usize, usize)> = nodes
            .iter()
            .flat_map(|&u| {
                let new_id = &new_id;
                self.out_neighbors(u)
                    .iter()
                    .filter(move |&&v| new_id[v] != UNREACHABLE)
                    .map(move |&v| (new_id[u], new_id[v]))
            })
            .collect();
        Graph::from_edges(nodes.len(), self.directed, edges).expect("ids remapped into range")
    }
}

/// Parses whitespace-separated edge pairs. `%` and `#` start comment lines.
///
/// Ids are shifted down by one when the smallest id is 1 and id 0 never
/// occurs (KONECT files are 1-based). Extra columns such as weights or
/// timestamps are ignored.
pub fn load_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<Graph, GraphError> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next_id = || -> Result<usize, GraphError> {
            let token = tokens.next().ok_or_else(|| GraphError::Parse {
                line: line_no,
                message: "expected two node ids".into(),
            })?;
            token.parse::<usize>().map_err(|_| GraphError::Parse {
                line: line_no,
                message: format!("invalid node id {token:?}"),
            })
        };
        let u = next_id()?;
        let v = next_id()?;
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(GraphError::NoEdges);
    }
    let min_id = edges.iter().map(|&(u, v)| u.min(v)).min().unwrap_or(0);
    let shift = usize::from(min_id == 1);
    let max_id = edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0);
    let node_count = max_id + 1 - shift;
    Graph::from_edges(
        node_count,
        directed,
        edges.into_iter().map(|(u, v)| (u - shift, v - shift)),
    )
}

pub fn parse_edge_list(text: &str, directed: bool) -> Result<Graph, GraphError> {
    load_edge_list(text.as_bytes(), directed)
}

/// Writes the graph as a 1-based edge list, one canonical edge per line.
///
/// Reloading reproduces the graph exactly as long as no node is isolated
/// (isolated nodes carry no edge line and cannot be recovered).
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    let kind = if g.is_directed() { "asym" } else { "sym" };
    let _ = writeln!(out, "% {kind} unweighted");
    let _ = writeln!(out, "% {} {} {}", g.edge_count(), g.node_count(), g.node_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{} {}", u + 1, v + 1);
    }
    out
}

/// Uniform simple undirected graph with exactly `m` edges.
pub fn generate_gnm(n: usize, m: u64, seed: u64) -> Result<Graph, GraphError> {
    let max = (n as u64) * (n as u64).saturating_sub(1) / 2;
    if m > max {
        return Err(GraphError::EdgeCountOutOfRange { n, m, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Index k enumerates pairs (i, j), i < j, row by row.
    let chosen = index::sample(&mut rng, max as usize, m as usize);
    let mut row_start = Vec::with_capacity(n);
    let mut acc = 0u64;
    for i in 0..n as u64 {
        row_start.push(acc);
        acc += n as u64 - 1 - i;
    }
    let edges = chosen.into_iter().map(|k| {
        let k = k as u64;
        let i = row_start.partition_point(|&start| start <= k) - 1;
        let j = i as u64 + 1 + (k - row_start[i]);
        (i, j as usize)
    });
    Graph::from_edges(n, false, edges)
}

pub fn path_graph(n: usize) -> Graph {
    Graph::from_edges(n, false, (1..n).map(|i| (i - 1, i))).expect("valid ids")
}

pub fn cycle_graph(n: usize) -> Graph {
    Graph::from_edges(n, false, (0..n).map(|i| (i, (i + 1) % n))).expect("valid ids")
}

/// Star with `n` nodes in total; node 0 is the center.
pub fn star_graph(n: usize) -> Graph {
    Graph::from_edges(n, false, (1..n).map(|i| (0, i))).expect("valid ids")
}

pub fn complete_graph(n: usize) -> Graph {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
    Graph::from_edges(n, false, edges).expect("valid ids")
}

/// `rows × cols` lattice; node `(r, c)` has id `r * cols + c`.
pub fn grid_graph(rows: usize, cols: usize) -> Graph {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    Graph::from_edges(rows * cols, false, edges).expect("valid ids")
}

/// Hop distances from `source`; unreached nodes hold [`UNREACHABLE`].
pub fn bfs(g: &Graph, source: usize, direction: Direction) -> Result<Vec<usize>, GraphError> {
    if source >= g.node_count() {
        return Err(GraphError::NodeOutOfRange {
            node: source,
            node_count: g.node_count(),
        });
    }
    let mut dist = vec![UNREACHABLE; g.node_count()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u, direction) {
            if dist[w] == UNREACHABLE {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    Ok(dist)
}

fn eccentricity(dist: &[usize]) -> (usize, usize) {
    // (eccentricity, farthest node); ties go to the lowest id
    let mut best = (0, 0);
    for (v, &d) in dist.iter().enumerate() {
        if d != UNREACHABLE && d > best.0 {
            best = (d, v);
        }
    }
    best
}

/// Whether every node reaches every other node (weakly = strongly for undirected).
pub fn is_connected(g: &Graph) -> bool {
    if g.node_count() == 0 {
        return true;
    }
    let reach_all = |direction| {
        bfs(g, 0, direction)
            .map(|d| d.iter().all(|&x| x != UNREACHABLE))
            .unwrap_or(false)
    };
    reach_all(Direction::Forward) && (!g.is_directed() || reach_all(Direction::Backward))
}

/// Node ids of the largest connected component, ascending.
///
/// Uses strongly connected components for directed graphs. Ties between
/// equally large components go to the one holding the smallest node id.
pub fn largest_component(g: &Graph) -> Vec<usize> {
    let labels = if g.is_directed() {
        strong_components(g)
    } else {
        weak_components(g)
    };
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; count];
    let mut first_node = vec![usize::MAX; count];
    for (v, &c) in labels.iter().enumerate() {
        sizes[c] += 1;
        first_node[c] = first_node[c].min(v);
    }
    let Some(best) = (0..count).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(first_node[b].cmp(&first_node[a])))
    else {
        return Vec::new();
    };
    (0..g.node_count()).filter(|&v| labels[v] == best).collect()
}

/// Restricts `g` to its largest component. Returns the subgraph and, for each
/// of its nodes, the id it had in `g`.
pub fn extract_largest_component(g: &Graph) -> (Graph, Vec<usize>) {
    let nodes = largest_component(g);
    if nodes.len() == g.node_count() {
        return (g.clone(), nodes);
    }
    (g.induced_subgraph(&nodes), nodes)
}

fn weak_components(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut label = vec![UNREACHABLE; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for s in 0..n {
        if label[s] != UNREACHABLE {
            continue;
        }
        label[s] = next;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let both = g.out_neighbors(u).iter().chain(if g.is_directed() {
                g.in_neighbors(u).iter()
            } else {
                [].iter()
            });
            for &w in both {
                if label[w] == UNREACHABLE {
                    label[w] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    label
}

/// Iterative Tarjan.
fn strong_components(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut index = vec![UNREACHABLE; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut label = vec![UNREACHABLE; n];
    let mut next_index = 0;
    let mut next_label = 0;
    // (node, position in its neighbor list)
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNREACHABLE {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let nbrs = g.out_neighbors(v);
            if *pos < nbrs.len() {
                let w = nbrs[*pos];
                *pos += 1;
                if index[w] == UNREACHABLE {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    label[w] = next_label;
                    if w == v {
                        break;
                    }
                }
                next_label += 1;
            }
        }
    }
    label
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiameterEstimate {
    /// Hops.
    pub lower: usize,
    /// Hops.
    pub upper: usize,
    /// Vertices on a longest shortest path, `upper + 1`.
    pub vertex_diameter_upper: usize,
}

impl DiameterEstimate {
    fn new(lower: usize, upper: usize) -> Self {
        DiameterEstimate {
            lower,
            upper,
            vertex_diameter_upper: upper + 1,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

/// Bounds on the diameter of a connected graph.
///
/// Graphs with at most [`EXACT_DIAMETER_LIMIT`] nodes are solved exactly with
/// a BFS from every node. Larger graphs use a double sweep: the lower bound
/// is the largest eccentricity seen, the upper bound the smallest
/// `ecc_out(v) + ecc_in(v)` over the swept nodes (`2·ecc(v)` when undirected).
pub fn estimate_diameter(g: &Graph, seed: u64) -> Result<DiameterEstimate, GraphError> {
    let n = g.node_count();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if n <= EXACT_DIAMETER_LIMIT {
        let mut diameter = 0;
        for s in 0..n {
            let (ecc, _) = eccentricity(&bfs(g, s, Direction::Forward)?);
            diameter = diameter.max(ecc);
        }
        return Ok(DiameterEstimate::new(diameter, diameter));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = rng.gen_range(0..n);
    let mut lower = 0;
    let mut upper = usize::MAX;
    let mut sweep = |v: usize| -> Result<usize, GraphError> {
        let (ecc_out, far) = eccentricity(&bfs(g, v, Direction::Forward)?);
        let ecc_in = if g.is_directed() {
            eccentricity(&bfs(g, v, Direction::Backward)?).0
        } else {
            ecc_out
        };
        lower = lower.max(ecc_out).max(ecc_in);
        upper = upper.min(ecc_out + ecc_in);
        Ok(far)
    };
    let far = sweep(start)?;
    sweep(far)?;
    Ok(DiameterEstimate::new(lower, upper.max(lower)))
}
