#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use bcbench::graph::Graph;
use bcbench::runfile::{ParamValue, RunInfo, RunOutput, RunParameters};
use proptest::prelude::*;

/// BFS distances written independently of the library traversal.
pub fn distances(g: &Graph, s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for &v in g.out_neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Every shortest s-t path, by depth-first extension along distance layers.
pub fn all_shortest_paths(g: &Graph, s: usize, t: usize) -> Vec<Vec<usize>> {
    // distances to t; test graphs are undirected
    let from_t = distances(g, t);
    let mut out = Vec::new();
    let Some(total) = from_t[s] else { return out };
    let mut stack = vec![vec![s]];
    while let Some(path) = stack.pop() {
        let u = *path.last().unwrap();
        if u == t {
            out.push(path);
            continue;
        }
        let remaining = total - (path.len() - 1);
        for &v in g.out_neighbors(u) {
            if from_t[v] == Some(remaining - 1) {
                let mut next = path.clone();
                next.push(v);
                stack.push(next);
            }
        }
    }
    out.sort();
    out
}

/// Betweenness by enumerating all shortest paths of every ordered pair.
pub fn enumerated_betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut b = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let paths = all_shortest_paths(g, s, t);
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    b[v] += 1.0 / paths.len() as f64;
                }
            }
        }
    }
    let pairs = (n * (n - 1)) as f64;
    b.iter().map(|x| x / pairs).collect()
}

/// Exact two-sided p by listing all 2^k sign assignments.
pub fn enumerated_wilcoxon_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let k = d.len();
    if k == 0 {
        return 1.0;
    }
    // doubled mid-ranks of |d|
    let ranks: Vec<u64> = d
        .iter()
        .map(|x| {
            let below = d.iter().filter(|y| y.abs() < x.abs()).count() as u64;
            let equal = d.iter().filter(|y| y.abs() == x.abs()).count() as u64;
            2 * below + equal + 1
        })
        .collect();
    let total: u64 = ranks.iter().sum();
    let plus: u64 = d.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let w = plus.min(total - plus);
    let mut at_most = 0u64;
    for mask in 0u32..(1 << k) {
        let s: u64 = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        if s <= w {
            at_most += 1;
        }
    }
    (2.0 * at_most as f64 / (1u64 << k) as f64).min(1.0)
}

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[ -~]{0,24}",
        Just("yes".to_string()),
        Just("null".to_string()),
        Just("~".to_string()),
        Just("0x1F".to_string()),
        Just("1e3".to_string()),
        Just("- item".to_string()),
        Just("a: b".to_string()),
        Just("'quoted'".to_string()),
        "[a-zα-ω]{1,8}",
    ]
}

fn real() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1e6..1e6f64,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE / 4.0),
    ]
}

fn non_negative() -> impl Strategy<Value = f64> {
    prop_oneof![0.0..1e5f64, Just(0.0), Just(f64::MAX), Just(5e-324), (0u64..1 << 52).prop_map(|b| b as f64 * 1e-9)]
}

fn param_value() -> impl Strategy<Value = ParamValue> {
    prop_oneof![any::<i64>().prop_map(ParamValue::Int), real().prop_map(ParamValue::Real), text().prop_map(ParamValue::Text)]
}

fn info() -> impl Strategy<Value = RunInfo> {
    let commit = prop_oneof!["[0-9a-f]{4,40}", "dirty\\+[0-9a-f]{8}", Just("unknown".to_string())];
    let date = prop_oneof![
        (2000u32..2100, 1u32..13, 1u32..29, 0u32..24, 0u32..60, 0u32..60, 0u32..1_000_000)
            .prop_map(|(y, mo, d, h, mi, s, us)| format!("{y:04}-{mo:02}-{d:02}T{h:02}:{mi:02}:{s:02}.{us:06}")),
        Just("2018-09-14".to_string()),
        Just("2018-09-14T12:21:55+02:00".to_string()),
    ];
    (commit, date, text()).prop_map(|(commit, date, host)| RunInfo { commit, date, host })
}

/// Valid run records, including strings that YAML would otherwise reinterpret.
pub fn run_output() -> impl Strategy<Value = RunOutput> {
    let extra = prop::collection::btree_map("[a-z_][a-z0-9_-]{0,6}", param_value(), 0..4)
        .prop_map(|m| m.into_iter().filter(|(k, _)| !["delta", "epsilon", "seed"].contains(&k.as_str())).collect::<BTreeMap<_, _>>());
    let topk = prop::collection::vec((any::<u64>(), real()), 0..30).prop_map(|pairs| {
        let (nodes, mut scores): (Vec<u64>, Vec<f64>) = pairs.into_iter().unzip();
        scores.sort_by(|a, b| b.total_cmp(a));
        (nodes, scores)
    });
    (
        prop::option::of(prop_oneof![Just("kadabra".to_string()), Just("rk".to_string()), Just("brandes".to_string()), text()]),
        info(),
        prop::option::of(text()),
        1u64..u64::MAX,
        (real(), real(), any::<u64>(), extra),
        non_negative(),
        prop::option::of(non_negative()),
        topk,
    )
        .prop_map(|(algorithm, info, instance, iterations, (delta, epsilon, seed, extra), run_time, wall_time, (topk_nodes, topk_scores))| {
            RunOutput {
                algorithm,
                info,
                instance,
                iterations,
                parameters: RunParameters { delta, epsilon, seed, extra },
                run_time,
                wall_time,
                topk_nodes,
                topk_scores,
            }
        })
}

/// A KADABRA record in the reference output format, list tails trimmed.
pub const EXAMPLE_RECORD: &str = "info:
  commit: fef6c5ca
  date: '2018-09-14T12:21:55.497368'
  host: erle
iterations: 12598
parameters:
  delta: 0.1
  epsilon: 0.015
  seed: 0
run_time: 1.6034371852874756
topk_nodes:
- 156
- 45
- 596
topk_scores:
- 0.0651690744562629
- 0.04643594221304969
- 0.0349261787585331
";
