mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use bcbench::centrality::{
    brandes_exact, brute_force_betweenness, deviation_bound, kadabra, non_adaptive_cap, KadabraParams, PathSampler,
    SamplerKind,
};
use bcbench::collect::{collect_successful, geometric_mean, speedup_table, stratified_split, ResultFrame, RunRecord};
use bcbench::graph::{
    bfs, estimate_diameter, generate_gnm, is_connected, parse_edge_list, write_edge_list, Direction, Graph,
};
use bcbench::orchestrator::{output_path, parse_output_path};
use bcbench::plots::{
    box_plot_svg, relative_deviation, scatter_svg, speedup_bars_svg, Axis, MarkShape, PlotSeries, Scale,
    ScatterOptions,
};
use bcbench::runfile::{parse_run_output, write_run_output, RunfileError};
use bcbench::stats::{hpd_interval, rope_verdict, wilcoxon_signed_rank, PairedSample, RopeVerdict};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, any::<bool>()).prop_flat_map(|(n, directed)| {
        prop::collection::vec((0..n, 0..n), 0..=n * (n - 1))
            .prop_map(move |edges| Graph::from_edges(n, directed, edges).unwrap())
    })
}

fn connected_undirected(max_n: usize) -> impl Strategy<Value = Graph> {
    (3..=max_n, any::<u64>()).prop_flat_map(|(n, seed)| {
        let max_m = (n * (n - 1) / 2) as u64;
        ((n as u64 - 1)..=max_m).prop_map(move |m| {
            // a random tree plus extra G(n, m) edges keeps the graph connected
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (v, rand::Rng::gen_range(&mut rng, 0..v))).collect();
            edges.extend(generate_gnm(n, m, seed).unwrap().edges());
            Graph::from_edges(n, false, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn brandes_matches_brute_force(g in small_graph(10)) {
        let fast = brandes_exact(&g);
        let slow = brute_force_betweenness(&g).unwrap();
        for (a, b) in fast.scores.iter().zip(&slow.scores) {
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn brandes_matches_path_enumeration(g in connected_undirected(9)) {
        let fast = brandes_exact(&g);
        let oracle = common::enumerated_betweenness(&g);
        for (a, b) in fast.scores.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn bfs_distance_differs_by_at_most_one_across_edges(g in connected_undirected(30), s in any::<prop::sample::Index>()) {
        let s = s.index(g.node_count());
        let dist = bfs(&g, s, Direction::Forward).unwrap();
        for (u, v) in g.edges() {
            prop_assert!(dist[u].abs_diff(dist[v]) <= 1);
        }
        let oracle = common::distances(&g, s);
        prop_assert_eq!(dist, oracle.into_iter().map(Option::unwrap).collect::<Vec<_>>());
    }

    #[test]
    fn diameter_bounds_hold(g in connected_undirected(25), seed in any::<u64>()) {
        let est = estimate_diameter(&g, seed).unwrap();
        let truth = (0..g.node_count())
            .map(|s| common::distances(&g, s).into_iter().map(Option::unwrap).max().unwrap())
            .max()
            .unwrap();
        prop_assert!(est.lower <= truth && truth <= est.upper);
        prop_assert_eq!(est.vertex_diameter_upper, est.upper + 1);
        prop_assert!(est.lower >= 1);
    }

    #[test]
    fn gnm_has_exact_edge_count(n in 2usize..60, frac in 0.0..1.0f64, seed in any::<u64>()) {
        let m = (frac * (n * (n - 1) / 2) as f64) as u64;
        let g = generate_gnm(n, m, seed).unwrap();
        prop_assert_eq!(g.edge_count() as u64, m);
        prop_assert_eq!(g, generate_gnm(n, m, seed).unwrap());
    }

    #[test]
    fn edge_list_round_trip(g in connected_undirected(30)) {
        let again = parse_edge_list(&write_edge_list(&g), false).unwrap();
        prop_assert_eq!(again, g);
    }

    #[test]
    fn sampled_paths_are_shortest_paths(g in connected_undirected(25), seed in any::<u64>(), bidirectional in any::<bool>()) {
        let kind = if bidirectional { SamplerKind::Bidirectional } else { SamplerKind::Reference };
        let mut sampler = PathSampler::new(&g, kind);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = g.node_count();
        for i in 0..20 {
            let s = i % n;
            let t = (i * 7 + 1) % n;
            if s == t {
                continue;
            }
            let p = sampler.sample(s, t, &mut rng).unwrap();
            let dist = common::distances(&g, s);
            prop_assert_eq!(p.source(), s);
            prop_assert_eq!(p.target(), t);
            prop_assert_eq!(Some(p.hops()), dist[t]);
            for w in p.nodes.windows(2) {
                prop_assert!(g.has_edge(w[0], w[1]));
            }
        }
    }

    #[test]
    fn kadabra_never_exceeds_rounded_cap(g in connected_undirected(20), c in 1u64..40, eps in 0.05..0.3f64, seed in any::<u64>()) {
        let params = KadabraParams { c, ..KadabraParams::new(eps, 0.1, seed) };
        let est = kadabra(&g, &params).unwrap();
        let omega = non_adaptive_cap(g.node_count(), eps, 0.1);
        prop_assert_eq!(est.omega, omega);
        prop_assert!(est.samples_used <= omega.div_ceil(c) * c);
        prop_assert!(est.samples_used > 0);
    }

    #[test]
    fn deviation_bound_non_increasing_in_tau(b in 0.0..=1.0f64, node_delta in 1e-8..0.5f64, tau in 1u64..1_000_000) {
        prop_assert!(deviation_bound(b, node_delta, tau + 1) <= deviation_bound(b, node_delta, tau));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn runfile_round_trip(r in common::run_output()) {
        let text = write_run_output(&r).unwrap();
        let back = parse_run_output(&text).unwrap();
        prop_assert_eq!(back.run_time.to_bits(), r.run_time.to_bits());
        prop_assert_eq!(back, r);
    }

    #[test]
    fn truncated_records_are_rejected(r in common::run_output(), cut in any::<prop::sample::Index>()) {
        let text = write_run_output(&r).unwrap();
        let at = cut.index(text.len());
        if text.is_char_boundary(at) {
            prop_assert!(parse_run_output(&text[..at]).is_err());
        }
    }
}

#[test]
fn removing_a_required_key_names_it() {
    let base = common::EXAMPLE_RECORD;
    let required = [
        ("info:\n  commit: fef6c5ca\n  date: '2018-09-14T12:21:55.497368'\n  host: erle\n", "info"),
        ("  commit: fef6c5ca\n", "commit"),
        ("  date: '2018-09-14T12:21:55.497368'\n", "date"),
        ("  host: erle\n", "host"),
        ("iterations: 12598\n", "iterations"),
        ("parameters:\n  delta: 0.1\n  epsilon: 0.015\n  seed: 0\n", "parameters"),
        ("  delta: 0.1\n", "delta"),
        ("  epsilon: 0.015\n", "epsilon"),
        ("  seed: 0\n", "seed"),
        ("run_time: 1.6034371852874756\n", "run_time"),
        ("topk_nodes:\n- 156\n- 45\n- 596\n", "topk_nodes"),
        ("topk_scores:\n- 0.0651690744562629\n- 0.04643594221304969\n- 0.0349261787585331\n", "topk_scores"),
    ];
    for (block, key) in required {
        assert!(base.contains(block), "{key}");
        let text = base.replacen(block, "", 1);
        match parse_run_output(&text) {
            Err(RunfileError::MissingKey(k)) => assert!(k.ends_with(key), "{k} vs {key}"),
            other => panic!("removing {key}: {other:?}"),
        }
    }
}

fn positive_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-6.0..6.0f64).prop_map(f64::exp), len)
}

fn record(algorithm: &str, instance: &str, repetition: u32, run_time: f64) -> RunRecord {
    RunRecord {
        algorithm: algorithm.into(),
        instance: instance.into(),
        class: None,
        repetition,
        seed: repetition as u64,
        run_time,
        wall_time: None,
        iterations: 1,
        epsilon: 0.01,
        delta: 0.1,
        parameters: BTreeMap::new(),
        nodes: None,
        edges: None,
        diameter: None,
        topk_nodes: vec![],
        topk_scores: vec![],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn geometric_mean_of_ratios_is_ratio_of_geometric_means(pairs in prop::collection::vec(((-4.0..4.0f64), (-4.0..4.0f64)), 1..40)) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0.exp()).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1.exp()).collect();
        let ratios: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x / y).collect();
        let lhs = geometric_mean(&ratios).unwrap();
        let rhs = geometric_mean(&a).unwrap() / geometric_mean(&b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0), "{lhs} {rhs}");
    }

    #[test]
    fn split_is_disjoint_and_exhaustive(classes in prop::collection::vec(0usize..5, 1..40), per_class in 1usize..4, seed in any::<u64>()) {
        let instances: Vec<(String, String)> = classes.iter().enumerate().map(|(i, c)| (format!("i{i}"), format!("c{c}"))).collect();
        let plan = stratified_split(&instances, per_class, seed).unwrap();
        prop_assert!(plan.tuning.is_disjoint(&plan.evaluation));
        let all: BTreeSet<String> = instances.iter().map(|(n, _)| n.clone()).collect();
        let union: BTreeSet<String> = plan.tuning.union(&plan.evaluation).cloned().collect();
        prop_assert_eq!(union, all);
        for class in classes.iter().map(|c| format!("c{c}")).collect::<BTreeSet<_>>() {
            let members: Vec<&String> = instances.iter().filter(|(_, c)| *c == class).map(|(n, _)| n).collect();
            let picked = members.iter().filter(|n| plan.tuning.contains(**n)).count();
            prop_assert_eq!(picked, per_class.min(members.len()));
        }
    }

    #[test]
    fn speedup_table_is_antisymmetric(times in prop::collection::vec((positive_vec(1..4), positive_vec(1..4)), 1..12)) {
        let mut rows = Vec::new();
        for (i, (ta, tb)) in times.iter().enumerate() {
            for (r, t) in ta.iter().enumerate() {
                rows.push(record("a", &format!("g{i}"), r as u32, *t));
            }
            for (r, t) in tb.iter().enumerate() {
                rows.push(record("b", &format!("g{i}"), r as u32, *t));
            }
        }
        let frame = ResultFrame::new(rows).unwrap();
        let ab = speedup_table(&frame, "a", "b").unwrap();
        let ba = speedup_table(&frame, "b", "a").unwrap();
        prop_assert!((ab.geometric_mean * ba.geometric_mean - 1.0).abs() <= 1e-12);
        for (x, y) in ab.rows.iter().zip(&ba.rows) {
            prop_assert_eq!(&x.instance, &y.instance);
            prop_assert!((x.ratio * y.ratio - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn relative_deviation_sums_to_zero(values in positive_vec(2..50)) {
        let d = relative_deviation(&values).unwrap();
        prop_assert!(d.iter().sum::<f64>().abs() <= 1e-12);
    }

    #[test]
    fn log_axis_doubling_shifts_by_log2(values in positive_vec(1..20), pick in any::<prop::sample::Index>()) {
        let axis = Axis::fit(Scale::Log10, values.iter().copied(), 50.0, 600.0);
        let v = values[pick.index(values.len())];
        let per_decade = (axis.end - axis.start) / (axis.hi - axis.lo);
        let shift = axis.position(2.0 * v) - axis.position(v);
        prop_assert!((shift - 2f64.log10() * per_decade).abs() <= 1e-9);
    }

    #[test]
    fn output_paths_are_injective(a in "[a-z0-9._+-]{1,8}", b in "[a-z0-9._+-]{1,8}", ra in 0u32..50, rb in 0u32..50) {
        prop_assume!(a != "." && a != ".." && b != "." && b != "..");
        let dir = Path::new("/out");
        let pa = output_path(dir, "cfg", &a, ra);
        let pb = output_path(dir, "cfg", &b, rb);
        prop_assert_eq!(pa == pb, a == b && ra == rb);
        prop_assert_eq!(parse_output_path(dir, &pa), Some(("cfg".to_string(), a, ra)));
    }
}

fn paired_values() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=10).prop_flat_map(|k| {
        (
            prop::collection::vec((-4i32..=4).prop_map(f64::from), k),
            prop::collection::vec((-4i32..=4).prop_map(f64::from), k),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn wilcoxon_matches_enumeration((a, b) in paired_values()) {
        let r = wilcoxon_signed_rank(&PairedSample::from_values(a.clone(), b.clone()).unwrap());
        let p = common::enumerated_wilcoxon_p(&a, &b);
        prop_assert!((r.p_value - p).abs() <= 1e-12, "{} vs {p}", r.p_value);
    }

    #[test]
    fn wilcoxon_invariant_under_positive_rescaling((a, b) in paired_values(), scale in 0.01..100.0f64) {
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let zeros = vec![0.0; d.len()];
        let base = wilcoxon_signed_rank(&PairedSample::from_values(d.clone(), zeros.clone()).unwrap());
        let scaled = d.iter().map(|x| x * scale).collect();
        let scaled = wilcoxon_signed_rank(&PairedSample::from_values(scaled, zeros).unwrap());
        prop_assert_eq!(base.p_value, wilcoxon_signed_rank(&PairedSample::from_values(a, b).unwrap()).p_value);
        prop_assert_eq!(base.p_value, scaled.p_value);
        prop_assert_eq!(base.statistic, scaled.statistic);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hpd_width_shrinks_with_mass(samples in prop::collection::vec(-50.0..50.0f64, 100..400), m1 in 0.05..0.99f64, m2 in 0.05..0.99f64) {
        let (small, large) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
        let (a, b) = hpd_interval(&samples, small).unwrap();
        let (c, d) = hpd_interval(&samples, large).unwrap();
        prop_assert!(b - a <= d - c);
    }

    #[test]
    fn widening_rope_never_turns_equivalent_into_different(
        lo in -2.0..2.0f64, width in 0.0..2.0f64, r_lo in -2.0..2.0f64, r_width in 0.01..2.0f64, grow in 0.0..1.0f64, grow2 in 0.0..1.0f64,
    ) {
        let interval = (lo, lo + width);
        let narrow = rope_verdict(interval, r_lo, r_lo + r_width).unwrap();
        let wide = rope_verdict(interval, r_lo - grow, r_lo + r_width + grow2).unwrap();
        if narrow == RopeVerdict::PracticallyEquivalent {
            prop_assert_eq!(wide, RopeVerdict::PracticallyEquivalent);
        }
        if narrow != RopeVerdict::Different {
            prop_assert_ne!(wide, RopeVerdict::Different);
        }
    }
}

fn check_svg(svg: &str) -> Result<(), TestCaseError> {
    let doc = roxmltree::Document::parse(svg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let root = doc.root_element();
    prop_assert_eq!(root.tag_name().name(), "svg");
    for attr in ["width", "height", "viewBox"] {
        prop_assert!(root.attribute(attr).is_some(), "missing {}", attr);
    }
    Ok(())
}

fn label() -> impl Strategy<Value = String> {
    "[ -~]{1,12}"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn figures_are_well_formed(
        points in prop::collection::vec((1e-3..1e6f64, 1e-3..1e4f64), 1..30),
        labels in prop::collection::btree_set(label(), 2),
        bars in prop::collection::vec((label(), 1e-3..1e3f64), 1..10),
        groups in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 1..30), 1..4),
    ) {
        let labels: Vec<String> = labels.into_iter().collect();
        let series = vec![
            PlotSeries { label: labels[0].clone(), points: points.clone(), mark: MarkShape::Circle },
            PlotSeries { label: labels[1].clone(), points, mark: MarkShape::Cross },
        ];
        let opts = ScatterOptions { title: "t <&> \"q\"".into(), ..ScatterOptions::default() };
        check_svg(&scatter_svg(&series, &opts).unwrap())?;
        let mut seen = BTreeSet::new();
        let bars: Vec<(String, f64)> = bars.into_iter().filter(|(l, _)| seen.insert(l.clone())).collect();
        check_svg(&speedup_bars_svg(&bars, "speedup & co", "ratio").unwrap())?;
        let groups: Vec<(String, Vec<f64>)> = groups.into_iter().enumerate().map(|(i, g)| (format!("g<{i}>"), g)).collect();
        check_svg(&box_plot_svg(&groups, "deviation", "rel").unwrap())?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn collect_accounts_for_every_file(
        outcomes in prop::collection::vec(0u8..5, 1..20),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path();
        let good = common::EXAMPLE_RECORD;
        // at least one success so collection does not error out
        let mut expected = (1usize, 0usize, 0usize, 0usize);
        fs::create_dir_all(out.join("cfg")).unwrap();
        fs::write(output_path(out, "cfg", "base", 0), good).unwrap();
        for (i, kind) in outcomes.iter().enumerate() {
            let p = output_path(out, "cfg", &format!("g{i}"), 0);
            match kind {
                0 => { fs::write(&p, good).unwrap(); expected.0 += 1; }
                1 => { fs::write(&p, &good[..good.len() - 5]).unwrap(); expected.1 += 1; }
                2 => { fs::write(p.with_extension("failed"), "exit 1\n").unwrap(); expected.2 += 1; }
                3 => { fs::write(p.with_extension("running"), "1 h 0\n").unwrap(); expected.3 += 1; }
                _ => { fs::write(out.join("cfg").join(format!("stray{i}.txt")), "x").unwrap(); expected.1 += 1; }
            }
        }
        let report = collect_successful(out).unwrap();
        prop_assert_eq!(
            (report.frame.len(), report.rejected.len(), report.failed.len(), report.in_progress.len()),
            expected
        );
        prop_assert_eq!(report.files_seen, expected.0 + expected.1 + expected.2 + expected.3);
    }
}

#[test]
fn connected_strategy_sanity() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..20 {
        let g = connected_undirected(12).new_tree(&mut runner).unwrap().current();
        assert!(is_connected(&g));
    }
}
