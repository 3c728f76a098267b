//! Result collection, aggregation and experiment planning helpers.
//!
//! Per-instance values are aggregated with the arithmetic mean over
//! repetitions, ratios across instances with the geometric mean.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{estimate_diameter, extract_largest_component, load_edge_list};
use crate::orchestrator::{parse_output_path, run_descriptors, ExperimentConfig, RunDescriptor, OUTPUT_EXTENSION};
use crate::runfile::{parse_run_output, ParamValue};
use crate::stats::{mean, sample_sd, skewness, ModelData, ModelVariant};

/// Per-instance skewness above which aggregated means are flagged.
pub const SKEW_WARNING: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollectError {
    #[error("no successful runs found ({failed} failed, {rejected} rejected)")]
    NoSuccessfulRuns { failed: usize, rejected: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("algorithms `{0}` and `{1}` share no instance")]
    NoSharedInstances(String, String),
    #[error("missing runs: {}", .0.join(", "))]
    MissingRuns(Vec<String>),
    #[error("{0}")]
    Io(String),
    #[error("CSV: {0}")]
    Csv(String),
}

fn invalid(msg: impl Into<String>) -> CollectError {
    CollectError::Invalid(msg.into())
}

/// One successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// Configuration name.
    pub algorithm: String,
    pub instance: String,
    pub class: Option<String>,
    pub repetition: u32,
    pub seed: u64,
    pub run_time: f64,
    pub wall_time: Option<f64>,
    pub iterations: u64,
    pub epsilon: f64,
    pub delta: f64,
    /// Numeric algorithm-specific parameters.
    pub parameters: BTreeMap<String, f64>,
    pub nodes: Option<usize>,
    pub edges: Option<usize>,
    pub diameter: Option<usize>,
    pub topk_nodes: Vec<u64>,
    pub topk_scores: Vec<f64>,
}

impl RunRecord {
    /// Looks up `epsilon`, `delta`, `seed` or an algorithm-specific parameter.
    pub fn parameter(&self, name: &str) -> Option<f64> {
        match name {
            "epsilon" => Some(self.epsilon),
            "delta" => Some(self.delta),
            "seed" => Some(self.seed as f64),
            _ => self.parameters.get(name).copied(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultFrame {
    /// Sorted by (algorithm, instance, repetition).
    pub rows: Vec<RunRecord>,
}

impl ResultFrame {
    pub fn new(mut rows: Vec<RunRecord>) -> Result<Self, CollectError> {
        rows.sort_by(|a, b| {
            (&a.algorithm, &a.instance, a.repetition).cmp(&(&b.algorithm, &b.instance, b.repetition))
        });
        for w in rows.windows(2) {
            if (&w[0].algorithm, &w[0].instance, w[0].repetition) == (&w[1].algorithm, &w[1].instance, w[1].repetition) {
                return Err(invalid(format!(
                    "duplicate run {}/{} r{}",
                    w[0].algorithm, w[0].instance, w[0].repetition
                )));
            }
        }
        Ok(ResultFrame { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn algorithms(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.algorithm.as_str()).collect()
    }

    pub fn instances(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.instance.as_str()).collect()
    }

    /// Running times of one algorithm grouped by instance.
    pub fn times_by_instance(&self, algorithm: &str) -> BTreeMap<&str, Vec<f64>> {
        let mut out: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.algorithm == algorithm) {
            out.entry(&r.instance).or_default().push(r.run_time);
        }
        out
    }

    /// Fills class and graph attributes from per-instance tables.
    pub fn join_attributes(
        &mut self,
        attributes: &BTreeMap<String, InstanceAttributes>,
        classes: &BTreeMap<String, String>,
    ) {
        for r in &mut self.rows {
            if let Some(a) = attributes.get(&r.instance) {
                r.nodes = Some(a.nodes);
                r.edges = Some(a.edges);
                r.diameter = Some(a.diameter);
            }
            if let Some(c) = classes.get(&r.instance) {
                r.class = Some(c.clone());
            }
        }
    }
}

/// What was found below an output directory. Every file is accounted for
/// in exactly one of the lists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CollectReport {
    pub frame: ResultFrame,
    /// Failure markers with their recorded reason.
    pub failed: Vec<(PathBuf, String)>,
    /// Output files that do not parse, and unrecognized files.
    pub rejected: Vec<(PathBuf, String)>,
    /// Lock and partial files of runs still executing.
    pub in_progress: Vec<PathBuf>,
    pub files_seen: usize,
}

/// Parses every output file below `output_dir`.
pub fn collect_successful(output_dir: &Path) -> Result<CollectReport, CollectError> {
    let mut report = CollectReport::default();
    let mut rows = Vec::new();
    let mut files = Vec::new();
    let io = |e: std::io::Error, p: &Path| CollectError::Io(format!("{}: {e}", p.display()));
    for dir in fs::read_dir(output_dir).map_err(|e| io(e, output_dir))? {
        let dir = dir.map_err(|e| io(e, output_dir))?.path();
        if !dir.is_dir() {
            files.push(dir);
            continue;
        }
        for f in fs::read_dir(&dir).map_err(|e| io(e, &dir))? {
            files.push(f.map_err(|e| io(e, &dir))?.path());
        }
    }
    files.sort();
    report.files_seen = files.len();
    for path in files {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let ident = parse_output_path(output_dir, &path);
        match (ext, ident) {
            (OUTPUT_EXTENSION, Some((configuration, instance, repetition))) => {
                match read_record(&path, configuration, instance, repetition) {
                    Ok(row) => rows.push(row),
                    Err(reason) => report.rejected.push((path, reason)),
                }
            }
            ("failed", Some(_)) => {
                let reason = fs::read_to_string(&path).unwrap_or_default().trim().to_string();
                report.failed.push((path, reason));
            }
            ("running" | "tmp" | "stderr", Some(_)) => report.in_progress.push(path),
            _ => report.rejected.push((path, "not a run output file".into())),
        }
    }
    if rows.is_empty() {
        return Err(CollectError::NoSuccessfulRuns {
            failed: report.failed.len(),
            rejected: report.rejected.len(),
        });
    }
    report.frame = ResultFrame::new(rows)?;
    Ok(report)
}

fn read_record(path: &Path, algorithm: String, instance: String, repetition: u32) -> Result<RunRecord, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let out = parse_run_output(&text).map_err(|e| e.to_string())?;
    let parameters = out
        .parameters
        .extra
        .iter()
        .filter_map(|(k, v)| match v {
            ParamValue::Int(i) => Some((k.clone(), *i as f64)),
            ParamValue::Real(x) => Some((k.clone(), *x)),
            ParamValue::Text(_) => None,
        })
        .collect();
    Ok(RunRecord {
        algorithm,
        instance,
        class: None,
        repetition,
        seed: out.parameters.seed,
        run_time: out.run_time,
        wall_time: out.wall_time,
        iterations: out.iterations,
        epsilon: out.parameters.epsilon,
        delta: out.parameters.delta,
        parameters,
        nodes: None,
        edges: None,
        diameter: None,
        topk_nodes: out.topk_nodes,
        topk_scores: out.topk_scores,
    })
}

/// Runs of the configuration without a successful output in `frame`.
pub fn missing_runs(cfg: &ExperimentConfig, frame: &ResultFrame) -> Vec<RunDescriptor> {
    let have: BTreeSet<(&str, &str, u32)> = frame
        .rows
        .iter()
        .map(|r| (r.algorithm.as_str(), r.instance.as_str(), r.repetition))
        .collect();
    run_descriptors(cfg)
        .into_iter()
        .filter(|d| !have.contains(&(d.configuration.as_str(), d.instance.as_str(), d.repetition)))
        .collect()
}

/// Size and diameter of the largest connected component the workload runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceAttributes {
    pub nodes: usize,
    pub edges: usize,
    /// Upper bound from the double-sweep estimate (exact on small graphs).
    pub diameter: usize,
}

pub fn instance_attributes(path: &Path, directed: bool, seed: u64) -> Result<InstanceAttributes, CollectError> {
    let file = fs::File::open(path).map_err(|e| CollectError::Io(format!("{}: {e}", path.display())))?;
    let g = load_edge_list(std::io::BufReader::new(file), directed)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let (lcc, _) = extract_largest_component(&g);
    let d = estimate_diameter(&lcc, seed).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(InstanceAttributes {
        nodes: lcc.node_count(),
        edges: lcc.edge_count(),
        diameter: d.upper,
    })
}

/// Attributes and classes of every configured instance whose file exists.
pub fn config_attributes(
    cfg: &ExperimentConfig,
) -> (BTreeMap<String, InstanceAttributes>, BTreeMap<String, String>) {
    let mut attrs = BTreeMap::new();
    let mut classes = BTreeMap::new();
    for inst in &cfg.instances {
        if let Some(c) = &inst.class {
            classes.insert(inst.name.clone(), c.clone());
        }
        match instance_attributes(&cfg.instance_path(inst), false, cfg.base_seed) {
            Ok(a) => {
                attrs.insert(inst.name.clone(), a);
            }
            Err(e) => log::warn!("no attributes for {}: {e}", inst.name),
        }
    }
    (attrs, classes)
}

// CSV layout, one row per run. Lists are `;`-joined, parameters `k=v;...`.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    algorithm: String,
    instance: String,
    class: Option<String>,
    repetition: u32,
    seed: u64,
    run_time: f64,
    wall_time: Option<f64>,
    iterations: u64,
    epsilon: f64,
    delta: f64,
    parameters: String,
    nodes: Option<usize>,
    edges: Option<usize>,
    diameter: Option<usize>,
    topk_nodes: String,
    topk_scores: String,
}

/// Header of the per-run CSV export.
pub const CSV_HEADER: &str = "algorithm,instance,class,repetition,seed,run_time,wall_time,iterations,epsilon,delta,parameters,nodes,edges,diameter,topk_nodes,topk_scores";

/// Columns that depend on timing and differ between otherwise identical runs.
pub const TIMING_COLUMNS: [&str; 2] = ["run_time", "wall_time"];

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn split<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CollectError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|p| p.parse().map_err(|_| CollectError::Csv(format!("bad {what} entry `{p}`"))))
        .collect()
}

pub fn write_csv<W: Write>(frame: &ResultFrame, writer: W) -> Result<(), CollectError> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| CollectError::Csv(e.to_string());
    for r in &frame.rows {
        let parameters = r
            .parameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        w.serialize(CsvRow {
            algorithm: r.algorithm.clone(),
            instance: r.instance.clone(),
            class: r.class.clone(),
            repetition: r.repetition,
            seed: r.seed,
            run_time: r.run_time,
            wall_time: r.wall_time,
            iterations: r.iterations,
            epsilon: r.epsilon,
            delta: r.delta,
            parameters,
            nodes: r.nodes,
            edges: r.edges,
            diameter: r.diameter,
            topk_nodes: join(&r.topk_nodes),
            topk_scores: join(&r.topk_scores),
        })
        .map_err(err)?;
    }
    w.flush().map_err(|e| CollectError::Io(e.to_string()))
}

pub fn read_csv<R: Read>(reader: R) -> Result<ResultFrame, CollectError> {
    let mut rd = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for row in rd.deserialize::<CsvRow>() {
        let row = row.map_err(|e| CollectError::Csv(e.to_string()))?;
        let mut parameters = BTreeMap::new();
        for item in row.parameters.split(';').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CollectError::Csv(format!("bad parameter `{item}`")))?;
            let v: f64 = v.parse().map_err(|_| CollectError::Csv(format!("bad parameter `{item}`")))?;
            parameters.insert(k.to_string(), v);
        }
        rows.push(RunRecord {
            algorithm: row.algorithm,
            instance: row.instance,
            class: row.class,
            repetition: row.repetition,
            seed: row.seed,
            run_time: row.run_time,
            wall_time: row.wall_time,
            iterations: row.iterations,
            epsilon: row.epsilon,
            delta: row.delta,
            parameters,
            nodes: row.nodes,
            edges: row.edges,
            diameter: row.diameter,
            topk_nodes: split(&row.topk_nodes, "topk_nodes")?,
            topk_scores: split(&row.topk_scores, "topk_scores")?,
        });
    }
    ResultFrame::new(rows)
}

/// `(∏ values)^(1/k)`, computed in log space.
pub fn geometric_mean(values: &[f64]) -> Result<f64, CollectError> {
    if values.is_empty() {
        return Err(invalid("geometric mean of no values"));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(invalid(format!("geometric mean needs positive values, got {v}")));
    }
    if let [only] = values {
        return Ok(*only);
    }
    Ok((values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub instance: String,
    pub nodes: Option<usize>,
    pub mean_a: f64,
    pub mean_b: f64,
    /// mean_b / mean_a: speedup of a over b.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupTable {
    pub algorithm_a: String,
    pub algorithm_b: String,
    /// Sorted by node count where known, then by name.
    pub rows: Vec<SpeedupRow>,
    pub geometric_mean: f64,
    /// Instances with runs of only one side; never imputed.
    pub only_a: Vec<String>,
    pub only_b: Vec<String>,
    pub skew_warnings: Vec<String>,
}

impl SpeedupTable {
    pub fn min_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min)
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), CollectError> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| CollectError::Csv(e.to_string());
        w.write_record(["instance", "nodes", "mean_a", "mean_b", "ratio"]).map_err(err)?;
        for r in &self.rows {
            w.write_record([
                r.instance.clone(),
                r.nodes.map(|n| n.to_string()).unwrap_or_default(),
                r.mean_a.to_string(),
                r.mean_b.to_string(),
                r.ratio.to_string(),
            ])
            .map_err(err)?;
        }
        w.write_record(["geometric_mean", "", "", "", &self.geometric_mean.to_string()])
            .map_err(err)?;
        w.flush().map_err(|e| CollectError::Io(e.to_string()))
    }
}

/// Per-instance ratio of mean running times of `b` over `a`, summarized by
/// the geometric mean.
pub fn speedup_table(frame: &ResultFrame, algorithm_a: &str, algorithm_b: &str) -> Result<SpeedupTable, CollectError> {
    let a = frame.times_by_instance(algorithm_a);
    let b = frame.times_by_instance(algorithm_b);
    let nodes: BTreeMap<&str, usize> = frame
        .rows
        .iter()
        .filter_map(|r| r.nodes.map(|n| (r.instance.as_str(), n)))
        .collect();
    let mut rows = Vec::new();
    let mut skew_warnings = Vec::new();
    for (inst, ta) in &a {
        let Some(tb) = b.get(inst) else { continue };
        for (alg, times) in [(algorithm_a, ta), (algorithm_b, tb)] {
            if let Ok(s) = skewness(times) {
                if s > SKEW_WARNING {
                    skew_warnings.push(format!("{alg} on {inst}: skewness {s:.2}"));
                }
            }
        }
        let mean_a = mean(ta).map_err(|e| invalid(e.to_string()))?;
        let mean_b = mean(tb).map_err(|e| invalid(e.to_string()))?;
        if !(mean_a > 0.0 && mean_b > 0.0) {
            return Err(invalid(format!("non-positive mean running time on {inst}")));
        }
        rows.push(SpeedupRow {
            instance: inst.to_string(),
            nodes: nodes.get(inst).copied(),
            mean_a,
            mean_b,
            ratio: mean_b / mean_a,
        });
    }
    if rows.is_empty() {
        return Err(CollectError::NoSharedInstances(algorithm_a.into(), algorithm_b.into()));
    }
    rows.sort_by(|x, y| {
        (x.nodes.unwrap_or(usize::MAX), &x.instance).cmp(&(y.nodes.unwrap_or(usize::MAX), &y.instance))
    });
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let only = |m: &BTreeMap<&str, Vec<f64>>, other: &BTreeMap<&str, Vec<f64>>| -> Vec<String> {
        m.keys().filter(|k| !other.contains_key(*k)).map(|k| k.to_string()).collect()
    };
    Ok(SpeedupTable {
        algorithm_a: algorithm_a.into(),
        algorithm_b: algorithm_b.into(),
        geometric_mean: geometric_mean(&ratios)?,
        only_a: only(&a, &b),
        only_b: only(&b, &a),
        rows,
        skew_warnings,
    })
}

/// s / √k with the sample standard deviation s.
pub fn standard_error(values: &[f64]) -> Result<f64, CollectError> {
    let sd = sample_sd(values).map_err(|e| invalid(e.to_string()))?;
    Ok(sd / (values.len() as f64).sqrt())
}

/// Smallest k with √(variance / k) ≤ target standard error.
pub fn required_repetitions(variance_estimate: f64, target_se: f64) -> Result<u64, CollectError> {
    if !(variance_estimate > 0.0 && target_se > 0.0) || !variance_estimate.is_finite() || !target_se.is_finite() {
        return Err(invalid("variance estimate and target standard error must be positive"));
    }
    let k = (variance_estimate / (target_se * target_se)).ceil() as u64;
    // guard against the quotient rounding just above an integer
    let k = if k > 1 && (variance_estimate / (k - 1) as f64).sqrt() <= target_se {
        k - 1
    } else {
        k
    };
    Ok(k.max(1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub tuning: BTreeSet<String>,
    pub evaluation: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitOptions {
    pub per_class: usize,
    pub seed: u64,
    /// Classes with fewer instances stay entirely in the evaluation set.
    pub min_class_size: usize,
    /// Classes kept entirely in the evaluation set.
    pub exclude_classes: BTreeSet<String>,
}

impl SplitOptions {
    pub fn new(per_class: usize, seed: u64) -> Self {
        SplitOptions {
            per_class,
            seed,
            min_class_size: 1,
            exclude_classes: BTreeSet::new(),
        }
    }
}

/// Stratified sampling: `per_class` instances drawn uniformly from each
/// class (all of a smaller class) form the tuning set.
pub fn stratified_split(instances: &[(String, String)], per_class: usize, seed: u64) -> Result<SplitPlan, CollectError> {
    stratified_split_with(instances, &SplitOptions::new(per_class, seed))
}

/// `instances` holds `(name, class)` pairs.
pub fn stratified_split_with(instances: &[(String, String)], opts: &SplitOptions) -> Result<SplitPlan, CollectError> {
    if instances.is_empty() {
        return Err(invalid("no instances to split"));
    }
    if opts.per_class == 0 {
        return Err(invalid("per_class must be at least 1"));
    }
    let mut classes: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for (name, class) in instances {
        if !seen.insert(name.as_str()) {
            return Err(invalid(format!("instance {name} listed twice")));
        }
        classes.entry(class).or_default().push(name);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut tuning = BTreeSet::new();
    for (class, members) in &mut classes {
        if members.len() < opts.min_class_size || opts.exclude_classes.contains(*class) {
            continue;
        }
        members.sort_unstable();
        let take = opts.per_class.min(members.len());
        for i in sample(&mut rng, members.len(), take) {
            tuning.insert(members[i].to_string());
        }
    }
    let evaluation = instances
        .iter()
        .map(|(n, _)| n.clone())
        .filter(|n| !tuning.contains(n))
        .collect();
    Ok(SplitPlan { tuning, evaluation })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    pub best: f64,
    /// (candidate, mean running time), in candidate order.
    pub means: Vec<(f64, f64)>,
}

/// The candidate with the lowest mean; ties go to the smaller value.
pub fn select_best(means: &[(f64, f64)]) -> Option<f64> {
    means
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .map(|(v, _)| v)
}

/// Mean running time per value of `parameter` over the tuning instances.
pub fn tune_parameter(
    frame: &ResultFrame,
    parameter: &str,
    candidates: &[f64],
    tuning_instances: &BTreeSet<String>,
) -> Result<TuningResult, CollectError> {
    if candidates.is_empty() {
        return Err(invalid("no candidate values"));
    }
    let mut means = Vec::new();
    let mut gaps = Vec::new();
    for &c in candidates {
        let runs: Vec<&RunRecord> = frame
            .rows
            .iter()
            .filter(|r| r.parameter(parameter) == Some(c) && tuning_instances.contains(&r.instance))
            .collect();
        for inst in tuning_instances {
            if !runs.iter().any(|r| &r.instance == inst) {
                gaps.push(format!("{parameter}={c} on {inst}"));
            }
        }
        if !runs.is_empty() {
            let times: Vec<f64> = runs.iter().map(|r| r.run_time).collect();
            means.push((c, mean(&times).map_err(|e| invalid(e.to_string()))?));
        }
    }
    if !gaps.is_empty() {
        return Err(CollectError::MissingRuns(gaps));
    }
    let best = select_best(&means).expect("candidates are non-empty");
    Ok(TuningResult { best, means })
}

/// Response and covariates for one of the regression models, one point per
/// instance, built from per-instance mean running times.
///
/// `SizeScaling` regresses `algorithm_a` on node counts; the relative
/// variants regress `algorithm_a` on `algorithm_b`, the diameter variant
/// adds the diameter estimate.
pub fn model_data(
    frame: &ResultFrame,
    variant: ModelVariant,
    algorithm_a: &str,
    algorithm_b: Option<&str>,
) -> Result<(Vec<String>, ModelData), CollectError> {
    let attrs: BTreeMap<&str, (Option<usize>, Option<usize>)> = frame
        .rows
        .iter()
        .map(|r| (r.instance.as_str(), (r.nodes, r.diameter)))
        .collect();
    let a = frame.times_by_instance(algorithm_a);
    if a.is_empty() {
        return Err(invalid(format!("no runs of `{algorithm_a}`")));
    }
    let b = match (variant, algorithm_b) {
        (ModelVariant::SizeScaling, _) => None,
        (_, Some(name)) => Some(frame.times_by_instance(name)),
        (_, None) => return Err(invalid(format!("model {} needs a second algorithm", variant.name()))),
    };
    let mut labels = Vec::new();
    let (mut y, mut x, mut z) = (Vec::new(), Vec::new(), Vec::new());
    for (inst, ta) in &a {
        let (nodes, diameter) = attrs.get(inst).copied().unwrap_or((None, None));
        let covariate = match &b {
            None => match nodes {
                Some(n) => n as f64,
                None => return Err(invalid(format!("node count of {inst} unknown"))),
            },
            Some(b) => match b.get(inst) {
                Some(tb) => mean(tb).map_err(|e| invalid(e.to_string()))?,
                None => continue,
            },
        };
        if variant == ModelVariant::RelativeTimeWithDiameter {
            match diameter {
                Some(d) if d > 0 => z.push(d as f64),
                _ => return Err(invalid(format!("diameter of {inst} unknown"))),
            }
        }
        labels.push(inst.to_string());
        y.push(mean(ta).map_err(|e| invalid(e.to_string()))?);
        x.push(covariate);
    }
    let z = (variant == ModelVariant::RelativeTimeWithDiameter).then_some(z);
    let data = ModelData::from_positive(&y, &x, z.as_deref()).map_err(|e| invalid(e.to_string()))?;
    Ok((labels, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(algorithm: &str, instance: &str, repetition: u32, run_time: f64) -> RunRecord {
        RunRecord {
            algorithm: algorithm.into(),
            instance: instance.into(),
            class: None,
            repetition,
            seed: repetition as u64,
            run_time,
            wall_time: None,
            iterations: 10,
            epsilon: 0.01,
            delta: 0.1,
            parameters: BTreeMap::new(),
            nodes: None,
            edges: None,
            diameter: None,
            topk_nodes: vec![3, 1],
            topk_scores: vec![0.5, 0.25],
        }
    }

    fn frame(a: &[(&str, &[f64])], b: &[(&str, &[f64])]) -> ResultFrame {
        let mut rows = Vec::new();
        for (alg, data) in [("a", a), ("b", b)] {
            for (inst, times) in data {
                for (i, t) in times.iter().enumerate() {
                    rows.push(record(alg, inst, i as u32, *t));
                }
            }
        }
        ResultFrame::new(rows).unwrap()
    }

    #[test]
    fn geometric_mean_cases() {
        assert!((geometric_mean(&[4.0, 9.0]).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(geometric_mean(&[7.5]).unwrap(), 7.5);
        let gm_ratio = geometric_mean(&[2.0, 4.0]).unwrap();
        let quotient = geometric_mean(&[2.0, 8.0]).unwrap() / geometric_mean(&[1.0, 2.0]).unwrap();
        assert!((gm_ratio - 8f64.sqrt()).abs() < 1e-12);
        assert!((gm_ratio - quotient).abs() < 1e-12);
        assert!(geometric_mean(&[]).is_err());
        assert!(geometric_mean(&[1.0, 0.0]).is_err());
        assert!(geometric_mean(&[-1.0]).is_err());
    }

    #[test]
    fn speedup_cases() {
        let t = speedup_table(&frame(&[("g1", &[1.0, 1.0])], &[("g1", &[3.0, 5.0])]), "a", "b").unwrap();
        assert_eq!(t.rows[0].ratio, 4.0);
        assert_eq!(t.geometric_mean, 4.0);

        let same = frame(&[("g1", &[1.0, 2.0]), ("g2", &[3.0])], &[("g1", &[1.0, 2.0]), ("g2", &[3.0])]);
        let t = speedup_table(&same, "a", "b").unwrap();
        assert!(t.rows.iter().all(|r| r.ratio == 1.0));
        assert_eq!(t.geometric_mean, 1.0);

        let f = frame(
            &[("x", &[1.0]), ("y", &[1.0]), ("z", &[1.0]), ("solo", &[1.0])],
            &[("x", &[2.0]), ("y", &[8.0]), ("z", &[4.0]), ("other", &[1.0])],
        );
        let t = speedup_table(&f, "a", "b").unwrap();
        assert!((t.geometric_mean - 4.0).abs() < 1e-12);
        assert_eq!(t.only_a, ["solo"]);
        assert_eq!(t.only_b, ["other"]);
        assert_eq!((t.min_ratio(), t.max_ratio()), (2.0, 8.0));

        let disjoint = frame(&[("x", &[1.0])], &[("y", &[1.0])]);
        assert!(matches!(speedup_table(&disjoint, "a", "b"), Err(CollectError::NoSharedInstances(..))));
    }

    #[test]
    fn speedup_sorted_by_nodes_and_skew_flagged() {
        let mut f = frame(
            &[("big", &[1.0]), ("small", &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 50.0])],
            &[("big", &[2.0]), ("small", &[2.0])],
        );
        let attrs = BTreeMap::from([
            ("big".to_string(), InstanceAttributes { nodes: 100, edges: 1, diameter: 1 }),
            ("small".to_string(), InstanceAttributes { nodes: 5, edges: 1, diameter: 1 }),
        ]);
        f.join_attributes(&attrs, &BTreeMap::new());
        let t = speedup_table(&f, "a", "b").unwrap();
        assert_eq!(t.rows[0].instance, "small");
        assert_eq!(t.skew_warnings.len(), 1);
    }

    #[test]
    fn standard_error_cases() {
        assert!((standard_error(&[2.0, 4.0, 6.0]).unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(standard_error(&[5.0; 4]).unwrap(), 0.0);
        let scaled = standard_error(&[6.0, 12.0, 18.0]).unwrap();
        assert!((scaled - 3.0 * standard_error(&[2.0, 4.0, 6.0]).unwrap()).abs() < 1e-12);
        assert!(standard_error(&[1.0]).is_err());
    }

    #[test]
    fn repetition_planning() {
        assert_eq!(required_repetitions(4.0, 1.0).unwrap(), 4);
        assert_eq!(required_repetitions(4.0, 2.0).unwrap(), 1);
        assert_eq!(required_repetitions(1.0, 0.1).unwrap(), 100);
        assert!(required_repetitions(0.0, 1.0).is_err());
        assert!(required_repetitions(1.0, -1.0).is_err());
    }

    fn labelled(spec: &[(&str, usize)]) -> Vec<(String, String)> {
        spec.iter()
            .flat_map(|(class, n)| (0..*n).map(move |i| (format!("{class}-{i}"), class.to_string())))
            .collect()
    }

    #[test]
    fn split_cases() {
        let items = labelled(&[("A", 2), ("B", 2)]);
        let plan = stratified_split(&items, 1, 0).unwrap();
        assert_eq!(plan.tuning.len(), 2);
        assert_eq!(plan.evaluation.len(), 2);
        assert_eq!(plan, stratified_split(&items, 1, 0).unwrap());

        let plan = stratified_split(&labelled(&[("A", 2), ("B", 5)]), 3, 1).unwrap();
        assert!(plan.tuning.contains("A-0") && plan.tuning.contains("A-1"));
        assert_eq!(plan.tuning.len(), 5);

        assert!(stratified_split(&[], 1, 0).is_err());
        assert!(stratified_split(&items, 0, 0).is_err());
    }

    #[test]
    fn split_of_thirty_instance_collection() {
        // 30 instances in 9 classes with the frequencies of the benchmark
        // collection; one per class except the singleton and one excluded
        // class gives a 7-instance tuning set
        let items = labelled(&[
            ("Social", 8),
            ("Citation", 4),
            ("Peer-to-peer", 4),
            ("Road", 4),
            ("Hyperlink", 3),
            ("Infrastructure", 2),
            ("Coauthorship", 2),
            ("Authorship", 2),
            ("Intl. Relationship", 1),
        ]);
        assert_eq!(items.len(), 30);
        let opts = SplitOptions {
            min_class_size: 2,
            exclude_classes: BTreeSet::from(["Coauthorship".to_string()]),
            ..SplitOptions::new(1, 42)
        };
        let plan = stratified_split_with(&items, &opts).unwrap();
        assert_eq!(plan.tuning.len(), 7);
        assert_eq!(plan.evaluation.len(), 23);
        assert!(plan.evaluation.contains("Intl. Relationship-0"));
        assert!(plan.evaluation.contains("Coauthorship-0") && plan.evaluation.contains("Coauthorship-1"));
    }

    #[test]
    fn tuning_picks_fastest_then_smaller() {
        assert_eq!(select_best(&[(10.0, 200.0), (4375.0, 142.0)]), Some(4375.0));
        assert_eq!(select_best(&[(7.0, 1.0)]), Some(7.0));
        assert_eq!(select_best(&[(20.0, 5.0), (10.0, 5.0)]), Some(10.0));

        let mut rows = Vec::new();
        for (c, t) in [(10.0, 200.0), (4375.0, 142.0)] {
            for inst in ["i1", "i2"] {
                let mut r = record(&format!("k{c}"), inst, 0, t);
                r.parameters.insert("c".into(), c);
                rows.push(r);
            }
        }
        let f = ResultFrame::new(rows).unwrap();
        let set: BTreeSet<String> = ["i1".to_string(), "i2".to_string()].into();
        let res = tune_parameter(&f, "c", &[10.0, 4375.0], &set).unwrap();
        assert_eq!(res.best, 4375.0);
        assert_eq!(res.means, [(10.0, 200.0), (4375.0, 142.0)]);
        let wider: BTreeSet<String> = ["i1".to_string(), "i3".to_string()].into();
        match tune_parameter(&f, "c", &[10.0], &wider) {
            Err(CollectError::MissingRuns(gaps)) => assert_eq!(gaps, ["c=10 on i3"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut r = record("kadabra", "g", 1, 0.125);
        r.parameters.insert("c".into(), 10.0);
        r.nodes = Some(5);
        r.wall_time = Some(0.5);
        r.class = Some("Road".into());
        let f = ResultFrame::new(vec![r, record("rk", "g", 0, 1.0 / 3.0)]).unwrap();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(read_csv(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn model_data_per_instance_means() {
        let mut f = frame(&[("x", &[1.0, 3.0]), ("y", &[4.0])], &[("x", &[10.0]), ("y", &[20.0, 40.0])]);
        let attrs = BTreeMap::from([
            ("x".to_string(), InstanceAttributes { nodes: 100, edges: 1, diameter: 5 }),
            ("y".to_string(), InstanceAttributes { nodes: 1000, edges: 1, diameter: 50 }),
        ]);
        f.join_attributes(&attrs, &BTreeMap::new());
        let (labels, d) = model_data(&f, ModelVariant::RelativeTimeWithDiameter, "a", Some("b")).unwrap();
        assert_eq!(labels, ["x", "y"]);
        assert!((d.y[0] - 2f64.ln()).abs() < 1e-12);
        assert!((d.x[1] - 30f64.ln()).abs() < 1e-12);
        assert!((d.z.unwrap()[1] - 50f64.ln()).abs() < 1e-12);
        let (_, d) = model_data(&f, ModelVariant::SizeScaling, "b", None).unwrap();
        assert!((d.x[0] - 100f64.ln()).abs() < 1e-12);
        assert!(model_data(&f, ModelVariant::RelativeTime, "a", None).is_err());
    }

    #[test]
    fn duplicate_rows_rejected() {
        assert!(ResultFrame::new(vec![record("a", "g", 0, 1.0), record("a", "g", 0, 2.0)]).is_err());
    }
}
