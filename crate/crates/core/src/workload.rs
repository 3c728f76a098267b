//! The benchmark workload: load a graph, run one algorithm, emit a record.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::centrality::{brandes_exact, kadabra, rk, CentralityEstimate, KadabraParams, DEFAULT_SAMPLES_PER_ROUND};
use crate::graph::{extract_largest_component, is_connected, load_edge_list, Graph};
use crate::runfile::{capture_metadata, ParamValue, RunInfo, RunOutput, RunParameters, DEFAULT_TOP_K};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkloadAlgorithm {
    Brandes,
    Kadabra,
    Rk,
}

impl WorkloadAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            WorkloadAlgorithm::Brandes => "brandes",
            WorkloadAlgorithm::Kadabra => "kadabra",
            WorkloadAlgorithm::Rk => "rk",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadParams {
    pub algorithm: WorkloadAlgorithm,
    pub epsilon: f64,
    pub delta: f64,
    pub c: u64,
    pub seed: u64,
    pub topk: usize,
    pub directed: bool,
}

impl WorkloadParams {
    pub fn new(algorithm: WorkloadAlgorithm) -> Self {
        WorkloadParams {
            algorithm,
            epsilon: 0.01,
            delta: 0.1,
            c: DEFAULT_SAMPLES_PER_ROUND,
            seed: 0,
            topk: DEFAULT_TOP_K,
            directed: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum WorkloadError {
    /// The instance could not be read or parsed.
    #[error("cannot load instance: {0}")]
    Load(String),
    #[error("algorithm failed: {0}")]
    Algorithm(String),
}

/// A finished run plus diagnostics meant for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadResult {
    pub record: RunOutput,
    pub notes: Vec<String>,
}

/// CPU time consumed by this process so far.
pub fn process_cpu_time() -> Duration {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid out-pointer for the duration of the call.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return Duration::ZERO;
    }
    Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32)
}

pub fn load_instance(path: &Path, directed: bool) -> Result<Graph, WorkloadError> {
    let file = File::open(path).map_err(|e| WorkloadError::Load(format!("{}: {e}", path.display())))?;
    load_edge_list(BufReader::new(file), directed).map_err(|e| WorkloadError::Load(format!("{}: {e}", path.display())))
}

/// Runs on the largest (strongly) connected component. Timing covers the
/// algorithm only, not loading or component extraction.
pub fn run_workload(path: &Path, params: &WorkloadParams, info: RunInfo) -> Result<WorkloadResult, WorkloadError> {
    let g = load_instance(path, params.directed)?;
    let mut notes = Vec::new();
    let (graph, ids) = if is_connected(&g) {
        let ids = (0..g.node_count()).collect();
        (g, ids)
    } else {
        let (lcc, ids) = extract_largest_component(&g);
        notes.push(format!(
            "graph is not connected; using the largest component ({} of {} nodes, {} of {} edges)",
            lcc.node_count(),
            g.node_count(),
            lcc.edge_count(),
            g.edge_count()
        ));
        (lcc, ids)
    };

    let wall = Instant::now();
    let cpu = process_cpu_time();
    let estimate = run_algorithm(&graph, params)?;
    let run_time = (process_cpu_time().saturating_sub(cpu)).as_secs_f64();
    let wall_time = wall.elapsed().as_secs_f64();

    let top = estimate.top_k(params.topk);
    let mut extra = BTreeMap::new();
    if params.algorithm == WorkloadAlgorithm::Kadabra {
        extra.insert("c".to_string(), ParamValue::Int(params.c as i64));
    }
    let record = RunOutput {
        algorithm: Some(params.algorithm.name().to_string()),
        info,
        instance: path.file_name().map(|n| n.to_string_lossy().into_owned()),
        iterations: estimate.samples_used,
        parameters: RunParameters {
            delta: params.delta,
            epsilon: params.epsilon,
            seed: params.seed,
            extra,
        },
        run_time,
        wall_time: Some(wall_time),
        topk_nodes: top.iter().map(|&(v, _)| ids[v] as u64).collect(),
        topk_scores: top.iter().map(|&(_, s)| s).collect(),
    };
    record.validate().map_err(|e| WorkloadError::Algorithm(e.to_string()))?;
    Ok(WorkloadResult { record, notes })
}

fn run_algorithm(graph: &Graph, params: &WorkloadParams) -> Result<CentralityEstimate, WorkloadError> {
    let err = |e: crate::centrality::CentralityError| WorkloadError::Algorithm(e.to_string());
    match params.algorithm {
        WorkloadAlgorithm::Brandes => Ok(brandes_exact(graph)),
        WorkloadAlgorithm::Kadabra => {
            let kp = KadabraParams {
                c: params.c,
                ..KadabraParams::new(params.epsilon, params.delta, params.seed)
            };
            kadabra(graph, &kp).map_err(err)
        }
        WorkloadAlgorithm::Rk => rk(graph, params.epsilon, params.delta, params.seed).map_err(err),
    }
}

/// Metadata for records produced by this build: the commit of the source
/// tree it was built from.
pub fn build_metadata() -> crate::runfile::Metadata {
    capture_metadata(Path::new(env!("CARGO_MANIFEST_DIR")))
}
