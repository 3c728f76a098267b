//! Local experiment orchestration.
//!
//! Every (configuration, instance, repetition) triple is one run with a
//! fixed output location under `output_dir`:
//!
//! ```text
//! <output_dir>/<configuration>/<instance>.r<repetition>.yml      finished
//! <output_dir>/<configuration>/<instance>.r<repetition>.failed   failure marker
//! <output_dir>/<configuration>/<instance>.r<repetition>.running  lock while executing
//! <output_dir>/<configuration>/<instance>.r<repetition>.tmp      partial stdout
//! ```
//!
//! Output files are only ever created by linking a completed temporary file
//! into place, so existing results are never overwritten and a killed run
//! leaves nothing that parses as a finished record.

mod config;
mod instances;
mod runs;

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{
    parse_config, ConfigSpec, ExperimentConfig, Generator, InstanceSource, InstanceSpec, OutputMode,
    DEFAULT_REPETITIONS, DEFAULT_TIMEOUT_HOURS, INSTANCE_PLACEHOLDER,
};
pub use instances::{instances_download, DownloadReport, InstanceOutcome};
pub use runs::{
    experiments_launch, experiments_list, experiments_purge, LaunchReport, PurgeFilter, PurgeReport, RunRow,
};

#[derive(Debug, Error, PartialEq)]
pub enum OrchestratorError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("refusing to purge without a filter; pass the all flag to purge everything")]
    EmptyPurgeFilter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RunStatus {
    Pending,
    Running,
    Finished,
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Pending => "pending",
            RunStatus::Running => "running",
            RunStatus::Finished => "finished",
            RunStatus::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "pending" => RunStatus::Pending,
            "running" => RunStatus::Running,
            "finished" => RunStatus::Finished,
            "failed" => RunStatus::Failed,
            _ => return None,
        })
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunDescriptor {
    pub configuration: String,
    pub instance: String,
    /// 0-based.
    pub repetition: u32,
    /// `base_seed + repetition`.
    pub seed: u64,
    pub output_path: PathBuf,
}

impl RunDescriptor {
    fn sibling(&self, extension: &str) -> PathBuf {
        self.output_path.with_extension(extension)
    }

    pub fn failure_marker(&self) -> PathBuf {
        self.sibling("failed")
    }

    pub fn lock_path(&self) -> PathBuf {
        self.sibling("running")
    }

    pub fn temp_path(&self) -> PathBuf {
        self.sibling("tmp")
    }
}

pub const OUTPUT_EXTENSION: &str = "yml";

/// Output location of one run; a pure function of its identity.
pub fn output_path(output_dir: &Path, configuration: &str, instance: &str, repetition: u32) -> PathBuf {
    output_dir
        .join(configuration)
        .join(format!("{instance}.r{repetition}.{OUTPUT_EXTENSION}"))
}

/// Inverse of [`output_path`] for a file below `output_dir`:
/// `(configuration, instance, repetition)`.
pub fn parse_output_path(output_dir: &Path, path: &Path) -> Option<(String, String, u32)> {
    let rel = path.strip_prefix(output_dir).ok()?;
    let mut parts = rel.components();
    let configuration = parts.next()?.as_os_str().to_str()?.to_string();
    let file = parts.next()?.as_os_str().to_str()?;
    if parts.next().is_some() {
        return None;
    }
    let stem = file.rsplit_once('.')?.0;
    let (instance, rep) = stem.rsplit_once(".r")?;
    if instance.is_empty() || rep.is_empty() || !rep.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((configuration, instance.to_string(), rep.parse().ok()?))
}

/// All runs the configuration describes, configuration-major.
pub fn run_descriptors(cfg: &ExperimentConfig) -> Vec<RunDescriptor> {
    let mut runs = Vec::new();
    for c in &cfg.configurations {
        for inst in &cfg.instances {
            for repetition in 0..cfg.repetitions {
                runs.push(RunDescriptor {
                    configuration: c.name.clone(),
                    instance: inst.name.clone(),
                    repetition,
                    seed: cfg.base_seed + repetition as u64,
                    output_path: output_path(&cfg.output_dir, &c.name, &inst.name, repetition),
                });
            }
        }
    }
    runs
}
