//! Launching, listing and purging runs.

use std::collections::VecDeque;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use super::config::{ExperimentConfig, INSTANCE_PLACEHOLDER};
use super::instances::write_atomically;
use super::{run_descriptors, OrchestratorError, RunDescriptor, RunStatus};
use crate::runfile::parse_run_output;

const STDERR_TAIL_BYTES: usize = 4096;

/// Runs one command with stdout redirected to a file.
///
/// This is the boundary an external batch-system submitter would implement.
pub trait RunExecutor: Sync {
    /// Returns `Ok(())` when the command exited successfully, otherwise a
    /// human-readable failure reason.
    fn execute(&self, command: &[String], cwd: &Path, stdout: &Path, timeout: Duration) -> Result<(), String>;
}

/// Executes runs as local child processes.
#[derive(Debug, Default, Clone, Copy)]
pub struct LocalProcess;

impl RunExecutor for LocalProcess {
    fn execute(&self, command: &[String], cwd: &Path, stdout: &Path, timeout: Duration) -> Result<(), String> {
        let stderr_path = stdout.with_extension("stderr");
        let result = (|| {
            let out = File::create(stdout).map_err(|e| format!("cannot create {}: {e}", stdout.display()))?;
            let err = File::create(&stderr_path).map_err(|e| format!("cannot create {}: {e}", stderr_path.display()))?;
            let mut child = Command::new(&command[0])
                .args(&command[1..])
                .current_dir(cwd)
                .stdin(Stdio::null())
                .stdout(out)
                .stderr(err)
                .spawn()
                .map_err(|e| format!("failed to spawn {}: {e}", command[0]))?;
            let start = Instant::now();
            let mut poll = Duration::from_millis(5);
            let status = loop {
                match child.try_wait() {
                    Ok(Some(status)) => break status,
                    Ok(None) if start.elapsed() >= timeout => {
                        let _ = child.kill();
                        let _ = child.wait();
                        return Err(format!("timed out after {:.0} s", timeout.as_secs_f64()));
                    }
                    Ok(None) => {
                        std::thread::sleep(poll);
                        poll = (poll * 2).min(Duration::from_millis(200));
                    }
                    Err(e) => return Err(format!("waiting for child failed: {e}")),
                }
            };
            if status.success() {
                Ok(())
            } else {
                Err(format!("exited with {status}"))
            }
        })();
        let result = result.map_err(|reason| {
            let tail = read_tail(&stderr_path);
            if tail.is_empty() {
                reason
            } else {
                format!("{reason}\n--- stderr ---\n{tail}")
            }
        });
        let _ = fs::remove_file(&stderr_path);
        result
    }
}

fn read_tail(path: &Path) -> String {
    let Ok(bytes) = fs::read(path) else {
        return String::new();
    };
    let start = bytes.len().saturating_sub(STDERR_TAIL_BYTES);
    String::from_utf8_lossy(&bytes[start..]).trim_end().to_string()
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct LaunchReport {
    /// Runs started by this invocation.
    pub launched: usize,
    pub finished: Vec<RunDescriptor>,
    pub failed: Vec<(RunDescriptor, String)>,
    /// Runs not started because their instance file is missing.
    pub blocked: Vec<(RunDescriptor, String)>,
    /// Runs already finished, failed or running elsewhere.
    pub skipped: usize,
}

impl LaunchReport {
    pub fn is_success(&self) -> bool {
        self.failed.is_empty() && self.blocked.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub run: RunDescriptor,
    pub status: RunStatus,
    /// Wall-clock time so far, for running jobs.
    pub elapsed: Option<Duration>,
}

struct Lock {
    pid: u32,
    host: String,
    started: u64,
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn read_lock(path: &Path) -> Option<Lock> {
    let text = fs::read_to_string(path).ok()?;
    let mut parts = text.split_whitespace();
    Some(Lock {
        pid: parts.next()?.parse().ok()?,
        host: parts.next()?.to_string(),
        started: parts.next()?.parse().ok()?,
    })
}

fn process_alive(pid: u32) -> bool {
    // SAFETY: signal 0 only checks for existence and permissions.
    let rc = unsafe { libc::kill(pid as libc::pid_t, 0) };
    rc == 0 || io::Error::last_os_error().raw_os_error() == Some(libc::EPERM)
}

/// A lock counts only while its owner process is alive on this host.
fn live_lock(path: &Path) -> Option<Lock> {
    let lock = read_lock(path)?;
    (lock.host != crate::runfile::hostname() || process_alive(lock.pid)).then_some(lock)
}

fn try_lock(run: &RunDescriptor) -> io::Result<bool> {
    let path = run.lock_path();
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    for _ in 0..2 {
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{} {} {}", std::process::id(), crate::runfile::hostname(), now_secs())?;
                return Ok(true);
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                if live_lock(&path).is_some() {
                    return Ok(false);
                }
                // stale lock from a killed orchestrator
                fs::remove_file(&path)?;
                let _ = fs::remove_file(run.temp_path());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(false)
}

fn status_of(run: &RunDescriptor) -> (RunStatus, Option<Duration>) {
    if run.output_path.is_file() {
        (RunStatus::Finished, None)
    } else if run.failure_marker().is_file() {
        (RunStatus::Failed, None)
    } else if let Some(lock) = live_lock(&run.lock_path()) {
        (
            RunStatus::Running,
            Some(Duration::from_secs(now_secs().saturating_sub(lock.started))),
        )
    } else {
        (RunStatus::Pending, None)
    }
}

/// One row per run with its current status.
pub fn experiments_list(cfg: &ExperimentConfig) -> Vec<RunRow> {
    run_descriptors(cfg)
        .into_iter()
        .map(|run| {
            let (status, elapsed) = status_of(&run);
            RunRow { run, status, elapsed }
        })
        .collect()
}

fn build_command(cfg: &ExperimentConfig, run: &RunDescriptor) -> Result<Vec<String>, String> {
    let spec = cfg
        .configuration(&run.configuration)
        .ok_or_else(|| format!("unknown configuration {}", run.configuration))?;
    let inst = cfg
        .instance(&run.instance)
        .ok_or_else(|| format!("unknown instance {}", run.instance))?;
    let instance_path = absolute(&cfg.instance_path(inst));
    if !instance_path.is_file() {
        return Err(format!("instance file {} is missing", instance_path.display()));
    }
    let mut command: Vec<String> = spec
        .args
        .iter()
        .map(|a| a.replace(INSTANCE_PLACEHOLDER, &instance_path.to_string_lossy()))
        .collect();
    if command[0].contains('/') && Path::new(&command[0]).is_relative() {
        command[0] = absolute(&cfg.base_dir.join(&command[0])).to_string_lossy().into_owned();
    }
    command.push(format!("--seed={}", run.seed));
    Ok(command)
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

/// Executes every run that has neither output nor failure marker, with the
/// local process executor.
pub fn experiments_launch(cfg: &ExperimentConfig) -> Result<LaunchReport, OrchestratorError> {
    experiments_launch_with(cfg, &LocalProcess)
}

pub fn experiments_launch_with(
    cfg: &ExperimentConfig,
    executor: &dyn RunExecutor,
) -> Result<LaunchReport, OrchestratorError> {
    let mut report = LaunchReport::default();
    let mut queue = VecDeque::new();
    for run in run_descriptors(cfg) {
        if status_of(&run).0 != RunStatus::Pending {
            report.skipped += 1;
            continue;
        }
        match build_command(cfg, &run) {
            Ok(command) => queue.push_back((run, command)),
            Err(reason) => report.blocked.push((run, reason)),
        }
    }

    let queue = Mutex::new(queue);
    let results = Mutex::new(Vec::new());
    let workers = cfg.max_parallel.max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let Some((run, command)) = queue.lock().expect("queue poisoned").pop_front() else {
                    break;
                };
                let outcome = execute_run(cfg, executor, &run, &command);
                results.lock().expect("results poisoned").push((run, outcome));
            });
        }
    });

    let mut results = results.into_inner().expect("results poisoned");
    results.sort_by(|a, b| a.0.output_path.cmp(&b.0.output_path));
    for (run, outcome) in results {
        match outcome {
            RunOutcome::NotStarted => report.skipped += 1,
            RunOutcome::Finished => {
                report.launched += 1;
                report.finished.push(run);
            }
            RunOutcome::Failed(reason) => {
                report.launched += 1;
                report.failed.push((run, reason));
            }
        }
    }
    Ok(report)
}

enum RunOutcome {
    /// Another orchestrator holds the lock.
    NotStarted,
    Finished,
    Failed(String),
}

fn execute_run(cfg: &ExperimentConfig, executor: &dyn RunExecutor, run: &RunDescriptor, command: &[String]) -> RunOutcome {
    match try_lock(run) {
        Ok(true) => {}
        Ok(false) => return RunOutcome::NotStarted,
        Err(e) => return RunOutcome::Failed(format!("cannot lock run: {e}")),
    }
    log::info!(
        "launching {}/{} r{} (seed {})",
        run.configuration,
        run.instance,
        run.repetition,
        run.seed
    );
    let temp = run.temp_path();
    let outcome = executor
        .execute(command, &cfg.base_dir, &temp, cfg.timeout)
        .and_then(|()| {
            let text = fs::read_to_string(&temp).map_err(|e| format!("cannot read output: {e}"))?;
            parse_run_output(&text).map_err(|e| format!("output rejected: {e}"))?;
            // a hard link never replaces an existing file
            fs::hard_link(&temp, &run.output_path)
                .map_err(|e| format!("cannot publish {}: {e}", run.output_path.display()))
        });
    let _ = fs::remove_file(&temp);
    let result = match outcome {
        Ok(()) => RunOutcome::Finished,
        Err(reason) => {
            log::warn!("{}/{} r{} failed: {reason}", run.configuration, run.instance, run.repetition);
            let marker = format!("{reason}\n");
            if let Err(e) = write_atomically(&run.failure_marker(), marker.as_bytes()) {
                log::error!("cannot write failure marker: {e}");
            }
            RunOutcome::Failed(reason)
        }
    };
    let _ = fs::remove_file(run.lock_path());
    result
}

/// Selects runs to purge. Empty fields match everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PurgeFilter {
    pub configurations: Vec<String>,
    pub instances: Vec<String>,
    pub repetitions: Vec<u32>,
    pub status: Option<RunStatus>,
    /// Required to purge with an otherwise empty filter.
    pub all: bool,
}

impl PurgeFilter {
    fn is_empty(&self) -> bool {
        self.configurations.is_empty() && self.instances.is_empty() && self.repetitions.is_empty() && self.status.is_none()
    }

    fn matches(&self, run: &RunDescriptor, status: RunStatus) -> bool {
        (self.configurations.is_empty() || self.configurations.contains(&run.configuration))
            && (self.instances.is_empty() || self.instances.contains(&run.instance))
            && (self.repetitions.is_empty() || self.repetitions.contains(&run.repetition))
            && self.status.is_none_or(|s| s == status)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PurgeReport {
    pub removed_files: usize,
    pub runs: usize,
    /// Matching runs left alone because they are executing.
    pub running_skipped: usize,
}

/// Removes outputs and failure markers of the matching runs.
pub fn experiments_purge(cfg: &ExperimentConfig, filter: &PurgeFilter) -> Result<PurgeReport, OrchestratorError> {
    if filter.is_empty() && !filter.all {
        return Err(OrchestratorError::EmptyPurgeFilter);
    }
    let mut report = PurgeReport::default();
    for run in run_descriptors(cfg) {
        let (status, _) = status_of(&run);
        if !filter.matches(&run, status) {
            continue;
        }
        if status == RunStatus::Running {
            report.running_skipped += 1;
            continue;
        }
        let mut removed_any = false;
        for path in [run.output_path.clone(), run.failure_marker()] {
            match fs::remove_file(&path) {
                Ok(()) => {
                    report.removed_files += 1;
                    removed_any = true;
                }
                Err(e) if e.kind() == io::ErrorKind::NotFound => {}
                Err(e) => return Err(OrchestratorError::Io(format!("{}: {e}", path.display()))),
            }
        }
        let _ = fs::remove_file(run.temp_path());
        if removed_any {
            report.runs += 1;
        }
    }
    Ok(report)
}
