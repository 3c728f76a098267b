//! Instance acquisition: download, generate or verify each graph file.

use std::fs::{self, File};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use super::config::{ExperimentConfig, InstanceSource, InstanceSpec};
use crate::graph::write_edge_list;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceOutcome {
    Fetched,
    Generated,
    Skipped,
    Failed(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DownloadReport {
    pub outcomes: Vec<(String, InstanceOutcome)>,
}

impl DownloadReport {
    fn count(&self, pred: impl Fn(&InstanceOutcome) -> bool) -> usize {
        self.outcomes.iter().filter(|(_, o)| pred(o)).count()
    }

    pub fn fetched(&self) -> usize {
        self.count(|o| *o == InstanceOutcome::Fetched)
    }

    pub fn generated(&self) -> usize {
        self.count(|o| *o == InstanceOutcome::Generated)
    }

    pub fn skipped(&self) -> usize {
        self.count(|o| *o == InstanceOutcome::Skipped)
    }

    pub fn failed(&self) -> Vec<(&str, &str)> {
        self.outcomes
            .iter()
            .filter_map(|(name, o)| match o {
                InstanceOutcome::Failed(reason) => Some((name.as_str(), reason.as_str())),
                _ => None,
            })
            .collect()
    }

    pub fn is_success(&self) -> bool {
        self.failed().is_empty()
    }
}

/// Makes every instance available locally. Existing files are left alone;
/// a failing instance does not stop the others.
pub fn instances_download(cfg: &ExperimentConfig) -> DownloadReport {
    let mut report = DownloadReport::default();
    for inst in &cfg.instances {
        let target = cfg.instance_path(inst);
        let outcome = if target.is_file() {
            InstanceOutcome::Skipped
        } else {
            match acquire(inst, &target) {
                Ok(outcome) => outcome,
                Err(reason) => InstanceOutcome::Failed(reason),
            }
        };
        if let InstanceOutcome::Failed(reason) = &outcome {
            log::warn!("instance {}: {reason}", inst.name);
        }
        report.outcomes.push((inst.name.clone(), outcome));
    }
    report
}

fn acquire(inst: &InstanceSpec, target: &Path) -> Result<InstanceOutcome, String> {
    match &inst.source {
        InstanceSource::Local(_) | InstanceSource::InstanceDir => {
            Err(format!("file {} does not exist", target.display()))
        }
        InstanceSource::Generator { generator, seed } => {
            let graph = generator.generate(*seed).map_err(|e| e.to_string())?;
            write_atomically(target, write_edge_list(&graph).as_bytes()).map_err(|e| e.to_string())?;
            Ok(InstanceOutcome::Generated)
        }
        InstanceSource::Url { url, expected_bytes } => {
            let body = fetch(url)?;
            if let Some(expected) = expected_bytes {
                if body.len() as u64 != *expected {
                    return Err(format!("size mismatch: expected {expected} bytes, got {}", body.len()));
                }
            }
            let content = if url.ends_with(".tar.bz2") {
                extract_konect_edges(&body)?
            } else {
                body
            };
            write_atomically(target, &content).map_err(|e| e.to_string())?;
            Ok(InstanceOutcome::Fetched)
        }
    }
}

fn fetch(url: &str) -> Result<Vec<u8>, String> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_connect(Some(Duration::from_secs(20)))
        .build()
        .into();
    let response = agent.get(url).call().map_err(|e| format!("download of {url} failed: {e}"))?;
    let mut body = Vec::new();
    response
        .into_body()
        .into_reader()
        .read_to_end(&mut body)
        .map_err(|e| format!("download of {url} failed: {e}"))?;
    Ok(body)
}

/// Pulls the `out.*` edge file out of a KONECT `.tar.bz2` archive.
fn extract_konect_edges(archive: &[u8]) -> Result<Vec<u8>, String> {
    let decoder = bzip2::read::BzDecoder::new(archive);
    let mut tar = tar::Archive::new(decoder);
    let entries = tar.entries().map_err(|e| format!("bad archive: {e}"))?;
    for entry in entries {
        let mut entry = entry.map_err(|e| format!("bad archive: {e}"))?;
        let is_edges = entry
            .path()
            .ok()
            .and_then(|p| p.file_name().and_then(|f| f.to_str()).map(|f| f.starts_with("out.")))
            .unwrap_or(false);
        if is_edges {
            let mut content = Vec::new();
            entry
                .read_to_end(&mut content)
                .map_err(|e| format!("bad archive: {e}"))?;
            return Ok(content);
        }
    }
    Err("archive holds no out.* edge file".into())
}

pub(crate) fn write_atomically(target: &Path, content: &[u8]) -> io::Result<()> {
    if let Some(parent) = target.parent() {
        fs::create_dir_all(parent)?;
    }
    let temp = temp_sibling(target);
    {
        let mut f = File::create(&temp)?;
        f.write_all(content)?;
        f.sync_all()?;
    }
    fs::rename(&temp, target)
}

fn temp_sibling(target: &Path) -> PathBuf {
    let mut name = target.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".part");
    target.with_file_name(name)
}
