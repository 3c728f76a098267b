//! The `experiments.yml` configuration.
//!
//! ```yaml
//! instances:
//!   konect:                 # names fetched from the KONECT repository
//!     - 'advogato'
//!   generated:
//!     - name: gnm-small
//!       generator: gnm
//!       params: {n: 100, m: 300}
//!       seed: 7
//!       class: Synthetic
//!   local:
//!     - name: mine
//!       path: graphs/mine.txt
//! configurations:
//!   - name: kadabra-1t
//!     args: ['bcbench', 'run', '--threads=1', 'kadabra', '@INSTANCE@']
//!     output: stdout
//! repetitions: 5            # optional extensions below
//! max_parallel: 4
//! base_seed: 0
//! timeout_hours: 7
//! instance_dir: instances
//! output_dir: output
//! ```
//!
//! A bare string under any group other than `konect` names a file that is
//! expected in `instance_dir`. Relative paths resolve against the directory
//! holding the configuration file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_yaml::{Mapping, Value};

use super::OrchestratorError;
use crate::graph::{self, Graph, GraphError};

pub const INSTANCE_PLACEHOLDER: &str = "@INSTANCE@";
pub const DEFAULT_REPETITIONS: u32 = 5;
pub const DEFAULT_TIMEOUT_HOURS: f64 = 7.0;

const KONECT_GROUP: &str = "konect";
const KONECT_URL: &str = "http://konect.cc/files/download.tsv.";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instances: Vec<InstanceSpec>,
    pub configurations: Vec<ConfigSpec>,
    pub repetitions: u32,
    pub max_parallel: usize,
    pub base_seed: u64,
    pub timeout: Duration,
    pub instance_dir: PathBuf,
    pub output_dir: PathBuf,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub name: String,
    pub source: InstanceSource,
    /// Network class used for stratified splits.
    pub class: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    Url { url: String, expected_bytes: Option<u64> },
    Local(PathBuf),
    /// A file named after the instance inside `instance_dir`.
    InstanceDir,
    Generator { generator: Generator, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Gnm { n: usize, m: u64 },
    Path { n: usize },
    Cycle { n: usize },
    Star { n: usize },
    Complete { n: usize },
    Grid { rows: usize, cols: usize },
}

impl Generator {
    pub fn generate(&self, seed: u64) -> Result<Graph, GraphError> {
        Ok(match *self {
            Generator::Gnm { n, m } => graph::generate_gnm(n, m, seed)?,
            Generator::Path { n } => graph::path_graph(n),
            Generator::Cycle { n } => graph::cycle_graph(n),
            Generator::Star { n } => graph::star_graph(n),
            Generator::Complete { n } => graph::complete_graph(n),
            Generator::Grid { rows, cols } => graph::grid_graph(rows, cols),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    Stdout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSpec {
    pub name: String,
    pub args: Vec<String>,
    pub output: OutputMode,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, OrchestratorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OrchestratorError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
        parse_config(&text, &base)
    }

    pub fn instance(&self, name: &str) -> Option<&InstanceSpec> {
        self.instances.iter().find(|i| i.name == name)
    }

    pub fn configuration(&self, name: &str) -> Option<&ConfigSpec> {
        self.configurations.iter().find(|c| c.name == name)
    }

    /// Where the graph file for `instance` lives (or will live after download).
    pub fn instance_path(&self, instance: &InstanceSpec) -> PathBuf {
        match &instance.source {
            InstanceSource::Local(path) => self.base_dir.join(path),
            _ => self.instance_dir.join(&instance.name),
        }
    }
}

fn invalid(msg: impl Into<String>) -> OrchestratorError {
    OrchestratorError::Config(msg.into())
}

fn check_keys(map: &Mapping, allowed: &[&str], context: &str) -> Result<(), OrchestratorError> {
    let unknown: Vec<String> = map
        .keys()
        .map(|k| k.as_str().map(str::to_string).unwrap_or_else(|| format!("{k:?}")))
        .filter(|k| !allowed.contains(&k.as_str()))
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(invalid(format!("unknown keys in {context}: {}", unknown.join(", "))))
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "._-+".contains(c))
}

fn scalar_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn get_u64(map: &Mapping, key: &str, context: &str) -> Result<Option<u64>, OrchestratorError> {
    map.get(key)
        .map(|v| {
            v.as_u64()
                .ok_or_else(|| invalid(format!("{context}: `{key}` must be a non-negative integer")))
        })
        .transpose()
}

fn get_string(map: &Mapping, key: &str, context: &str) -> Result<Option<String>, OrchestratorError> {
    map.get(key)
        .map(|v| scalar_string(v).ok_or_else(|| invalid(format!("{context}: `{key}` must be a string"))))
        .transpose()
}

/// Parses and validates a configuration. Relative paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig, OrchestratorError> {
    let doc: Value = serde_yaml::from_str(text).map_err(|e| invalid(format!("not valid YAML: {e}")))?;
    let root = doc
        .as_mapping()
        .ok_or_else(|| invalid("top level must be a mapping"))?;
    check_keys(
        root,
        &[
            "instances",
            "configurations",
            "repetitions",
            "max_parallel",
            "base_seed",
            "timeout_hours",
            "instance_dir",
            "output_dir",
        ],
        "configuration file",
    )?;

    let instances = parse_instances(root.get("instances").ok_or_else(|| invalid("missing `instances`"))?)?;
    if instances.is_empty() {
        return Err(invalid("`instances` is empty"));
    }
    let configurations = parse_configurations(
        root.get("configurations")
            .ok_or_else(|| invalid("missing `configurations`"))?,
    )?;
    if configurations.is_empty() {
        return Err(invalid("`configurations` is empty"));
    }

    let mut seen = BTreeSet::new();
    for inst in &instances {
        if !seen.insert(inst.name.as_str()) {
            return Err(invalid(format!("duplicate instance name `{}`", inst.name)));
        }
    }
    let mut seen = BTreeSet::new();
    for c in &configurations {
        if !seen.insert(c.name.as_str()) {
            return Err(invalid(format!("duplicate configuration name `{}`", c.name)));
        }
    }

    let repetitions = get_u64(root, "repetitions", "configuration file")?
        .map_or(DEFAULT_REPETITIONS as u64, |r| r);
    if repetitions == 0 || repetitions > u32::MAX as u64 {
        return Err(invalid("`repetitions` must be a positive integer"));
    }
    let max_parallel = get_u64(root, "max_parallel", "configuration file")?.unwrap_or(1);
    if max_parallel == 0 {
        return Err(invalid("`max_parallel` must be a positive integer"));
    }
    let base_seed = get_u64(root, "base_seed", "configuration file")?.unwrap_or(0);
    let timeout_hours = match root.get("timeout_hours") {
        Some(v) => v
            .as_f64()
            .filter(|h| h.is_finite() && *h > 0.0)
            .ok_or_else(|| invalid("`timeout_hours` must be a positive number"))?,
        None => DEFAULT_TIMEOUT_HOURS,
    };
    let dir = |key: &str, default: &str| -> Result<PathBuf, OrchestratorError> {
        let rel = get_string(root, key, "configuration file")?.unwrap_or_else(|| default.to_string());
        Ok(base_dir.join(rel))
    };

    Ok(ExperimentConfig {
        instances,
        configurations,
        repetitions: repetitions as u32,
        max_parallel: max_parallel as usize,
        base_seed,
        timeout: Duration::from_secs_f64(timeout_hours * 3600.0),
        instance_dir: dir("instance_dir", "instances")?,
        output_dir: dir("output_dir", "output")?,
        base_dir: base_dir.to_path_buf(),
    })
}

fn parse_instances(value: &Value) -> Result<Vec<InstanceSpec>, OrchestratorError> {
    let mut out = Vec::new();
    match value {
        Value::Mapping(groups) => {
            for (group, items) in groups {
                let group = group
                    .as_str()
                    .ok_or_else(|| invalid("instance group names must be strings"))?;
                let items = match items {
                    Value::Sequence(items) => items.as_slice(),
                    Value::Null => &[],
                    _ => return Err(invalid(format!("instance group `{group}` must be a list"))),
                };
                for item in items {
                    out.push(parse_instance(group, item)?);
                }
            }
        }
        Value::Sequence(items) => {
            for item in items {
                out.push(parse_instance("", item)?);
            }
        }
        Value::Null => {}
        _ => return Err(invalid("`instances` must be a mapping of groups or a list")),
    }
    Ok(out)
}

fn parse_instance(group: &str, item: &Value) -> Result<InstanceSpec, OrchestratorError> {
    if let Some(name) = scalar_string(item) {
        if !valid_name(&name) {
            return Err(invalid(format!("invalid instance name `{name}`")));
        }
        let source = if group == KONECT_GROUP {
            InstanceSource::Url {
                url: format!("{KONECT_URL}{name}.tar.bz2"),
                expected_bytes: None,
            }
        } else {
            InstanceSource::InstanceDir
        };
        return Ok(InstanceSpec { name, source, class: None });
    }
    let map = item
        .as_mapping()
        .ok_or_else(|| invalid(format!("instance entries in `{group}` must be names or mappings")))?;
    let name = get_string(map, "name", "instance")?.ok_or_else(|| invalid("instance entry without `name`"))?;
    if !valid_name(&name) {
        return Err(invalid(format!("invalid instance name `{name}`")));
    }
    let context = format!("instance `{name}`");
    check_keys(
        map,
        &["name", "url", "size", "path", "generator", "params", "seed", "class"],
        &context,
    )?;

    let url = get_string(map, "url", &context)?;
    let path = get_string(map, "path", &context)?;
    let generator = get_string(map, "generator", &context)?;
    let kinds = [url.is_some(), path.is_some(), generator.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if kinds > 1 {
        return Err(invalid(format!("{context}: set exactly one of url, path, generator")));
    }
    let source = if let Some(url) = url {
        InstanceSource::Url {
            url,
            expected_bytes: get_u64(map, "size", &context)?,
        }
    } else if let Some(kind) = generator {
        let params = match map.get("params") {
            Some(Value::Mapping(p)) => p.clone(),
            None => Mapping::new(),
            Some(_) => return Err(invalid(format!("{context}: `params` must be a mapping"))),
        };
        InstanceSource::Generator {
            generator: parse_generator(&kind, &params, &context)?,
            seed: get_u64(map, "seed", &context)?.unwrap_or(0),
        }
    } else if let Some(path) = path {
        InstanceSource::Local(PathBuf::from(path))
    } else if group == KONECT_GROUP {
        InstanceSource::Url {
            url: format!("{KONECT_URL}{name}.tar.bz2"),
            expected_bytes: None,
        }
    } else {
        InstanceSource::InstanceDir
    };
    Ok(InstanceSpec {
        name,
        source,
        class: get_string(map, "class", &context)?,
    })
}

fn parse_generator(kind: &str, params: &Mapping, context: &str) -> Result<Generator, OrchestratorError> {
    let need = |key: &str| -> Result<u64, OrchestratorError> {
        get_u64(params, key, context)?.ok_or_else(|| invalid(format!("{context}: generator `{kind}` needs `{key}`")))
    };
    let (generator, keys): (Generator, &[&str]) = match kind {
        "gnm" => (
            Generator::Gnm {
                n: need("n")? as usize,
                m: need("m")?,
            },
            &["n", "m"],
        ),
        "path" => (Generator::Path { n: need("n")? as usize }, &["n"]),
        "cycle" => (Generator::Cycle { n: need("n")? as usize }, &["n"]),
        "star" => (Generator::Star { n: need("n")? as usize }, &["n"]),
        "complete" => (Generator::Complete { n: need("n")? as usize }, &["n"]),
        "grid" => (
            Generator::Grid {
                rows: need("rows")? as usize,
                cols: need("cols")? as usize,
            },
            &["rows", "cols"],
        ),
        other => return Err(invalid(format!("{context}: unknown generator `{other}`"))),
    };
    check_keys(params, keys, &format!("{context} params"))?;
    Ok(generator)
}

fn parse_configurations(value: &Value) -> Result<Vec<ConfigSpec>, OrchestratorError> {
    let items = value
        .as_sequence()
        .ok_or_else(|| invalid("`configurations` must be a list"))?;
    items
        .iter()
        .map(|item| {
            let map = item
                .as_mapping()
                .ok_or_else(|| invalid("configuration entries must be mappings"))?;
            let name = get_string(map, "name", "configuration")?
                .ok_or_else(|| invalid("configuration without `name`"))?;
            let context = format!("configuration `{name}`");
            check_keys(map, &["name", "args", "output"], &context)?;
            if !valid_name(&name) {
                return Err(invalid(format!("invalid configuration name `{name}`")));
            }
            let args = map
                .get("args")
                .and_then(Value::as_sequence)
                .ok_or_else(|| invalid(format!("{context}: `args` must be a list")))?
                .iter()
                .map(|a| scalar_string(a).ok_or_else(|| invalid(format!("{context}: args must be strings"))))
                .collect::<Result<Vec<_>, _>>()?;
            if args.is_empty() {
                return Err(invalid(format!("{context}: `args` is empty")));
            }
            if !args.iter().any(|a| a.contains(INSTANCE_PLACEHOLDER)) {
                return Err(invalid(format!("{context}: `args` lacks the {INSTANCE_PLACEHOLDER} placeholder")));
            }
            let output = match get_string(map, "output", &context)?.as_deref() {
                None | Some("stdout") => OutputMode::Stdout,
                Some(other) => return Err(invalid(format!("{context}: unsupported output `{other}`"))),
            };
            Ok(ConfigSpec { name, args, output })
        })
        .collect()
}
