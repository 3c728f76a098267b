//! Per-run output records.
//!
//! A record is a small YAML document with results, metadata and
//! supplementary data. The writer emits a fixed layout:
//!
//! ```text
//! algorithm: kadabra                # optional
//! info:
//!   commit: fef6c5ca
//!   date: '2018-09-14T12:21:55.497368'
//!   host: erle
//! instance: advogato                # optional
//! iterations: 12598
//! parameters:                       # sorted by key; delta, epsilon, seed required
//!   c: 10
//!   delta: 0.1
//!   epsilon: 0.015
//!   seed: 0
//! run_time: 1.6034371852874756      # CPU seconds
//! wall_time: 1.62                   # optional, wall-clock seconds
//! topk_nodes:
//! - 156
//! topk_scores:
//! - 0.0651690744562629
//! ```
//!
//! Reals are printed with the shortest representation that parses back to
//! the same `f64`. Every record ends with a newline and the last line always
//! belongs to `topk_scores`, so a file cut short at any byte is rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;

use serde_yaml::{Mapping, Value};
use thiserror::Error;

/// Number of top-ranked nodes stored per run.
pub const DEFAULT_TOP_K: usize = 25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunfileError {
    #[error("not valid YAML: {0}")]
    Syntax(String),
    #[error("record is truncated (no trailing newline)")]
    Truncated,
    #[error("record is not a mapping")]
    NotAMapping,
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("key `{key}` should be {expected}")]
    TypeMismatch { key: String, expected: &'static str },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunInfo {
    pub commit: String,
    /// ISO-8601 timestamp.
    pub date: String,
    pub host: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunParameters {
    pub delta: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Algorithm-specific parameters such as `c`.
    pub extra: BTreeMap<String, ParamValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub algorithm: Option<String>,
    pub info: RunInfo,
    pub instance: Option<String>,
    /// Number of sampled paths (τ).
    pub iterations: u64,
    pub parameters: RunParameters,
    /// Process CPU time of the algorithm, seconds.
    pub run_time: f64,
    pub wall_time: Option<f64>,
    pub topk_nodes: Vec<u64>,
    pub topk_scores: Vec<f64>,
}

const SAMPLING_ALGORITHMS: [&str; 2] = ["kadabra", "rk"];
const RESERVED_PARAMS: [&str; 3] = ["delta", "epsilon", "seed"];

impl RunOutput {
    pub fn validate(&self) -> Result<(), RunfileError> {
        let bad = |msg: String| Err(RunfileError::Invariant(msg));
        if self.topk_nodes.len() != self.topk_scores.len() {
            return bad(format!(
                "{} top-k nodes but {} scores",
                self.topk_nodes.len(),
                self.topk_scores.len()
            ));
        }
        if self.topk_scores.iter().any(|s| !s.is_finite()) {
            return bad("top-k scores must be finite".into());
        }
        if self.topk_scores.windows(2).any(|w| w[0] < w[1]) {
            return bad("top-k scores are not sorted in non-increasing order".into());
        }
        if !(self.run_time.is_finite() && self.run_time >= 0.0) {
            return bad(format!("run_time must be a non-negative number, got {}", self.run_time));
        }
        if let Some(w) = self.wall_time {
            if !(w.is_finite() && w >= 0.0) {
                return bad(format!("wall_time must be a non-negative number, got {w}"));
            }
        }
        for (name, v) in [("delta", self.parameters.delta), ("epsilon", self.parameters.epsilon)] {
            if !v.is_finite() {
                return bad(format!("parameter {name} must be finite"));
            }
        }
        if let Some(alg) = &self.algorithm {
            if SAMPLING_ALGORITHMS.contains(&alg.as_str()) && self.iterations == 0 {
                return bad(format!("{alg} runs must report at least one iteration"));
            }
        }
        if !is_iso8601(&self.info.date) {
            return bad(format!("date {:?} is not ISO-8601", self.info.date));
        }
        if !is_commit(&self.info.commit) {
            return bad(format!(
                "commit {:?} is neither a hex hash, dirty+<hash> nor unknown",
                self.info.commit
            ));
        }
        let strings = [
            Some(&self.info.host),
            Some(&self.info.commit),
            self.algorithm.as_ref(),
            self.instance.as_ref(),
        ];
        let texts = self.parameters.extra.values().filter_map(|v| match v {
            ParamValue::Text(t) => Some(t),
            _ => None,
        });
        if strings.into_iter().flatten().chain(texts).any(|s| s.chars().any(char::is_control)) {
            return bad("strings must not contain control characters".into());
        }
        for (key, value) in &self.parameters.extra {
            if RESERVED_PARAMS.contains(&key.as_str()) || !is_identifier(key) {
                return bad(format!("invalid parameter name {key:?}"));
            }
            if let ParamValue::Real(r) = value {
                if !r.is_finite() {
                    return bad(format!("parameter {key} must be finite"));
                }
            }
        }
        Ok(())
    }
}

fn is_identifier(key: &str) -> bool {
    let mut chars = key.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn is_hex(s: &str) -> bool {
    s.len() >= 4 && s.chars().all(|c| c.is_ascii_hexdigit())
}

fn is_commit(s: &str) -> bool {
    s == "unknown" || is_hex(s) || s.strip_prefix("dirty+").is_some_and(is_hex)
}

fn is_iso8601(s: &str) -> bool {
    chrono::DateTime::parse_from_rfc3339(s).is_ok()
        || chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f").is_ok()
        || chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok()
}

fn format_real(x: f64) -> String {
    // Debug keeps a decimal point or exponent, so YAML reads a float back
    format!("{x:?}")
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Plain scalar when YAML would read it back as the same string, quoted otherwise.
fn yaml_string(s: &str) -> String {
    let plain_safe = !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "_.+-/".contains(c))
        && !s.starts_with(['-', '.', '+'])
        && matches!(serde_yaml::from_str::<Value>(s), Ok(Value::String(ref v)) if v == s);
    if plain_safe {
        s.to_string()
    } else {
        quote(s)
    }
}

fn format_param(value: &ParamValue) -> String {
    match value {
        ParamValue::Int(i) => i.to_string(),
        ParamValue::Real(r) => format_real(*r),
        ParamValue::Text(t) => yaml_string(t),
    }
}

/// Serializes a record. Nothing is produced when an invariant fails.
pub fn write_run_output(r: &RunOutput) -> Result<String, RunfileError> {
    r.validate()?;
    let mut out = String::new();
    if let Some(alg) = &r.algorithm {
        let _ = writeln!(out, "algorithm: {}", yaml_string(alg));
    }
    let _ = writeln!(out, "info:");
    let _ = writeln!(out, "  commit: {}", yaml_string(&r.info.commit));
    let _ = writeln!(out, "  date: {}", quote(&r.info.date));
    let _ = writeln!(out, "  host: {}", yaml_string(&r.info.host));
    if let Some(instance) = &r.instance {
        let _ = writeln!(out, "instance: {}", yaml_string(instance));
    }
    let _ = writeln!(out, "iterations: {}", r.iterations);

    let mut params: BTreeMap<&str, String> = r
        .parameters
        .extra
        .iter()
        .map(|(k, v)| (k.as_str(), format_param(v)))
        .collect();
    params.insert("delta", format_real(r.parameters.delta));
    params.insert("epsilon", format_real(r.parameters.epsilon));
    params.insert("seed", r.parameters.seed.to_string());
    let _ = writeln!(out, "parameters:");
    for (k, v) in params {
        let _ = writeln!(out, "  {k}: {v}");
    }

    let _ = writeln!(out, "run_time: {}", format_real(r.run_time));
    if let Some(w) = r.wall_time {
        let _ = writeln!(out, "wall_time: {}", format_real(w));
    }
    if r.topk_nodes.is_empty() {
        out.push_str("topk_nodes: []\ntopk_scores: []\n");
    } else {
        out.push_str("topk_nodes:\n");
        for n in &r.topk_nodes {
            let _ = writeln!(out, "- {n}");
        }
        out.push_str("topk_scores:\n");
        for s in &r.topk_scores {
            let _ = writeln!(out, "- {}", format_real(*s));
        }
    }
    Ok(out)
}

struct Fields<'a> {
    map: &'a Mapping,
    prefix: &'a str,
}

impl<'a> Fields<'a> {
    fn path(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.prefix)
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key)
    }

    fn require(&self, key: &str) -> Result<&'a Value, RunfileError> {
        self.get(key).ok_or_else(|| RunfileError::MissingKey(self.path(key)))
    }

    fn mismatch(&self, key: &str, expected: &'static str) -> RunfileError {
        RunfileError::TypeMismatch {
            key: self.path(key),
            expected,
        }
    }

    fn string(&self, key: &str) -> Result<String, RunfileError> {
        as_string(self.require(key)?).ok_or_else(|| self.mismatch(key, "a string"))
    }

    fn optional_string(&self, key: &str) -> Result<Option<String>, RunfileError> {
        self.get(key)
            .map(|v| as_string(v).ok_or_else(|| self.mismatch(key, "a string")))
            .transpose()
    }

    fn unsigned(&self, key: &str) -> Result<u64, RunfileError> {
        self.require(key)?
            .as_u64()
            .ok_or_else(|| self.mismatch(key, "a non-negative integer"))
    }

    fn real(&self, key: &str) -> Result<f64, RunfileError> {
        self.require(key)?.as_f64().ok_or_else(|| self.mismatch(key, "a number"))
    }

    fn mapping(&self, key: &str) -> Result<&'a Mapping, RunfileError> {
        self.require(key)?
            .as_mapping()
            .ok_or_else(|| self.mismatch(key, "a mapping"))
    }

    fn sequence(&self, key: &str) -> Result<&'a Vec<Value>, RunfileError> {
        self.require(key)?
            .as_sequence()
            .ok_or_else(|| self.mismatch(key, "a list"))
    }

    fn reject_unknown(&self, known: &[&str]) -> Result<(), RunfileError> {
        for key in self.map.keys() {
            let name = key.as_str().map(str::to_string).unwrap_or_else(|| format!("{key:?}"));
            if !known.contains(&name.as_str()) {
                return Err(RunfileError::UnknownKey(self.path(&name)));
            }
        }
        Ok(())
    }
}

/// Scalars YAML resolved to numbers or booleans are accepted as strings too
/// (e.g. an all-digit commit hash written by another tool).
fn as_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Parses and validates one record.
pub fn parse_run_output(text: &str) -> Result<RunOutput, RunfileError> {
    if !text.ends_with('\n') {
        return Err(RunfileError::Truncated);
    }
    let doc: Value = serde_yaml::from_str(text).map_err(|e| RunfileError::Syntax(e.to_string()))?;
    let root = doc.as_mapping().ok_or(RunfileError::NotAMapping)?;
    let top = Fields { map: root, prefix: "" };
    top.reject_unknown(&[
        "algorithm",
        "info",
        "instance",
        "iterations",
        "parameters",
        "run_time",
        "wall_time",
        "topk_nodes",
        "topk_scores",
    ])?;

    let info = Fields {
        map: top.mapping("info")?,
        prefix: "info",
    };
    info.reject_unknown(&["commit", "date", "host"])?;
    let info = RunInfo {
        commit: info.string("commit")?,
        date: info.string("date")?,
        host: info.string("host")?,
    };

    let params = Fields {
        map: top.mapping("parameters")?,
        prefix: "parameters",
    };
    let mut extra = BTreeMap::new();
    for (key, value) in params.map {
        let Some(key) = key.as_str() else {
            return Err(RunfileError::TypeMismatch {
                key: "parameters".into(),
                expected: "a mapping with string keys",
            });
        };
        if RESERVED_PARAMS.contains(&key) {
            continue;
        }
        let parsed = match value {
            Value::Number(n) if n.is_i64() => ParamValue::Int(n.as_i64().expect("checked")),
            Value::Number(n) => ParamValue::Real(n.as_f64().ok_or_else(|| params.mismatch(key, "a number"))?),
            Value::String(s) => ParamValue::Text(s.clone()),
            _ => return Err(params.mismatch(key, "a scalar")),
        };
        extra.insert(key.to_string(), parsed);
    }
    let parameters = RunParameters {
        delta: params.real("delta")?,
        epsilon: params.real("epsilon")?,
        seed: params.unsigned("seed")?,
        extra,
    };

    let topk_nodes = top
        .sequence("topk_nodes")?
        .iter()
        .map(|v| v.as_u64().ok_or_else(|| top.mismatch("topk_nodes", "a list of node ids")))
        .collect::<Result<Vec<_>, _>>()?;
    let topk_scores = top
        .sequence("topk_scores")?
        .iter()
        .map(|v| v.as_f64().ok_or_else(|| top.mismatch("topk_scores", "a list of numbers")))
        .collect::<Result<Vec<_>, _>>()?;

    let wall_time = match top.get("wall_time") {
        Some(v) => Some(v.as_f64().ok_or_else(|| top.mismatch("wall_time", "a number"))?),
        None => None,
    };

    let record = RunOutput {
        algorithm: top.optional_string("algorithm")?,
        info,
        instance: top.optional_string("instance")?,
        iterations: top.unsigned("iterations")?,
        parameters,
        run_time: top.real("run_time")?,
        wall_time,
        topk_nodes,
        topk_scores,
    };
    record.validate()?;
    Ok(record)
}

/// Metadata captured at the start of a run, plus warnings worth surfacing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub info: RunInfo,
    pub warnings: Vec<String>,
}

/// Commit of the working tree at `repo_dir` (prefixed `dirty+` when it has
/// local modifications), host name and current local time.
pub fn capture_metadata(repo_dir: &Path) -> Metadata {
    let mut warnings = Vec::new();
    let commit = match vcs_commit(repo_dir) {
        Some(commit) => {
            if commit.starts_with("dirty+") {
                warnings.push("working tree has uncommitted changes".to_string());
            }
            commit
        }
        None => {
            warnings.push(format!("no git repository at {}; commit recorded as unknown", repo_dir.display()));
            "unknown".to_string()
        }
    };
    let date = chrono::Local::now().format("%Y-%m-%dT%H:%M:%S%.6f").to_string();
    Metadata {
        info: RunInfo {
            commit,
            date,
            host: hostname(),
        },
        warnings,
    }
}

fn git(repo_dir: &Path, args: &[&str]) -> Option<String> {
    let out = Command::new("git").arg("-C").arg(repo_dir).args(args).output().ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
}

fn vcs_commit(repo_dir: &Path) -> Option<String> {
    let hash = git(repo_dir, &["rev-parse", "HEAD"])?;
    if !is_hex(&hash) {
        return None;
    }
    let status = git(repo_dir, &["status", "--porcelain", "--untracked-files=no"])?;
    Some(if status.is_empty() { hash } else { format!("dirty+{hash}") })
}

pub fn hostname() -> String {
    let mut buf = [0u8; 256];
    // SAFETY: the buffer is valid for writes of its full length.
    let rc = unsafe { libc::gethostname(buf.as_mut_ptr().cast(), buf.len()) };
    if rc != 0 {
        return "unknown".to_string();
    }
    let end = buf.iter().position(|&b| b == 0).unwrap_or(buf.len());
    let name = String::from_utf8_lossy(&buf[..end]).trim().to_string();
    if name.is_empty() {
        "unknown".to_string()
    } else {
        name
    }
}
