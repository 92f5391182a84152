use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::Value;
use tempfile::NamedTempFile;

use mimo_cs::json::{Entry, MatrixJson};
use mimo_cs::{CMatrix, CVector};

/// Errors surfaced by the binary. Usage errors exit with 2, everything else with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(mimo_cs::Error),
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Usage(m) => ("UsageError", m.clone()),
            CliError::Domain(e) => (e.kind(), e.to_string()),
            CliError::Io { path, message } => ("IoError", format!("{}: {message}", path.display())),
        };
        serde_json::json!({ "error": kind, "message": message, "exit_code": self.exit_code() })
    }
}

impl From<mimo_cs::Error> for CliError {
    fn from(e: mimo_cs::Error) -> Self {
        CliError::Domain(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn malformed(path: &Path, what: impl std::fmt::Display) -> CliError {
    CliError::Domain(mimo_cs::Error::MalformedJson(format!(
        "{}: {what}",
        path.display()
    )))
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e))
}

/// The payload of a workbench output file (its "result"), or the value itself.
pub fn payload(v: &Value) -> &Value {
    match v.get("result") {
        Some(r) if v.get("schema_version").is_some() => r,
        _ => v,
    }
}

/// First of `keys` found in the payload.
pub fn lookup<'a>(v: &'a Value, keys: &[&str]) -> Option<&'a Value> {
    let p = payload(v);
    keys.iter().find_map(|k| p.get(*k))
}

pub fn decode<T: DeserializeOwned>(path: &Path, v: &Value) -> CliResult<T> {
    T::deserialize(v).map_err(|e| malformed(path, e))
}

pub fn decode_matrix(path: &Path, v: &Value) -> CliResult<CMatrix> {
    Ok(decode::<MatrixJson>(path, v)?.to_complex()?)
}

pub fn decode_vector(path: &Path, v: &Value) -> CliResult<CVector> {
    let entries: Vec<Entry> = decode(path, v)?;
    Ok(mimo_cs::json::vector_from_json(&entries))
}

/// Matrix from a file: the named field if `key` is given, else the file itself
/// (or its payload).
pub fn load_matrix(path: &Path, key: Option<&str>) -> CliResult<CMatrix> {
    let v = read_json(path)?;
    let m = match key {
        Some(k) => v
            .get(k)
            .or_else(|| payload(&v).get(k))
            .ok_or_else(|| malformed(path, format!("no field {k:?}")))?,
        None => payload(&v),
    };
    decode_matrix(path, m)
}

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io_err = |e: std::io::Error| CliError::Io {
        path: path.to_owned(),
        message: e.to_string(),
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// `<out>.config.json`, the config echo that accompanies CSV outputs.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}
