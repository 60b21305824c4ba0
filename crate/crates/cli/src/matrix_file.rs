use std::fs;
use std::path::Path;

use possqrt_core::{Complex64, ComplexMatrix};
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::report::num;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrixFile {
    n: usize,
    entries: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
}

/// A matrix document: `{"n": 2, "entries": [[[re, im], …], …], "label"?, "seed"?}`.
#[derive(Debug, Clone)]
pub struct MatrixFile {
    pub matrix: ComplexMatrix,
    pub label: Option<String>,
    pub seed: Option<u64>,
    /// Hex SHA-256 of the file bytes.
    pub digest: String,
}

pub fn digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn parse(bytes: &[u8]) -> Result<MatrixFile, CliError> {
    let raw: RawMatrixFile =
        serde_json::from_slice(bytes).map_err(|e| CliError::parse(format!("malformed matrix file: {e}")))?;
    if raw.n == 0 {
        return Err(CliError::parse("matrix dimension must be positive"));
    }
    if raw.entries.len() != raw.n {
        return Err(CliError::parse(format!("expected {} rows, found {}", raw.n, raw.entries.len())));
    }
    let rows = raw
        .entries
        .into_iter()
        .map(|row| row.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
        .collect();
    let matrix = ComplexMatrix::from_rows(rows).map_err(|e| CliError::parse(e.to_string()))?;
    Ok(MatrixFile { matrix, label: raw.label, seed: raw.seed, digest: digest(bytes) })
}

pub fn load(path: &Path) -> Result<MatrixFile, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    parse(&bytes)
}

pub fn to_value(m: &ComplexMatrix, label: Option<&str>) -> Value {
    let n = m.n();
    let entries: Vec<Value> = (0..n)
        .map(|i| Value::Array(m.row(i).iter().map(|z| json!([num(z.re), num(z.im)])).collect()))
        .collect();
    let mut doc = json!({ "n": n, "entries": entries });
    if let Some(label) = label {
        doc["label"] = Value::String(label.to_owned());
    }
    doc
}

pub fn write(path: &Path, m: &ComplexMatrix, label: Option<&str>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&to_value(m, label)).expect("matrix serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}
