use std::path::Path;

use possqrt_core::contour::QuadratureReport;
use serde_json::{json, Map, Number, Value};

use crate::error::CliError;

/// A float as a JSON number with 17 significant digits; non-finite values
/// become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(format!("{x:.16e}").parse::<Number>().expect("formatted float is a JSON number"))
    } else {
        Value::String(x.to_string())
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn quadrature(q: &QuadratureReport) -> Value {
    json!({
        "node_counts": q.node_counts,
        "deltas": nums(&q.deltas),
        "sum_norms": nums(&q.sum_norms),
        "ml_bound": num(q.ml_bound),
        "density": num(q.density),
        "converged": q.converged,
    })
}

/// The document printed by every subcommand. Keys serialize sorted.
#[derive(Debug, Default)]
pub struct RunReport {
    command: String,
    inputs: Vec<Value>,
    pub outputs: Map<String, Value>,
    pub diagnostics: Map<String, Value>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_owned(), ..Default::default() }
    }

    pub fn input(&mut self, path: &Path, digest: &str, seed: Option<u64>) {
        let mut entry = json!({ "path": path.display().to_string(), "sha256": digest });
        if let Some(seed) = seed {
            entry["seed"] = json!(seed);
        }
        self.inputs.push(entry);
    }

    pub fn render(&self, outcome: &Result<(), CliError>) -> String {
        let status = match outcome {
            Ok(()) => json!("ok"),
            Err(e) => json!({ "failed": e.message, "exit_code": e.code }),
        };
        let doc = json!({
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "diagnostics": self.diagnostics,
            "status": status,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        text
    }
}
