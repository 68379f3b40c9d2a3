//! Scenario files and result reports.
//!
//! Scenarios travel as JSON documents with schema tag `mmse-scenario/1`:
//! atom names, reference weights, partition blocks (0-based atom indices),
//! vertex weight rows, the payoff vector, and optional metadata. Weights
//! must each total one within `1e-9`; the loader renormalizes exactly and
//! rejects anything else with the offending field path in the message.
//!
//! Reports are JSON with lexicographically sorted keys and every float
//! rendered with 17 significant digits, so identical runs produce
//! byte-identical files and diffs are meaningful.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::Scenario;
use crate::ambiguity::{normalize_exact, AmbiguitySet};
use crate::solver::{EstimatorSolution, SaddleReport};
use crate::space::{compensated_sum, Measure, Partition, RandomVariable, SampleSpace};
use crate::{tol, Error, Result};

/// Schema tag every scenario file must carry.
pub const SCHEMA: &str = "mmse-scenario/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema: String,
    atoms: Vec<String>,
    base_weights: Vec<f64>,
    partition: Vec<Vec<usize>>,
    vertices: Vec<Vec<f64>>,
    xi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<MetaFile>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
}

fn schema_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Validates one weight row: finite, nonnegative, total within the loader
/// tolerance of one. Returns the exactly renormalized row.
fn check_weight_row(field: &str, row: &[f64]) -> Result<Vec<f64>> {
    for (i, &w) in row.iter().enumerate() {
        if !w.is_finite() {
            return Err(schema_err(format!("{field}[{i}]"), format!("weight {w} is not finite")));
        }
        if w < 0.0 {
            return Err(schema_err(format!("{field}[{i}]"), format!("weight {w} is negative")));
        }
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > tol::LOADER_WEIGHT_SUM {
        return Err(schema_err(
            field,
            format!(
                "weights sum to {total}, expected 1 within {}",
                tol::LOADER_WEIGHT_SUM
            ),
        ));
    }
    // Machine-written files are already normalized to construction
    // precision; renormalizing those again would shift every weight by an
    // ulp and break exact round-trips. Only hand-edited files whose total
    // drifted beyond the construction tolerance need the rescale.
    if (compensated_sum(row) - 1.0).abs() <= tol::WEIGHT_SUM {
        Ok(row.to_vec())
    } else {
        Ok(normalize_exact(row.to_vec()))
    }
}

/// Reads and validates a scenario file.
///
/// Violations are reported with the offending field path (for example
/// `vertices[1][3]`); malformed JSON keeps serde's line/column message.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: display.clone(),
        source,
    })?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: display.clone(),
        source,
    })?;

    if file.schema != SCHEMA {
        return Err(schema_err(
            "schema",
            format!("unsupported schema {:?}, expected {SCHEMA:?}", file.schema),
        ));
    }
    let n = file.atoms.len();
    if n == 0 {
        return Err(schema_err("atoms", "at least one atom is required"));
    }
    if file.base_weights.len() != n {
        return Err(schema_err(
            "base_weights",
            format!("{} entries for {n} atoms", file.base_weights.len()),
        ));
    }
    if file.xi.len() != n {
        return Err(schema_err(
            "xi",
            format!("{} entries for {n} atoms", file.xi.len()),
        ));
    }
    if file.vertices.is_empty() {
        return Err(schema_err("vertices", "at least one vertex is required"));
    }
    for (j, row) in file.vertices.iter().enumerate() {
        if row.len() != n {
            return Err(schema_err(
                format!("vertices[{j}]"),
                format!("{} entries for {n} atoms", row.len()),
            ));
        }
    }
    for (i, &v) in file.xi.iter().enumerate() {
        if !v.is_finite() {
            return Err(schema_err(format!("xi[{i}]"), format!("value {v} is not finite")));
        }
    }

    let base = check_weight_row("base_weights", &file.base_weights)?;
    let space = SampleSpace::new(file.atoms, base)
        .map_err(|e| schema_err("base_weights", e.to_string()))?;
    let partition = Partition::new(file.partition, n)
        .map_err(|e| schema_err("partition", e.to_string()))?;
    let mut vertices = Vec::with_capacity(file.vertices.len());
    for (j, row) in file.vertices.iter().enumerate() {
        let field = format!("vertices[{j}]");
        let weights = check_weight_row(&field, row)?;
        vertices.push(Measure::new(&space, weights).map_err(|e| schema_err(&field, e.to_string()))?);
    }
    let ambiguity = AmbiguitySet::new(space, vertices)?;
    let meta = file.meta.unwrap_or_default();
    Scenario::new(
        meta.name.unwrap_or_else(|| "unnamed".to_string()),
        meta.description.unwrap_or_default(),
        ambiguity,
        partition,
        RandomVariable::new(file.xi)?,
    )
}

/// Writes a scenario as a schema-tagged JSON document. Weights serialize
/// with full round-trip precision, so saving and loading reproduces the
/// scenario exactly.
pub fn save_scenario(path: impl AsRef<Path>, scenario: &Scenario) -> Result<()> {
    let path = path.as_ref();
    let file = ScenarioFile {
        schema: SCHEMA.to_string(),
        atoms: scenario.space().atoms().to_vec(),
        base_weights: scenario.space().base_weights().to_vec(),
        partition: scenario.partition().blocks().to_vec(),
        vertices: scenario
            .ambiguity()
            .vertices()
            .iter()
            .map(|v| v.weights().to_vec())
            .collect(),
        xi: scenario.xi().values().to_vec(),
        meta: Some(MetaFile {
            name: Some(scenario.name().to_string()),
            description: Some(scenario.description().to_string()),
        }),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("scenario serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Renders a float with 17 significant digits — enough to reproduce any
/// binary64 value exactly, so equal inputs give byte-equal reports.
pub fn float17(value: f64) -> String {
    format!("{value:.16e}")
}

fn float_list(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|&v| Value::String(float17(v))).collect())
}

/// Assembles the result document for one solved scenario: the estimator
/// per block, the worst-case mixture, objective, duality gap, iteration
/// count, optional saddle margins, and the tool version. All floats are
/// 17-significant-digit strings and keys sort lexicographically, so the
/// serialized form is byte-stable.
pub fn solution_report(
    scenario: &Scenario,
    solution: &EstimatorSolution,
    saddle: Option<&SaddleReport>,
) -> Value {
    let eta_blocks: Vec<Value> = scenario
        .partition()
        .blocks()
        .iter()
        .map(|block| {
            json!({
                "atoms": block,
                "value": float17(solution.eta_hat.values()[block[0]]),
            })
        })
        .collect();
    let mut report = json!({
        "scenario": scenario.name(),
        "atoms": scenario.space().atoms(),
        "eta_hat": float_list(solution.eta_hat.values()),
        "eta_hat_blocks": eta_blocks,
        "w_hat": float_list(solution.w_hat.weights()),
        "alpha": float17(solution.alpha),
        "gap": float17(solution.gap),
        "iterations": solution.iterations,
        "converged": solution.converged,
        "tool_version": env!("CARGO_PKG_VERSION"),
    });
    if let Some(s) = saddle {
        report["saddle"] = json!({
            "pass": s.pass,
            "left_margin": float17(s.left_margin),
            "right_margin": float17(s.right_margin),
            "alpha_consistency": float17(s.alpha_consistency),
            "estimator_measurable": s.estimator_measurable,
            "tolerance": float17(s.tolerance),
        });
    }
    report
}

/// Writes a report document as pretty JSON with a trailing newline. With
/// documents built by [`solution_report`] (sorted keys, stringified
/// floats), equal inputs produce byte-identical files.
pub fn save_report(path: impl AsRef<Path>, report: &Value) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
