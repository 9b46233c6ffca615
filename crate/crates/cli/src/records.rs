//! Machine-readable output records and their JSON/CSV renderings.
//!
//! Exact quantities are always rational strings, never floats; floating
//! point appears only in the Poisson/Hellinger demo fields, printed with
//! 15 significant digits.

use serde::Serialize;
use serde_json::Value;

/// Output record for solve/tv/check/chain. Optional fields are omitted
/// when a command does not produce them; `verdict` is `"pass"` exactly
/// when every produced value string is identical.
#[derive(Debug, Serialize)]
pub struct ResultRecord {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    /// Dense matrix of rational strings, rows and columns in sigma-block
    /// order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<Vec<String>>,
}

impl ResultRecord {
    pub fn new(command: &str) -> Self {
        ResultRecord {
            command: command.to_string(),
            value: None,
            dual_value: None,
            oracle_value: None,
            verdict: None,
            witness: None,
            coupling: None,
            trace: None,
            notes: None,
        }
    }

    /// Sets the verdict from the values present: pass iff all produced
    /// value strings are identical.
    pub fn set_verdict_from_values(&mut self) {
        let values: Vec<&String> = [&self.value, &self.dual_value, &self.oracle_value]
            .into_iter()
            .flatten()
            .collect();
        let pass = values.windows(2).all(|w| w[0] == w[1]);
        self.verdict = Some(if pass { "pass" } else { "fail" }.to_string());
    }

    pub fn failed(&self) -> bool {
        self.verdict.as_deref() == Some("fail")
    }
}

#[derive(Debug, Serialize)]
pub struct TraceRecord {
    pub initial_total: String,
    pub steps: Vec<TraceStepRecord>,
    pub final_residual: String,
    pub final_dual_value: String,
    pub ledger_ok: bool,
}

#[derive(Debug, Serialize)]
pub struct TraceStepRecord {
    pub residual_before: String,
    pub success_mass: String,
}

/// Galois report: the dual sigma-algebra, the double dual, and (when a
/// set family is given) the family's dual relation and double dual.
#[derive(Debug, Serialize)]
pub struct GaloisRecord {
    pub command: String,
    pub relation_classes: Vec<Vec<String>>,
    pub is_measurable: bool,
    pub is_basic: bool,
    pub dual_sigma_atoms: Vec<Vec<String>>,
    pub double_dual_classes: Vec<Vec<String>>,
    pub double_dual_equals_relation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family_dual_classes: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family_double_dual_atoms: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjunction_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<Vec<String>>,
}

/// Summary for `check --random`.
#[derive(Debug, Serialize)]
pub struct BatchRecord {
    pub command: String,
    pub seed: u64,
    pub instances: u32,
    pub failures: u32,
    pub verdict: String,
}

/// Formats a float with 15 significant digits.
pub fn sig15(x: f64) -> String {
    format!("{x:.14e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Renders any serializable record(s) in the selected format. JSON is
/// pretty-printed; CSV flattens single records to `key,value` lines and
/// arrays to a header row plus one row per element.
pub fn render<T: Serialize>(value: &T, format: OutputFormat) -> String {
    let json = serde_json::to_value(value).expect("records serialize");
    match format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(&json).expect("value serializes");
            text.push('\n');
            text
        }
        OutputFormat::Csv => render_csv(&json),
    }
}

fn render_csv(value: &Value) -> String {
    match value {
        Value::Array(items) => {
            // table: union of keys in order of first appearance
            let mut columns: Vec<String> = Vec::new();
            for item in items {
                if let Value::Object(map) = item {
                    for key in map.keys() {
                        if !columns.contains(key) {
                            columns.push(key.clone());
                        }
                    }
                }
            }
            let mut out = String::new();
            out.push_str(&columns.join(","));
            out.push('\n');
            for item in items {
                let row: Vec<String> = columns
                    .iter()
                    .map(|c| csv_cell(item.get(c.as_str()).unwrap_or(&Value::Null)))
                    .collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        }
        Value::Object(_) => {
            let mut out = String::new();
            let mut rows = Vec::new();
            flatten_into("", value, &mut rows);
            for (key, cell) in rows {
                out.push_str(&format!("{key},{cell}\n"));
            }
            out
        }
        other => format!("{}\n", csv_cell(other)),
    }
}

fn flatten_into(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (key, inner) in map {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten_into(&path, inner, rows);
            }
        }
        Value::Array(items) => {
            if items
                .iter()
                .all(|i| !matches!(i, Value::Object(_) | Value::Array(_)))
            {
                // scalar list: join in one cell
                rows.push((prefix.to_string(), escape(&raw_join(items))));
            } else {
                for (i, inner) in items.iter().enumerate() {
                    flatten_into(&format!("{prefix}[{i}]"), inner, rows);
                }
            }
        }
        scalar => rows.push((prefix.to_string(), csv_cell(scalar))),
    }
}

fn raw_cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => raw_join(items),
        other => other.to_string(),
    }
}

fn raw_join(items: &[Value]) -> String {
    items.iter().map(raw_cell).collect::<Vec<_>>().join(";")
}

fn csv_cell(value: &Value) -> String {
    escape(&raw_cell(value))
}

fn escape(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}
