use serde_json::{json, Map, Value};

use crate::args::Format;

/// Rows of scalar cells under named columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self.columns.iter().cloned().zip(r.iter().cloned()).collect();
                Value::Object(m)
            })
            .collect();
        json!({ "columns": self.columns, "rows": rows })
    }
}

/// What a subcommand produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub summary: String,
    pub results: Value,
    pub table: Option<Table>,
    /// Exit code when no error was raised: 0, 2 (invalid input), 3 (inconclusive) or 4.
    pub exit: i32,
    pub seed: Option<u64>,
}

impl Outcome {
    pub fn new(summary: impl Into<String>, results: Value) -> Self {
        Outcome {
            summary: summary.into(),
            results,
            table: None,
            exit: 0,
            seed: None,
        }
    }
}

/// The command line as recorded in reports: program name normalized and
/// execution-only flags (`--threads`, `--timings`) dropped, so reports do
/// not depend on them.
pub fn recorded_argv(argv: &[String]) -> Vec<String> {
    let mut out = vec!["trl".to_string()];
    let mut skip = false;
    for a in argv.iter().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        if a == "--threads" {
            skip = true;
            continue;
        }
        if a.starts_with("--threads=") || a == "--timings" {
            continue;
        }
        out.push(a.clone());
    }
    out
}

pub fn build(command: &str, argv: &[String], inputs: &[Value], outcome: &Outcome, timing_ms: Option<f64>) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("argv".into(), json!(recorded_argv(argv).join(" ")));
    m.insert("inputs".into(), Value::Array(inputs.to_vec()));
    m.insert("seed".into(), json!(outcome.seed));
    m.insert("summary".into(), json!(outcome.summary));
    let mut results = outcome.results.clone();
    if let (Some(t), Value::Object(r)) = (&outcome.table, &mut results) {
        r.insert("table".into(), t.to_json());
    }
    m.insert("results".into(), results);
    m.insert(
        "guard".into(),
        json!({ "override": std::env::var(trl_core::guard::ENV_OVERRIDE).ok() }),
    );
    m.insert("exit_code".into(), json!(outcome.exit));
    if let Some(ms) = timing_ms {
        m.insert("timings".into(), json!({ "total_ms": ms }));
    }
    Value::Object(m)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn aligned(rows: &[Vec<String>]) -> String {
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let widths: Vec<usize> = (0..width)
        .map(|j| rows.iter().filter_map(|r| r.get(j)).map(|c| c.chars().count()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j + 1 == r.len() {
                    c.clone()
                } else {
                    format!("{c:<w$}", w = widths[j])
                }
            })
            .collect();
        s.push_str(line.join("  ").trim_end());
        s.push('\n');
    }
    s
}

pub fn render(report: &Value, outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut rows = vec![
                vec!["command".to_string(), cell(&report["command"])],
                vec!["summary".to_string(), outcome.summary.clone()],
            ];
            if let Value::Object(r) = &outcome.results {
                for (k, v) in r {
                    rows.push(vec![k.clone(), cell(v)]);
                }
            }
            let mut s = aligned(&rows);
            if let Some(t) = &outcome.table {
                s.push('\n');
                let mut trows = vec![t.columns.clone()];
                trows.extend(t.rows.iter().map(|r| r.iter().map(cell).collect()));
                s.push_str(&aligned(&trows));
            }
            if let Some(tm) = report.get("timings") {
                s.push_str(&format!("timings  {tm}\n"));
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argv_drops_execution_flags() {
        let argv: Vec<String> = ["/x/trl", "ensemble", "--threads", "4", "random-tensor", "--timings", "--threads=2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(recorded_argv(&argv), vec!["trl", "ensemble", "random-tensor"]);
    }

    #[test]
    fn text_tables_are_aligned() {
        let mut t = Table::new(&["a", "long"]);
        t.rows.push(vec![json!(1), json!("x")]);
        let mut o = Outcome::new("s", json!({}));
        o.table = Some(t);
        let r = build("c", &["trl".into()], &[], &o, None);
        let text = render(&r, &o, Format::Text);
        assert!(text.contains("a  long\n1  x\n"));
    }
}
