use serde_json::{Map, Value};

use crate::Format;

/// Renders a report object. Tables print one `key: value` line per field,
/// nested values as compact JSON.
pub fn render(report: &Map<String, Value>, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports are plain JSON");
            s.push('\n');
            s
        }
        Format::Table => {
            let width = report.keys().map(String::len).max().unwrap_or(0);
            report
                .iter()
                .map(|(k, v)| {
                    let v = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    format!("{k:<width$}  {v}\n")
                })
                .collect()
        }
    }
}
