//! Experiment reports: parameters, measured series, fits, constants and
//! verdicts, plus the manifest that makes a run reproducible.

use super::fit::PowerFit;
use std::collections::BTreeMap;

#[derive(Clone, Debug, serde::Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub pass: bool,
    pub measured: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Series { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let j = self
            .columns
            .iter()
            .position(|c| c == name)
            .unwrap_or_else(|| panic!("no column named {name}"));
        self.rows.iter().map(|r| r[j]).collect()
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct Manifest {
    pub config_hash: String,
    pub code_version: String,
    /// Wall time of the run; informational, excluded from reproducibility
    /// comparisons.
    pub wall_seconds: f64,
}

impl Manifest {
    pub fn new(config_hash: &str) -> Self {
        Manifest {
            config_hash: config_hash.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_seconds: 0.0,
        }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ExperimentReport {
    pub id: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub series: Series,
    pub fits: BTreeMap<String, PowerFit>,
    pub constants: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub manifest: Manifest,
}

impl ExperimentReport {
    pub fn new(id: &str) -> Self {
        ExperimentReport {
            id: id.to_string(),
            params: BTreeMap::new(),
            series: Series::default(),
            fits: BTreeMap::new(),
            constants: BTreeMap::new(),
            verdicts: Vec::new(),
            manifest: Manifest::new("unhashed"),
        }
    }

    pub fn param(&mut self, key: &str, value: impl serde::Serialize) {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameter serializes"),
        );
    }

    pub fn verdict(&mut self, criterion: &str, pass: bool, measured: f64, detail: String) {
        self.verdicts.push(Verdict { criterion: criterion.to_string(), pass, measured, detail });
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// Series rows as CSV with a mandatory header; floats carry 17
    /// significant digits so reruns are byte-comparable.
    pub fn series_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.series.columns.join(","));
        out.push('\n');
        for row in &self.series.rows {
            let cells: Vec<String> = row.iter().map(|v| format_g17(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest representation that survives a f64 round trip (17 significant
/// digits in the worst case).
pub fn format_g17(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        return format!("{:.1}", v);
    }
    format!("{:.16e}", v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_is_stable() {
        let mut r = ExperimentReport::new("demo");
        r.series = Series::new(&["eps", "value"]);
        r.series.push(vec![0.1, 1.0 / 3.0]);
        let a = r.series_csv();
        let b = r.series_csv();
        assert_eq!(a, b);
        assert!(a.starts_with("eps,value\n"));
        // full round trip of the printed float
        let printed = format_g17(1.0 / 3.0);
        let parsed: f64 = printed.parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
    }
}
