//! Witness reports: the checkable transcript of a witness search.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSample {
    #[serde(rename = "L")]
    pub l: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowStat {
    #[serde(rename = "L")]
    pub l: f64,
    pub fraction: f64,
    pub max_dist: f64,
}

/// Tabular series attached to a report. The CLI moves `rows` into a CSV file
/// and keeps `columns` and `file` in the JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub columns: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            file: None,
            rows,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub schema: u32,
    pub experiment: String,
    pub inputs: BTreeMap<String, Value>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub schedule: Vec<ShiftSample>,
    pub windows: Vec<WindowStat>,
    pub pass: bool,
    pub failure: Option<String>,
    pub assumptions: Vec<String>,
    pub residuals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Series>,
}

impl WitnessReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            experiment: experiment.into(),
            inputs: BTreeMap::new(),
            m: None,
            schedule: Vec::new(),
            windows: Vec::new(),
            pass: false,
            failure: None,
            assumptions: Vec::new(),
            residuals: BTreeMap::new(),
            series: None,
        }
    }

    pub fn input(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.to_string(), v.into());
        self
    }

    pub fn residual(&mut self, key: &str, v: f64) -> &mut Self {
        self.residuals.insert(key.to_string(), v);
        self
    }

    pub fn min_fraction(&self) -> f64 {
        self.windows.iter().map(|w| w.fraction).fold(1.0, f64::min)
    }

    pub fn max_dist(&self) -> f64 {
        self.windows.iter().map(|w| w.max_dist).fold(0.0, f64::max)
    }

    /// Sets `pass` from the window fractions and a terminal-shift verdict;
    /// names the first failing predicate.
    pub fn settle(&mut self, epsilon: f64, terminal_ok: bool) -> bool {
        self.failure = None;
        if let Some(w) = self.windows.iter().find(|w| !(w.fraction >= 1.0 - epsilon)) {
            self.failure = Some(format!(
                "window fraction {} < 1 - epsilon at L = {}",
                w.fraction, w.l
            ));
        } else if !terminal_ok {
            self.failure = Some("terminal shift condition violated".into());
        }
        self.pass = self.failure.is_none();
        self.pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `n` log-spaced points from `lo` to `hi`, both endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `n` evenly spaced points on `[lo, hi]`, both endpoints included.
pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}
