//! Experiment results and their CSV form.

use std::io::Write;

use serde::Serialize;

use crate::SimError;

pub const CSV_HEADER: [&str; 8] = ["scenario", "sweep_name", "sweep_value", "metric", "mean", "stderr", "trials", "seed"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Mean and standard error of the mean (zero for fewer than two samples).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub scenario: String,
    pub seed: u64,
    rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new(scenario: &str, seed: u64) -> Self {
        Self { scenario: scenario.to_string(), seed, rows: Vec::new() }
    }

    /// Adds one row summarizing the per-trial `values`.
    pub fn push(&mut self, sweep_name: &str, sweep_value: f64, metric: &str, values: &[f64]) {
        let (mean, stderr) = mean_stderr(values);
        self.rows.push(ResultRow {
            scenario: self.scenario.clone(),
            sweep_name: sweep_name.to_string(),
            sweep_value,
            metric: metric.to_string(),
            mean,
            stderr,
            trials: values.len(),
            seed: self.seed,
        });
    }

    pub fn push_exact(&mut self, sweep_name: &str, sweep_value: f64, metric: &str, value: f64) {
        self.push(sweep_name, sweep_value, metric, &[value]);
    }

    pub fn extend(&mut self, other: ResultTable) {
        self.rows.extend(other.rows);
    }

    /// Rows sorted by (sweep, metric, sweep value), the order they are written in.
    pub fn rows(&self) -> Vec<&ResultRow> {
        let mut rows: Vec<&ResultRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            (&a.scenario, &a.sweep_name, &a.metric)
                .cmp(&(&b.scenario, &b.sweep_name, &b.metric))
                .then(a.sweep_value.total_cmp(&b.sweep_value))
        });
        rows
    }

    pub fn get(&self, metric: &str, sweep_value: f64) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.metric == metric && r.sweep_value == sweep_value)
    }

    /// `(sweep_value, mean)` pairs of one metric, in sweep order.
    pub fn series(&self, metric: &str) -> Vec<(f64, f64)> {
        self.rows().into_iter().filter(|r| r.metric == metric).map(|r| (r.sweep_value, r.mean)).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in self.rows() {
            w.serialize(r)?;
        }
        w.flush().map_err(|source| SimError::Io { path: "<csv>".into(), source })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, SimError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}
