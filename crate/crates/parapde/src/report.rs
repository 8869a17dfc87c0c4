//! Experiment reports: canonical rows of
//! `(experiment, params, statistic, value, stderr, n)` serialized to CSV or
//! JSON, both of which round-trip losslessly. Every Monte-Carlo statistic
//! carries its replica count and standard error; deterministic statistics
//! carry `stderr = 0, n = 0`.
//!
//! String fields are restricted to a comma/quote/newline-free alphabet so
//! the CSV needs no quoting; floats print in shortest-round-trip form, so
//! byte-identical inputs give byte-identical reports.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "experiment,params,statistic,value,stderr,n";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub params: String,
    pub statistic: String,
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub build: String,
    pub schema: String,
    /// Wall time is the one nondeterministic field; it is omitted unless
    /// explicitly requested so reports are byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_ms: Option<u64>,
}

impl ReportMetadata {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            build: format!("parapde-{}", env!("CARGO_PKG_VERSION")),
            schema: crate::config::CONFIG_SCHEMA.to_string(),
            wall_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<ReportRow>,
}

fn field_ok(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || "-_.;=+()".contains(c))
}

impl ExperimentReport {
    pub fn new(seed: u64) -> Self {
        Self {
            metadata: ReportMetadata::new(seed),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, experiment: &str, params: &str, statistic: &str, value: f64, stderr: f64, n: u64) {
        debug_assert!(field_ok(experiment) && field_ok(statistic));
        debug_assert!(params.is_empty() || field_ok(params));
        self.rows.push(ReportRow {
            experiment: experiment.to_string(),
            params: params.to_string(),
            statistic: statistic.to_string(),
            value,
            stderr,
            n,
        });
    }

    /// Canonical row order: lexicographic in (experiment, params, statistic).
    pub fn sort_canonically(&mut self) {
        self.rows.sort_by(|a, b| {
            (&a.experiment, &a.params, &a.statistic).cmp(&(&b.experiment, &b.params, &b.statistic))
        });
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.experiment, r.params, r.statistic, r.value, r.stderr, r.n
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == CSV_HEADER => {}
            other => {
                return Err(Error::Parse(format!(
                    "bad CSV header: {:?} (expected {CSV_HEADER:?})",
                    other
                )))
            }
        }
        let mut report = Self::new(0);
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 6 {
                return Err(Error::Parse(format!(
                    "row {}: expected 6 fields, found {}",
                    i + 1,
                    parts.len()
                )));
            }
            if !field_ok(parts[0]) || !field_ok(parts[2]) || !(parts[1].is_empty() || field_ok(parts[1])) {
                return Err(Error::Parse(format!("row {}: bad field contents", i + 1)));
            }
            let value: f64 = parts[3]
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad value", i + 1)))?;
            let stderr: f64 = parts[4]
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad stderr", i + 1)))?;
            if !value.is_finite() || !stderr.is_finite() {
                return Err(Error::Parse(format!("row {}: non-finite number", i + 1)));
            }
            let n: u64 = parts[5]
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad n", i + 1)))?;
            report.rows.push(ReportRow {
                experiment: parts[0].to_string(),
                params: parts[1].to_string(),
                statistic: parts[2].to_string(),
                value,
                stderr,
                n,
            });
        }
        Ok(report)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: ExperimentReport = serde_json::from_str(text)?;
        for r in &report.rows {
            if !r.value.is_finite() || !r.stderr.is_finite() {
                return Err(Error::Parse("non-finite number in report".into()));
            }
            if !field_ok(&r.experiment) || !field_ok(&r.statistic) || !(r.params.is_empty() || field_ok(&r.params)) {
                return Err(Error::Parse("bad field contents in report".into()));
            }
        }
        Ok(report)
    }

    pub fn emit(&self, format: crate::config::ReportFormat) -> String {
        match format {
            crate::config::ReportFormat::Csv => self.to_csv(),
            crate::config::ReportFormat::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only_csv() {
        let r = ExperimentReport::new(1);
        assert_eq!(r.to_csv(), format!("{CSV_HEADER}\n"));
        let back = ExperimentReport::from_csv(&r.to_csv()).unwrap();
        assert!(back.rows.is_empty());
        // JSON keeps the metadata object.
        let j = ExperimentReport::from_json(&r.to_json()).unwrap();
        assert_eq!(j.metadata.seed, 1);
        assert!(j.metadata.wall_ms.is_none());
    }

    #[test]
    fn single_row_round_trips_in_both_formats() {
        let mut r = ExperimentReport::new(7);
        r.push("ou-moments", "k=1;t=0.5", "second_moment", 0.31606027941427883, 0.003, 10000);
        let c = ExperimentReport::from_csv(&r.to_csv()).unwrap();
        assert_eq!(c.rows, r.rows);
        let j = ExperimentReport::from_json(&r.to_json()).unwrap();
        assert_eq!(j, r);
    }

    #[test]
    fn canonical_ordering_is_stable() {
        let mut a = ExperimentReport::new(0);
        let mut b = ExperimentReport::new(0);
        for i in 0..1000 {
            a.push("x", &format!("i={}", (i * 37) % 1000), "s", i as f64, 0.0, 0);
        }
        for i in (0..1000).rev() {
            b.push("x", &format!("i={}", (i * 37) % 1000), "s", i as f64, 0.0, 0);
        }
        a.sort_canonically();
        b.sort_canonically();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn rejects_malformed_csv() {
        assert!(ExperimentReport::from_csv("bogus header\n").is_err());
        let bad = format!("{CSV_HEADER}\na,b,c,notafloat,0,0\n");
        assert!(ExperimentReport::from_csv(&bad).is_err());
        let bad = format!("{CSV_HEADER}\nonly,three,fields\n");
        assert!(ExperimentReport::from_csv(&bad).is_err());
        let bad = format!("{CSV_HEADER}\na,b,c,inf,0,0\n");
        assert!(ExperimentReport::from_csv(&bad).is_err());
    }
}
