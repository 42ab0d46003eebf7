use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REPORT_MAGIC: &str = "stuckat-report v1";

/// Outcome of one trial. Fields that do not apply to an experiment stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frozen: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub msg_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flips: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempts: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistent: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decode_match: Option<bool>,
    /// Experiment-specific numbers.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
}

impl TrialRecord {
    pub fn new(index: u64) -> Self {
        TrialRecord {
            index,
            ..TrialRecord::default()
        }
    }

    pub fn failed(index: u64, err: &Error) -> Self {
        TrialRecord {
            index,
            success: false,
            cause: Some(err.cause().to_string()),
            ..TrialRecord::default()
        }
    }
}

/// Counts and rates recomputable from the trial records.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: u64,
    pub successes: u64,
    pub failures_by_cause: BTreeMap<String, u64>,
    /// Trials that checked consistency, and how many passed.
    pub consistency_checked: u64,
    pub consistent: u64,
    pub decode_checked: u64,
    pub decode_matches: u64,
    pub total_msg_bits: u64,
    pub success_rate: f64,
    /// `3σ` normal-approximation interval on the success rate, clipped to [0, 1].
    pub success_ci: (f64, f64),
}

impl Aggregates {
    pub fn from_records(records: &[TrialRecord]) -> Self {
        let mut a = Aggregates {
            trials: records.len() as u64,
            ..Aggregates::default()
        };
        for r in records {
            if r.success {
                a.successes += 1;
                a.total_msg_bits += r.msg_len.unwrap_or(0) as u64;
            } else if let Some(c) = &r.cause {
                *a.failures_by_cause.entry(c.clone()).or_default() += 1;
            }
            if let Some(ok) = r.consistent {
                a.consistency_checked += 1;
                a.consistent += ok as u64;
            }
            if let Some(ok) = r.decode_match {
                a.decode_checked += 1;
                a.decode_matches += ok as u64;
            }
        }
        a.success_rate = rate(a.successes, a.trials);
        a.success_ci = three_sigma(a.successes, a.trials);
        a
    }

    pub fn failure_rate(&self) -> f64 {
        1.0 - self.success_rate
    }

    /// All decodes matched (vacuously true with none checked).
    pub fn all_decoded(&self) -> bool {
        self.decode_matches == self.decode_checked
    }

    pub fn all_consistent(&self) -> bool {
        self.consistent == self.consistency_checked
    }
}

fn rate(k: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

/// Standard deviation of a binomial proportion estimate.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

pub fn three_sigma(k: u64, n: u64) -> (f64, f64) {
    let p = rate(k, n);
    let s = 3.0 * binomial_sigma(p, n);
    ((p - s).max(0.0), (p + s).min(1.0))
}

/// Per-trial records, their aggregates, and an echo of the inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Spec and profile as given, so the run can be repeated.
    pub params: serde_json::Value,
    pub records: Vec<TrialRecord>,
    pub aggregates: Aggregates,
    /// Experiment-level numbers (bounds, maxima, verdicts).
    pub summary: BTreeMap<String, f64>,
    /// Free-form remarks, such as a declared sampling fallback.
    pub notes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    experiment: String,
    params: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct Footer {
    aggregates: Aggregates,
    summary: BTreeMap<String, f64>,
    notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, params: serde_json::Value, records: Vec<TrialRecord>) -> Self {
        let aggregates = Aggregates::from_records(&records);
        ExperimentReport {
            experiment: experiment.to_string(),
            params,
            records,
            aggregates,
            summary: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_summary(mut self, key: &str, value: f64) -> Self {
        self.summary.insert(key.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }

    /// Do the embedded aggregates match the records?
    pub fn verify_aggregates(&self) -> bool {
        Aggregates::from_records(&self.records) == self.aggregates
    }

    /// Magic line, a header object, one line per trial, a footer object.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let json = |e: serde_json::Error| Error::Format(e.to_string());
        writeln!(w, "{REPORT_MAGIC}")?;
        let header = Header {
            experiment: self.experiment.clone(),
            params: self.params.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&header).map_err(json)?)?;
        for r in &self.records {
            writeln!(w, "{}", serde_json::to_string(r).map_err(json)?)?;
        }
        let footer = Footer {
            aggregates: self.aggregates.clone(),
            summary: self.summary.clone(),
            notes: self.notes.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&footer).map_err(json)?)?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let json = |e: serde_json::Error| Error::Format(e.to_string());
        let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
        if lines.first().map(String::as_str) != Some(REPORT_MAGIC) {
            return Err(Error::Format(format!(
                "missing magic line {REPORT_MAGIC:?}"
            )));
        }
        if lines.len() < 3 {
            return Err(Error::Format("report is truncated".into()));
        }
        let header: Header = serde_json::from_str(&lines[1]).map_err(json)?;
        let footer: Footer = serde_json::from_str(&lines[lines.len() - 1]).map_err(json)?;
        let records = lines[2..lines.len() - 1]
            .iter()
            .map(|l| serde_json::from_str(l).map_err(json))
            .collect::<Result<Vec<TrialRecord>>>()?;
        Ok(ExperimentReport {
            experiment: header.experiment,
            params: header.params,
            records,
            aggregates: footer.aggregates,
            summary: footer.summary,
            notes: footer.notes,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_jsonl(f)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::read_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let mut ok = TrialRecord::new(0);
        ok.success = true;
        ok.decode_match = Some(true);
        ok.msg_len = Some(17);
        ok.values.insert("x".into(), 0.1);
        let bad = TrialRecord::failed(
            1,
            &Error::RankDeficient {
                block: 2,
                attempts: 1,
            },
        );
        let report = ExperimentReport::new("demo", serde_json::json!({"n": 8}), vec![ok, bad])
            .with_summary("bound", 0.25)
            .with_note("toy");
        assert_eq!(report.aggregates.failures_by_cause["RankDeficient"], 1);
        let mut buf = Vec::new();
        report.write_jsonl(&mut buf).unwrap();
        let back = ExperimentReport::read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, report);
        assert!(back.verify_aggregates());
    }

    #[test]
    fn tampered_aggregates_are_caught() {
        let mut report =
            ExperimentReport::new("demo", serde_json::Value::Null, vec![TrialRecord::new(0)]);
        report.aggregates.successes = 1;
        assert!(!report.verify_aggregates());
        assert!(ExperimentReport::read_jsonl(&b"nope\n"[..]).is_err());
    }
}
