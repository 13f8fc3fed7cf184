//! Classification metrics and history serialization.
//!
//! `export_history` is the plotting contract: CSV with the fixed header
//! `round,scope,accuracy,precision,recall,f1,mse_loss` (one row per record)
//! or a JSON array of records in the same field order. Floats are written in
//! shortest round-trip form, so export → import → export is byte-stable.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Raw confusion-matrix counts with fraud (label 1) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Whose metrics a record describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Global,
    Client(usize),
}

impl Scope {
    fn to_field(self) -> String {
        match self {
            Scope::Global => "global".to_string(),
            Scope::Client(id) => format!("client-{id}"),
        }
    }

    fn from_field(s: &str) -> Option<Scope> {
        if s == "global" {
            return Some(Scope::Global);
        }
        s.strip_prefix("client-")
            .and_then(|id| id.parse().ok())
            .map(Scope::Client)
    }
}

impl Serialize for Scope {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_field())
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Scope::from_field(&s).ok_or_else(|| D::Error::custom(format!("bad scope {s:?}")))
    }
}

/// Per-round evaluation result for the global model or one client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub round: usize,
    pub scope: Scope,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mse_loss: f64,
}

/// Standard confusion counts from paired labels and predictions.
pub fn confusion(labels: &[u8], predictions: &[u8]) -> Result<ConfusionCounts> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            what: "predictions",
            expected: labels.len(),
            actual: predictions.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut c = ConfusionCounts {
        true_pos: 0,
        false_pos: 0,
        true_neg: 0,
        false_neg: 0,
    };
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y != 0, p != 0) {
            (true, true) => c.true_pos += 1,
            (false, true) => c.false_pos += 1,
            (false, false) => c.true_neg += 1,
            (true, false) => c.false_neg += 1,
        }
    }
    Ok(c)
}

/// Derives accuracy/precision/recall/F1 from counts. Zero denominators give
/// 0 rather than NaN, so early rounds that predict a single class still
/// produce well-formed records.
pub fn derive_metrics(
    counts: &ConfusionCounts,
    mse_loss: f64,
    round: usize,
    scope: Scope,
) -> Result<MetricsRecord> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::EmptyBatch);
    }
    let accuracy = (counts.true_pos + counts.true_neg) as f64 / total as f64;
    let precision = ratio(counts.true_pos, counts.true_pos + counts.false_pos);
    let recall = ratio(counts.true_pos, counts.true_pos + counts.false_neg);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(MetricsRecord {
        round,
        scope,
        accuracy,
        precision,
        recall,
        f1,
        mse_loss,
    })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl ExportFormat {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

pub const HISTORY_HEADER: &str = "round,scope,accuracy,precision,recall,f1,mse_loss";

/// Serializes a history deterministically.
pub fn export_history(history: &[MetricsRecord], format: ExportFormat) -> Result<Vec<u8>> {
    if history.is_empty() {
        return Err(Error::EmptyBatch);
    }
    match format {
        ExportFormat::Csv => {
            let mut out = String::new();
            out.push_str(HISTORY_HEADER);
            out.push('\n');
            for r in history {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.round,
                    r.scope.to_field(),
                    r.accuracy,
                    r.precision,
                    r.recall,
                    r.f1,
                    r.mse_loss
                ));
            }
            Ok(out.into_bytes())
        }
        ExportFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(history).expect("records serialize");
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

/// Parses history bytes produced by `export_history`.
pub fn import_history(bytes: &[u8], format: ExportFormat) -> Result<Vec<MetricsRecord>> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::MalformedHistory(0))?;
    match format {
        ExportFormat::Json => {
            serde_json::from_str(text).map_err(|e| Error::MalformedHistory(e.line()))
        }
        ExportFormat::Csv => {
            let mut records = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                if lineno == 0 {
                    if line != HISTORY_HEADER {
                        return Err(Error::MalformedHistory(1));
                    }
                    continue;
                }
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 7 {
                    return Err(Error::MalformedHistory(lineno + 1));
                }
                let bad = || Error::MalformedHistory(lineno + 1);
                records.push(MetricsRecord {
                    round: fields[0].parse().map_err(|_| bad())?,
                    scope: Scope::from_field(fields[1]).ok_or_else(bad)?,
                    accuracy: fields[2].parse().map_err(|_| bad())?,
                    precision: fields[3].parse().map_err(|_| bad())?,
                    recall: fields[4].parse().map_err(|_| bad())?,
                    f1: fields[5].parse().map_err(|_| bad())?,
                    mse_loss: fields[6].parse().map_err(|_| bad())?,
                });
            }
            if records.is_empty() {
                return Err(Error::MalformedHistory(0));
            }
            Ok(records)
        }
    }
}
