//! Success prediction from fitness and scoring against gold judgments.
//!
//! Conversation failure is the positive class throughout: a true positive
//! is a conversation predicted to fail that the annotators also marked as
//! unsuccessful.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt::{self, Write};

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::conformance::{log_fitness, CostFunction, FitnessAggregates, FitnessReport, METRIC_ROWS};
use crate::error::EvaluationError;
use crate::label::Layer;
use crate::log::EventLog;
use crate::model::{ModelDefinition, ProcessNet};

pub const DEFAULT_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessPrediction {
    pub conversation_id: String,
    pub predicted_success: bool,
    pub fitness: f64,
}

/// Predicts success for every trace whose fitness reaches `threshold`.
pub fn predict_success(report: &FitnessReport, threshold: f64) -> Result<Vec<SuccessPrediction>, EvaluationError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(EvaluationError::InvalidThreshold(threshold));
    }
    Ok(report
        .traces
        .iter()
        .map(|t| SuccessPrediction {
            conversation_id: t.conversation_id.clone(),
            predicted_success: t.fitness >= threshold,
            fitness: t.fitness,
        })
        .collect())
}

/// A ratio that may have a zero denominator. Serialized as a number or the
/// string `"undefined"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Defined(f64),
    Undefined,
}

impl Metric {
    pub fn ratio(num: u64, den: u64) -> Metric {
        if den == 0 {
            Metric::Undefined
        } else {
            Metric::Defined(num as f64 / den as f64)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Metric::Defined(v) => Some(v),
            Metric::Undefined => None,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Defined(v) => write!(f, "{v:.2}"),
            Metric::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Metric::Defined(v) => s.serialize_f64(*v),
            Metric::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Metric::Defined(v)),
            Raw::Str(s) if s == "undefined" => Ok(Metric::Undefined),
            Raw::Str(s) => Err(de::Error::custom(format!("expected a number or \"undefined\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetectionMetrics {
    pub positive_class: String,
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
    pub precision: Metric,
    pub recall: Metric,
    /// Predictions without a gold judgment, excluded from the counts.
    pub missing_gold: Vec<String>,
}

impl ErrorDetectionMetrics {
    pub fn scored(&self) -> u64 {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }
}

pub fn score_error_detection(
    preds: &[SuccessPrediction],
    gold: &BTreeMap<String, bool>,
) -> Result<ErrorDetectionMetrics, EvaluationError> {
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    let mut missing_gold = Vec::new();
    for p in preds {
        let Some(&success) = gold.get(&p.conversation_id) else {
            missing_gold.push(p.conversation_id.clone());
            continue;
        };
        match (!p.predicted_success, !success) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    if tp + fp + fn_ + tn == 0 {
        return Err(EvaluationError::NoOverlap);
    }
    missing_gold.sort();
    Ok(ErrorDetectionMetrics {
        positive_class: "failure".into(),
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        true_negatives: tn,
        precision: Metric::ratio(tp, tp + fp),
        recall: Metric::ratio(tp, tp + fn_),
        missing_gold,
    })
}

/// Brings a log and a model to the coarser of their two layers.
pub fn project_to_common_layer<'a>(
    log: &'a EventLog,
    model: &'a ModelDefinition,
) -> (Cow<'a, EventLog>, Cow<'a, ModelDefinition>) {
    let layer = log.layer().meet(model.layer());
    let log = if log.layer() == layer {
        Cow::Borrowed(log)
    } else {
        Cow::Owned(log.to_core())
    };
    let model = if model.layer() == layer {
        Cow::Borrowed(model)
    } else {
        Cow::Owned(model.to_core())
    };
    debug_assert!(layer == Layer::Core || (log.layer() == layer && model.layer() == layer));
    (log, model)
}

/// A named log with optional gold success judgments.
#[derive(Debug, Clone)]
pub struct ReportLog {
    pub log: EventLog,
    pub gold: Option<BTreeMap<String, bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ErrorDetectionBlock {
    Scored(ErrorDetectionMetrics),
    NoGold,
    NoOverlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBlock {
    pub model: String,
    pub log: String,
    pub reconstructed: bool,
    pub fitness: Option<FitnessAggregates>,
    pub error_detection: Option<ErrorDetectionBlock>,
    /// Set when the pair could not be evaluated.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub threshold: f64,
    pub cost: CostFunction,
    pub blocks: Vec<ReportBlock>,
}

/// Evaluates every (model, log) pair, ordered by model name then log name.
/// A failing pair is recorded in its block and does not stop the others.
pub fn dataset_report(
    logs: &BTreeMap<String, ReportLog>,
    models: &BTreeMap<String, ModelDefinition>,
    cost: &CostFunction,
    threshold: f64,
) -> Result<DatasetReport, EvaluationError> {
    if logs.is_empty() || models.is_empty() {
        return Err(EvaluationError::NothingToReport);
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(EvaluationError::InvalidThreshold(threshold));
    }
    let mut blocks = Vec::new();
    for (model_name, def) in models {
        for (log_name, entry) in logs {
            let mut block = ReportBlock {
                model: model_name.clone(),
                log: log_name.clone(),
                reconstructed: def.reconstructed(),
                fitness: None,
                error_detection: None,
                error: None,
            };
            let (log, model) = project_to_common_layer(&entry.log, def);
            match log_fitness(&log, &ProcessNet::from_definition(&model), cost) {
                Ok(report) => {
                    block.fitness = report.aggregates.clone();
                    let preds = predict_success(&report, threshold)?;
                    block.error_detection = Some(match &entry.gold {
                        Some(gold) if !gold.is_empty() => match score_error_detection(&preds, gold) {
                            Ok(m) => ErrorDetectionBlock::Scored(m),
                            Err(_) => ErrorDetectionBlock::NoOverlap,
                        },
                        _ => ErrorDetectionBlock::NoGold,
                    });
                }
                Err(e) => block.error = Some(e.to_string()),
            }
            blocks.push(block);
        }
    }
    Ok(DatasetReport {
        threshold,
        cost: *cost,
        blocks,
    })
}

impl DatasetReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One column per (model, log) pair; fitness rows on top, error
    /// detection rows below.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{}{} / {}", b.model, if b.reconstructed { "*" } else { "" }, b.log))
            .collect();
        writeln!(out, "| | {} |", header.join(" | ")).unwrap();
        writeln!(out, "|---|{}", "---|".repeat(header.len())).unwrap();

        let row = |out: &mut String, name: &str, cell: &dyn Fn(&ReportBlock) -> String| {
            let cells: Vec<String> = self.blocks.iter().map(cell).collect();
            writeln!(out, "| {name} | {} |", cells.join(" | ")).unwrap();
        };
        for (i, name) in METRIC_ROWS.iter().enumerate() {
            row(&mut out, name, &|b| match (&b.error, &b.fitness) {
                (Some(_), _) => "failed".into(),
                (None, Some(a)) => format!("{:.2}", a.rows()[i]),
                (None, None) => "n/a".into(),
            });
        }
        let detection = |b: &ReportBlock, pick: fn(&ErrorDetectionMetrics) -> Metric| match (&b.error, &b.error_detection) {
            (Some(_), _) => "failed".to_string(),
            (None, Some(ErrorDetectionBlock::Scored(m))) => pick(m).to_string(),
            (None, Some(ErrorDetectionBlock::NoOverlap)) => "no overlap".into(),
            (None, _) => "no gold".into(),
        };
        row(&mut out, "Error detection Precision", &|b| detection(b, |m| m.precision));
        row(&mut out, "Error detection Recall", &|b| detection(b, |m| m.recall));

        writeln!(
            out,
            "\nSuccess predicted when fitness >= {}. Error detection treats conversation failure as the positive class.",
            self.threshold
        )
        .unwrap();
        if self.blocks.iter().any(|b| b.reconstructed) {
            out.push_str("\n\\* reconstructed model: edge list rebuilt from a drawing, not an exact copy.\n");
        }
        for b in self.blocks.iter().filter(|b| b.error.is_some()) {
            writeln!(
                out,
                "\nfailed: {} / {}: {}",
                b.model,
                b.log,
                b.error.as_deref().unwrap_or_default()
            )
            .unwrap();
        }
        out
    }
}
