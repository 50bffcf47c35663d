//! Per-trace and log-level fitness.

use std::collections::HashMap;
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformance::{Aligner, CostFunction};
use crate::error::ConformanceError;
use crate::label::EventClass;
use crate::log::{EventLog, Trace};
use crate::model::ProcessNet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFitness {
    pub conversation_id: String,
    pub optimal_cost: u64,
    pub worst_case_cost: u64,
    pub fitness: f64,
    /// Set for empty traces, which get fitness 0 by convention.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub empty: bool,
}

impl TraceFitness {
    fn new(conversation_id: String, optimal_cost: u64, worst_case_cost: u64, len: usize) -> Self {
        assert!(
            optimal_cost <= worst_case_cost,
            "optimal alignment costs more than the worst case"
        );
        let empty = len == 0;
        let fitness = if empty || worst_case_cost == 0 {
            if empty {
                0.0
            } else {
                1.0
            }
        } else {
            1.0 - optimal_cost as f64 / worst_case_cost as f64
        };
        TraceFitness {
            conversation_id,
            optimal_cost,
            worst_case_cost,
            fitness,
            empty,
        }
    }
}

impl Aligner<'_> {
    pub fn fitness(&self, conversation_id: impl Into<String>, events: &[EventClass]) -> TraceFitness {
        let opt = self.align(events).cost;
        TraceFitness::new(conversation_id.into(), opt, self.worst_case_cost(events.len()), events.len())
    }
}

pub fn trace_fitness(trace: &Trace, net: &ProcessNet, cost: &CostFunction) -> Result<TraceFitness, ConformanceError> {
    Ok(Aligner::new(net, *cost)?.fitness(trace.conversation_id.clone(), trace.events()))
}

/// The metric rows of a fitness table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessAggregates {
    pub traces: usize,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub std_dev: f64,
    /// Fraction of traces with fitness exactly 1.
    pub cases_with_value_1: f64,
}

impl FitnessAggregates {
    /// Values are summed in the order given.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(FitnessAggregates {
            traces: values.len(),
            mean,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            std_dev: var.sqrt(),
            cases_with_value_1: values.iter().filter(|v| **v == 1.0).count() as f64 / n,
        })
    }

    pub fn rows(&self) -> [f64; 5] {
        [self.mean, self.max, self.min, self.std_dev, self.cases_with_value_1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub model: String,
    #[serde(default)]
    pub reconstructed: bool,
    pub cost: CostFunction,
    /// Per-trace rows in log order.
    pub traces: Vec<TraceFitness>,
    /// Over non-empty traces only; `None` if every trace is empty.
    pub aggregates: Option<FitnessAggregates>,
    pub empty_traces: Vec<String>,
}

impl FitnessReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        writeln!(out, "## Fitness of `{}`\n", self.model).unwrap();
        if self.reconstructed {
            out.push_str("> reconstructed model: edge list rebuilt from a drawing, not an exact copy\n\n");
        }
        out.push_str("| Metric | Value |\n|---|---|\n");
        match &self.aggregates {
            Some(a) => {
                for (name, v) in METRIC_ROWS.iter().zip(a.rows()) {
                    writeln!(out, "| {name} | {v:.2} |").unwrap();
                }
                writeln!(out, "| Traces | {} |", a.traces).unwrap();
            }
            None => out.push_str("| Traces | 0 |\n"),
        }
        if !self.empty_traces.is_empty() {
            writeln!(
                out,
                "\nEmpty traces (fitness 0, not aggregated): {}",
                self.empty_traces.join(", ")
            )
            .unwrap();
        }
        out
    }
}

/// Row names of the fitness table, in the order of [`FitnessAggregates::rows`].
pub const METRIC_ROWS: [&str; 5] = ["Average/case", "Max.", "Min.", "Std. Deviation", "Cases with value 1"];

/// Aligns every distinct trace variant once, in parallel, and reports one
/// row per conversation.
pub fn log_fitness(log: &EventLog, net: &ProcessNet, cost: &CostFunction) -> Result<FitnessReport, ConformanceError> {
    if log.is_empty() {
        return Err(ConformanceError::EmptyLog);
    }
    let aligner = Aligner::new(net, *cost)?;

    let mut variant_of: HashMap<&[EventClass], usize> = HashMap::new();
    let mut variants: Vec<&[EventClass]> = Vec::new();
    let slots: Vec<usize> = log
        .traces()
        .iter()
        .map(|t| {
            *variant_of.entry(t.events()).or_insert_with(|| {
                variants.push(t.events());
                variants.len() - 1
            })
        })
        .collect();
    let costs: Vec<(u64, u64)> = variants
        .par_iter()
        .map(|events| (aligner.align(events).cost, aligner.worst_case_cost(events.len())))
        .collect();

    let traces: Vec<TraceFitness> = log
        .traces()
        .iter()
        .zip(&slots)
        .map(|(t, &v)| TraceFitness::new(t.conversation_id.clone(), costs[v].0, costs[v].1, t.len()))
        .collect();

    let mut sorted: Vec<&TraceFitness> = traces.iter().collect();
    sorted.sort_by(|a, b| a.conversation_id.cmp(&b.conversation_id));
    let values: Vec<f64> = sorted.iter().filter(|t| !t.empty).map(|t| t.fitness).collect();
    let empty_traces = sorted.iter().filter(|t| t.empty).map(|t| t.conversation_id.clone()).collect();

    Ok(FitnessReport {
        model: net.name().to_string(),
        reconstructed: false,
        cost: *cost,
        aggregates: FitnessAggregates::from_values(&values),
        traces,
        empty_traces,
    })
}
