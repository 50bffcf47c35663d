//! Alignment-based conformance checking.

mod alignment;
mod fitness;

pub use alignment::{optimal_alignment, worst_case_cost, Aligner, Alignment, CostFunction, Move, MARKING_LIMIT};
pub use fitness::{log_fitness, trace_fitness, FitnessAggregates, FitnessReport, TraceFitness, METRIC_ROWS};
