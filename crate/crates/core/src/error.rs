use std::path::PathBuf;

use thiserror::Error;

use crate::ingest::UnmappedReport;
use crate::label::{CoreLabel, SubLabel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("unknown core label `{0}` (expected one of Q, R, F, A)")]
    UnknownCore(String),
    #[error("unknown sublabel `{0}`")]
    UnknownSub(String),
    #[error("{sub} is not a sublabel of {core}")]
    InvalidPair { core: CoreLabel, sub: SubLabel },
    #[error("unknown speaker `{0}` (expected user or agent)")]
    UnknownSpeaker(String),
    #[error("unknown layer `{0}` (expected core or fine)")]
    UnknownLayer(String),
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("trace `{0}` has no events")]
    EmptyTrace(String),
    #[error("trace `{id}` carries `{label}`, which is not allowed in a {layer}-layer log")]
    LayerMismatch {
        id: String,
        label: String,
        layer: crate::label::Layer,
    },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate conversation id `{0}`")]
    DuplicateId(String),
    #[error("line {line}: empty conversation `{id}`")]
    EmptyConversation { line: usize, id: String },
    #[error("mapping row {row}: {message}")]
    Mapping { row: usize, message: String },
    #[error("unmapped label `{}` in conversation `{}` at utterance {}", .0.source_label, .0.conversation_id, .0.utterance)]
    Unmapped(UnmappedReport),
    #[error("unknown built-in mapping `{0}`")]
    UnknownBuiltin(String),
    #[error("write failed: {0}")]
    Write(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscoveryError {
    #[error("event log is empty")]
    EmptyLog,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no edge survives a minimum frequency of {0}")]
    NoEdgeSurvives(u64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model definition: {0}")]
    Parse(String),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("END is not reachable from START after thresholding")]
    EndUnreachable,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConformanceError {
    #[error("final marking is unreachable from the initial marking")]
    FinalMarkingUnreachable,
    #[error("reachability graph exceeds {0} markings")]
    StateSpaceTooLarge(usize),
    #[error("event log is empty")]
    EmptyLog,
    #[error("invalid cost function: {0}")]
    InvalidCost(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvaluationError {
    #[error("threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("no prediction has a gold annotation")]
    NoOverlap,
    #[error("report needs at least one log and one model")]
    NothingToReport,
}
