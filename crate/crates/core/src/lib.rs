//! Process mining over annotated information-seeking conversations.
//!
//! Transcripts are normalized onto the QRFA label schema ([`ingest`]),
//! reduced to event logs ([`log`]), mined for conversation flows
//! ([`discovery`]), checked against reference models ([`model`],
//! [`conformance`]) and scored against human success judgments
//! ([`evaluation`]).

pub mod conformance;
pub mod discovery;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod label;
pub mod log;
pub mod model;

pub use label::{CoreLabel, EventClass, Label, Layer, Speaker, SubLabel};
