//! Reference conversation models: definitions, Petri nets, random trace
//! generation and DOT export.

mod definition;
mod dot;
mod generate;
mod net;

pub use definition::{builtin_cor, builtin_qrfa, from_transition_graph, Edge, ModelDefinition, ModelDocument, PruneReport};
pub use dot::{opacity_hex, ToDot, MIN_EDGE_OPACITY};
pub use generate::generate_traces;
pub use net::{Marking, PlaceId, ProcessNet, ReachabilityGraph, Transition, TransitionId};
