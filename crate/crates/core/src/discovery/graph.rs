use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::DiscoveryError;
use crate::label::EventClass;
use crate::log::EventLog;

/// Frequency-weighted directly-follows graph with explicit START and END.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphDoc", try_from = "GraphDoc")]
pub struct TransitionGraph {
    nodes: BTreeSet<EventClass>,
    edges: BTreeMap<(EventClass, EventClass), u64>,
    trace_count: u64,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    trace_count: u64,
    nodes: Vec<EventClass>,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    from: EventClass,
    to: EventClass,
    count: u64,
}

impl From<TransitionGraph> for GraphDoc {
    fn from(g: TransitionGraph) -> Self {
        GraphDoc {
            trace_count: g.trace_count,
            nodes: g.nodes.into_iter().collect(),
            edges: g
                .edges
                .into_iter()
                .map(|((from, to), count)| EdgeDoc { from, to, count })
                .collect(),
        }
    }
}

impl TryFrom<GraphDoc> for TransitionGraph {
    type Error = String;

    fn try_from(doc: GraphDoc) -> Result<Self, Self::Error> {
        let mut g = TransitionGraph::with_trace_count(doc.trace_count);
        g.nodes.extend(doc.nodes);
        for e in doc.edges {
            if e.count == 0 {
                return Err(format!("edge {} -> {} has zero count", e.from, e.to));
            }
            g.add(e.from, e.to, e.count);
        }
        Ok(g)
    }
}

impl TransitionGraph {
    fn with_trace_count(trace_count: u64) -> Self {
        TransitionGraph {
            nodes: BTreeSet::new(),
            edges: BTreeMap::new(),
            trace_count,
        }
    }

    /// Builds a graph from explicit edge counts.
    pub fn from_edges<I>(edges: I, trace_count: u64) -> Self
    where
        I: IntoIterator<Item = (EventClass, EventClass, u64)>,
    {
        let mut g = TransitionGraph::with_trace_count(trace_count);
        for (from, to, count) in edges {
            if count > 0 {
                g.add(from, to, count);
            }
        }
        g
    }

    fn add(&mut self, from: EventClass, to: EventClass, count: u64) {
        self.nodes.insert(from);
        self.nodes.insert(to);
        *self.edges.entry((from, to)).or_default() += count;
    }

    pub fn nodes(&self) -> &BTreeSet<EventClass> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<(EventClass, EventClass), u64> {
        &self.edges
    }

    pub fn trace_count(&self) -> u64 {
        self.trace_count
    }

    pub fn frequency(&self, from: EventClass, to: EventClass) -> u64 {
        self.edges.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn out_frequency(&self, node: EventClass) -> u64 {
        self.edges.iter().filter(|((f, _), _)| *f == node).map(|(_, c)| c).sum()
    }

    pub fn in_frequency(&self, node: EventClass) -> u64 {
        self.edges.iter().filter(|((_, t), _)| *t == node).map(|(_, c)| c).sum()
    }

    /// Checks the invariants a graph mined from a log must satisfy. Graphs
    /// returned by [`extract_model`] may legitimately fail flow conservation.
    pub fn check_log_invariants(&self) -> Result<(), String> {
        if let Some(((f, t), _)) = self.edges.iter().find(|(_, c)| **c == 0) {
            return Err(format!("edge {f} -> {t} has zero frequency"));
        }
        if self.in_frequency(EventClass::Start) != 0 {
            return Err("START has incoming edges".into());
        }
        if self.out_frequency(EventClass::End) != 0 {
            return Err("END has outgoing edges".into());
        }
        if self.out_frequency(EventClass::Start) != self.trace_count {
            return Err("flow out of START differs from trace count".into());
        }
        if self.in_frequency(EventClass::End) != self.trace_count {
            return Err("flow into END differs from trace count".into());
        }
        for n in self.nodes.iter().filter(|n| !n.is_marker()) {
            if self.in_frequency(*n) != self.out_frequency(*n) {
                return Err(format!("flow is not conserved at {n}"));
            }
        }
        Ok(())
    }
}

pub fn directly_follows(log: &EventLog) -> Result<TransitionGraph, DiscoveryError> {
    if log.is_empty() {
        return Err(DiscoveryError::EmptyLog);
    }
    let mut counts: BTreeMap<(EventClass, EventClass), u64> = BTreeMap::new();
    for trace in log.traces() {
        let mut prev = EventClass::Start;
        for &e in trace.events() {
            *counts.entry((prev, e)).or_default() += 1;
            prev = e;
        }
        *counts.entry((prev, EventClass::End)).or_default() += 1;
    }
    Ok(TransitionGraph::from_edges(
        counts.into_iter().map(|((f, t), c)| (f, t, c)),
        log.len() as u64,
    ))
}

/// Minimum edge frequency, absolute or as a fraction of the trace count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeThreshold {
    Absolute(u64),
    Relative(f64),
}

impl EdgeThreshold {
    pub fn resolve(self, trace_count: u64) -> Result<u64, DiscoveryError> {
        match self {
            EdgeThreshold::Absolute(0) => Err(DiscoveryError::InvalidParameter(
                "minimum edge frequency must be at least 1".into(),
            )),
            EdgeThreshold::Absolute(n) => Ok(n),
            EdgeThreshold::Relative(f) if !(f > 0.0 && f <= 1.0) => Err(DiscoveryError::InvalidParameter(format!(
                "relative threshold must lie in (0, 1], got {f}"
            ))),
            EdgeThreshold::Relative(f) => Ok(((f * trace_count as f64).ceil() as u64).max(1)),
        }
    }
}

/// Keeps edges with frequency at least `min_edge_freq` and the nodes they touch.
pub fn extract_model(graph: &TransitionGraph, min_edge_freq: u64) -> Result<TransitionGraph, DiscoveryError> {
    extract_model_with(graph, EdgeThreshold::Absolute(min_edge_freq))
}

pub fn extract_model_with(graph: &TransitionGraph, threshold: EdgeThreshold) -> Result<TransitionGraph, DiscoveryError> {
    let min = threshold.resolve(graph.trace_count)?;
    let kept = TransitionGraph::from_edges(
        graph.edges.iter().filter(|(_, c)| **c >= min).map(|((f, t), c)| (*f, *t, *c)),
        graph.trace_count,
    );
    if kept.edges.is_empty() {
        return Err(DiscoveryError::NoEdgeSurvives(min));
    }
    Ok(kept)
}
