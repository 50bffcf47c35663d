//! Reference conversation models as edge lists between named nodes.
//!
//! A node name is either `START`, `END`, a QRFA label (`Q`, `A:Results`) or
//! an arbitrary state name whose label is given in the `labels` map. The
//! latter lets one label appear at several states, as in COR where both
//! roles can `withdraw`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discovery::TransitionGraph;
use crate::error::ModelError;
use crate::label::{EventClass, Layer};

pub type Edge = (String, String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDefinition {
    name: String,
    layer: Layer,
    nodes: BTreeMap<String, EventClass>,
    edges: BTreeSet<Edge>,
    cycles: BTreeMap<String, BTreeSet<Edge>>,
    reconstructed: bool,
}

/// On-disk JSON form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub name: String,
    pub layer: Layer,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reconstructed: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, String>,
    pub edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cycles: BTreeMap<String, Vec<[String; 2]>>,
}

const QRFA_JSON: &str = include_str!("../../data/models/qrfa.json");
const COR_JSON: &str = include_str!("../../data/models/cor.json");

/// Nodes and edges removed while turning a mined graph into a model.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PruneReport {
    pub below_threshold: Vec<Edge>,
    pub unreachable_nodes: Vec<String>,
    pub dangling_edges: Vec<Edge>,
}

impl ModelDefinition {
    pub fn from_document(doc: ModelDocument) -> Result<Self, ModelError> {
        let invalid = |m: String| ModelError::Invalid(format!("{}: {m}", doc.name));

        let mut named = BTreeMap::new();
        for (node, label) in &doc.labels {
            if node == EventClass::START_NAME || node == EventClass::END_NAME {
                return Err(invalid(format!("`{node}` is reserved and cannot be relabelled")));
            }
            let class: EventClass = label.parse().map_err(|e| invalid(format!("node `{node}`: {e}")))?;
            if class.is_marker() {
                return Err(invalid(format!("node `{node}` cannot carry `{label}`")));
            }
            named.insert(node.clone(), class);
        }

        let mut nodes = BTreeMap::new();
        let mut edges = BTreeSet::new();
        for [from, to] in &doc.edges {
            for n in [from, to] {
                if nodes.contains_key(n) {
                    continue;
                }
                let class = match named.get(n) {
                    Some(c) => *c,
                    None => n
                        .parse::<EventClass>()
                        .map_err(|e| invalid(format!("node `{n}` has no label and is not one: {e}")))?,
                };
                if let Some(l) = class.label() {
                    if !doc.layer.admits(&l) {
                        return Err(invalid(format!(
                            "node `{n}` carries {l}, not allowed at the {} layer",
                            doc.layer
                        )));
                    }
                }
                nodes.insert(n.clone(), class);
            }
            if !edges.insert((from.clone(), to.clone())) {
                return Err(invalid(format!("duplicate edge {from} -> {to}")));
            }
        }
        if let Some(unused) = named.keys().find(|n| !nodes.contains_key(*n)) {
            return Err(invalid(format!("labelled node `{unused}` has no edges")));
        }

        let mut cycles = BTreeMap::new();
        for (name, cycle_edges) in &doc.cycles {
            let set: BTreeSet<Edge> = cycle_edges.iter().map(|[f, t]| (f.clone(), t.clone())).collect();
            if let Some((f, t)) = set.iter().find(|e| !edges.contains(*e)) {
                return Err(invalid(format!("cycle `{name}` uses {f} -> {t}, which is not an edge")));
            }
            cycles.insert(name.clone(), set);
        }

        let def = ModelDefinition {
            name: doc.name.clone(),
            layer: doc.layer,
            nodes,
            edges,
            cycles,
            reconstructed: doc.reconstructed,
        };
        def.validate()?;
        Ok(def)
    }

    pub fn to_document(&self) -> ModelDocument {
        let labels = self
            .nodes
            .iter()
            .filter(|(n, c)| c.to_string() != **n)
            .map(|(n, c)| (n.clone(), c.to_string()))
            .collect();
        let pair = |(f, t): &Edge| [f.clone(), t.clone()];
        ModelDocument {
            name: self.name.clone(),
            layer: self.layer,
            reconstructed: self.reconstructed,
            labels,
            edges: self.edges.iter().map(pair).collect(),
            cycles: self
                .cycles
                .iter()
                .map(|(n, es)| (n.clone(), es.iter().map(pair).collect()))
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        ModelDefinition::from_document(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model documents always serialize")
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Parse(format!("{}: {e}", path.display())))?;
        ModelDefinition::from_json(&text)
    }

    /// Builds a definition whose node names are the event classes themselves.
    pub fn from_class_edges<I>(name: &str, layer: Layer, edges: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (EventClass, EventClass)>,
    {
        ModelDefinition::from_document(ModelDocument {
            name: name.to_string(),
            layer,
            reconstructed: false,
            labels: BTreeMap::new(),
            edges: edges.into_iter().map(|(f, t)| [f.to_string(), t.to_string()]).collect(),
            cycles: BTreeMap::new(),
        })
    }

    fn validate(&self) -> Result<(), ModelError> {
        let invalid = |m: &str| ModelError::Invalid(format!("{}: {m}", self.name));
        let start = EventClass::START_NAME;
        let end = EventClass::END_NAME;
        if !self.edges.iter().any(|(f, _)| f == start) {
            return Err(invalid("START has no outgoing edge"));
        }
        if !self.edges.iter().any(|(_, t)| t == end) {
            return Err(invalid("END has no incoming edge"));
        }
        if self.edges.iter().any(|(_, t)| t == start) {
            return Err(invalid("START cannot have incoming edges"));
        }
        if self.edges.iter().any(|(f, _)| f == end) {
            return Err(invalid("END cannot have outgoing edges"));
        }
        let forward = reach(&self.edges, start, false);
        let backward = reach(&self.edges, end, true);
        if let Some(n) = self.nodes.keys().find(|n| !forward.contains(*n)) {
            return Err(ModelError::Invalid(format!(
                "{}: node `{n}` is unreachable from START",
                self.name
            )));
        }
        if let Some(n) = self.nodes.keys().find(|n| !backward.contains(*n)) {
            return Err(ModelError::Invalid(format!(
                "{}: END is unreachable from node `{n}`",
                self.name
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    /// Whether the topology is a best-effort reading of a pictured model
    /// rather than an enumerated one.
    pub fn reconstructed(&self) -> bool {
        self.reconstructed
    }

    pub fn nodes(&self) -> &BTreeMap<String, EventClass> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn cycles(&self) -> &BTreeMap<String, BTreeSet<Edge>> {
        &self.cycles
    }

    pub fn class_of(&self, node: &str) -> Option<EventClass> {
        self.nodes.get(node).copied()
    }

    /// Edges projected onto the event classes of their endpoints.
    pub fn class_edges(&self) -> BTreeSet<(EventClass, EventClass)> {
        self.edges.iter().map(|(f, t)| (self.nodes[f], self.nodes[t])).collect()
    }

    /// Outgoing neighbours per node, sorted.
    pub fn successors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (f, t) in &self.edges {
            out.entry(f.as_str()).or_default().push(t.as_str());
        }
        out
    }

    /// The same topology with every label stripped to its core label.
    pub fn to_core(&self) -> ModelDefinition {
        ModelDefinition {
            layer: Layer::Core,
            nodes: self.nodes.iter().map(|(n, c)| (n.clone(), c.at_layer(Layer::Core))).collect(),
            ..self.clone()
        }
    }
}

fn reach(edges: &BTreeSet<Edge>, from: &str, reverse: bool) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([from.to_string()]);
    let mut queue = VecDeque::from([from.to_string()]);
    while let Some(n) = queue.pop_front() {
        for (f, t) in edges {
            let (src, dst) = if reverse { (t, f) } else { (f, t) };
            if *src == n && seen.insert(dst.clone()) {
                queue.push_back(dst.clone());
            }
        }
    }
    seen
}

/// The default QRFA model: the four cycles (question answering, query,
/// offer and answer refinement), A->R and its mirror F->Q, and termination
/// after A or F only.
pub fn builtin_qrfa() -> ModelDefinition {
    ModelDefinition::from_json(QRFA_JSON).expect("shipped QRFA model is valid")
}

/// A reconstruction of the COnversational Roles model over its 11 speech
/// acts, labelled at the fine layer.
pub fn builtin_cor() -> ModelDefinition {
    ModelDefinition::from_json(COR_JSON).expect("shipped COR model is valid")
}

/// Thresholds a mined graph into a model, pruning whatever is no longer on a
/// START-to-END path.
pub fn from_transition_graph(graph: &TransitionGraph, min_edge_freq: u64) -> Result<(ModelDefinition, PruneReport), ModelError> {
    if min_edge_freq == 0 {
        return Err(ModelError::InvalidParameter(
            "minimum edge frequency must be at least 1".into(),
        ));
    }
    let mut report = PruneReport::default();
    let mut edges = BTreeSet::new();
    for ((f, t), c) in graph.edges() {
        let e = (f.to_string(), t.to_string());
        if *c >= min_edge_freq {
            edges.insert(e);
        } else {
            report.below_threshold.push(e);
        }
    }
    let start = EventClass::START_NAME;
    let end = EventClass::END_NAME;
    let forward = reach(&edges, start, false);
    if !forward.contains(end) {
        return Err(ModelError::EndUnreachable);
    }
    let backward = reach(&edges, end, true);
    let keep = |n: &String| forward.contains(n) && backward.contains(n);

    let all_nodes: BTreeSet<&String> = edges.iter().flat_map(|(f, t)| [f, t]).collect();
    report.unreachable_nodes = all_nodes.into_iter().filter(|n| !keep(n)).cloned().collect();
    let (kept, dangling): (BTreeSet<Edge>, BTreeSet<Edge>) = edges.into_iter().partition(|(f, t)| keep(f) && keep(t));
    report.dangling_edges = dangling.into_iter().collect();

    let layer = if graph.nodes().iter().any(|c| c.label().is_some_and(|l| l.sub().is_some())) {
        Layer::Fine
    } else {
        Layer::Core
    };
    let def = ModelDefinition::from_document(ModelDocument {
        name: "discovered".into(),
        layer,
        reconstructed: false,
        labels: BTreeMap::new(),
        edges: kept.into_iter().map(|(f, t)| [f, t]).collect(),
        cycles: BTreeMap::new(),
    })?;
    Ok((def, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::directly_follows;
    use crate::label::{CoreLabel, CoreLabel::*, Speaker};
    use crate::log::{EventLog, Trace};

    fn has(def: &ModelDefinition, f: &str, t: &str) -> bool {
        def.edges().contains(&(f.to_string(), t.to_string()))
    }

    #[test]
    fn qrfa_default_edges() {
        let q = builtin_qrfa();
        assert_eq!(q.edges().len(), 13);
        assert_eq!(q.nodes().len(), 6);
        assert!(has(&q, "F", "Q") && has(&q, "A", "R"));
        assert!(!has(&q, "Q", "END") && !has(&q, "R", "END"));
        assert!(!has(&q, "Q", "Q") && !has(&q, "A", "A"));
        assert_eq!(q.cycles().len(), 4);
        assert!(q.reconstructed());
    }

    #[test]
    fn qrfa_role_symmetry() {
        // user -> agent edges mirror agent -> user edges under Q<->R, F<->A
        let q = builtin_qrfa();
        let swap = |c: CoreLabel| match c {
            Q => R,
            R => Q,
            F => A,
            A => F,
        };
        let classes = q.class_edges();
        let labelled: Vec<(CoreLabel, CoreLabel)> = classes
            .iter()
            .filter_map(|(f, t)| Some((f.label()?.core(), t.label()?.core())))
            .collect();
        let user_to_agent: BTreeSet<_> = labelled
            .iter()
            .filter(|(f, t)| f.speaker() == Speaker::User && t.speaker() == Speaker::Agent)
            .copied()
            .collect();
        let agent_to_user: BTreeSet<_> = labelled
            .iter()
            .filter(|(f, t)| f.speaker() == Speaker::Agent && t.speaker() == Speaker::User)
            .copied()
            .collect();
        assert_eq!(user_to_agent, [(Q, A), (Q, R), (F, A), (F, R)].into_iter().collect());
        let mirrored: BTreeSet<_> = user_to_agent.iter().map(|(f, t)| (swap(*f), swap(*t))).collect();
        assert_eq!(mirrored, agent_to_user);
    }

    #[test]
    fn cor_has_eleven_speech_acts() {
        let cor = builtin_cor();
        let acts: BTreeSet<&str> = cor
            .nodes()
            .keys()
            .map(String::as_str)
            .filter(|n| *n != "START" && *n != "END")
            .collect();
        assert_eq!(acts.len(), 11);
        // each act carries the label the COR mapping table assigns it
        let table = crate::ingest::MappingTable::builtin("cor").unwrap();
        fn source(n: &str) -> &str {
            match n {
                "withdraw_request" | "withdraw_offer" => "withdraw",
                "reject_offer" | "reject_request" => "reject",
                "be_contented" => "be contented",
                "be_discontented" => "be discontented",
                other => other,
            }
        }
        for act in acts {
            let label = cor.class_of(act).unwrap().label().unwrap();
            assert_eq!(table.lookup(label.speaker(), source(act)), Some(label), "{act}");
        }
    }

    #[test]
    fn json_round_trip() {
        for def in [builtin_qrfa(), builtin_cor()] {
            let back = ModelDefinition::from_json(&def.to_json()).unwrap();
            assert_eq!(back, def);
        }
    }

    #[test]
    fn validation_failures() {
        let bad = [
            r#"{"name":"x","layer":"core","edges":[["Q","END"]]}"#,
            r#"{"name":"x","layer":"core","edges":[["START","Q"]]}"#,
            r#"{"name":"x","layer":"core","edges":[["START","Q"],["Q","END"],["R","A"]]}"#,
            r#"{"name":"x","layer":"core","edges":[["START","Q"],["Q","END"],["Q","R"]]}"#,
            r#"{"name":"x","layer":"core","edges":[["START","Q:Prompt"],["Q:Prompt","END"]]}"#,
            r#"{"name":"x","layer":"core","edges":[["START","Q"],["Q","END"],["END","Q"]]}"#,
            r#"{"name":"x","layer":"core","edges":[["START","foo"],["foo","END"]]}"#,
            r#"{"name":"x","layer":"core","edges":[["START","Q"],["Q","END"]],"cycles":{"c":[["Q","Q"]]}}"#,
        ];
        for text in bad {
            assert!(ModelDefinition::from_json(text).is_err(), "{text}");
        }
        let chain = ModelDefinition::from_json(r#"{"name":"x","layer":"core","edges":[["START","Q"],["Q","END"]]}"#);
        assert!(chain.is_ok());
    }

    fn log(traces: &[&[CoreLabel]]) -> EventLog {
        let traces = traces
            .iter()
            .enumerate()
            .map(|(i, t)| Trace::new(format!("t{i}"), t.iter().map(|c| (*c).into()).collect()).unwrap())
            .collect();
        EventLog::new(traces, crate::label::Layer::Core).unwrap()
    }

    #[test]
    fn model_from_mined_graph() {
        let g = directly_follows(&log(&[&[Q, A]])).unwrap();
        let (def, report) = from_transition_graph(&g, 1).unwrap();
        let edges: Vec<_> = def.edges().iter().cloned().collect();
        assert_eq!(
            edges,
            [
                ("A".into(), "END".into()),
                ("Q".into(), "A".into()),
                ("START".into(), "Q".into())
            ]
        );
        assert_eq!(report, PruneReport::default());
    }

    #[test]
    fn rare_query_end_is_thresholded_away() {
        let mut traces: Vec<&[CoreLabel]> = vec![&[Q, A]; 9];
        traces.push(&[Q]);
        let g = directly_follows(&log(&traces)).unwrap();
        assert_eq!(g.frequency(Q.into(), EventClass::End), 1);
        let (def, report) = from_transition_graph(&g, 2).unwrap();
        assert!(!has(&def, "Q", "END"));
        assert_eq!(report.below_threshold, [("Q".to_string(), "END".to_string())]);
    }

    #[test]
    fn isolated_end_is_an_error() {
        let mut traces: Vec<&[CoreLabel]> = vec![&[Q, A, Q, A, Q, A]; 1];
        traces.push(&[Q, A]);
        let g = directly_follows(&log(&traces)).unwrap();
        // A->END occurs twice, START->Q twice, Q->A four times
        assert_eq!(from_transition_graph(&g, 3).unwrap_err(), ModelError::EndUnreachable);
    }

    #[test]
    fn pruning_reports_dead_ends() {
        let g = TransitionGraph::from_edges(
            [
                (EventClass::Start, Q.into(), 5),
                (Q.into(), A.into(), 5),
                (A.into(), EventClass::End, 5),
                (Q.into(), R.into(), 5),
                (R.into(), F.into(), 1),
            ],
            5,
        );
        let (def, report) = from_transition_graph(&g, 2).unwrap();
        assert_eq!(def.edges().len(), 3);
        assert_eq!(report.unreachable_nodes, ["R"]);
        assert_eq!(report.dangling_edges, [("Q".to_string(), "R".to_string())]);
    }

    #[test]
    fn core_projection_keeps_topology() {
        let cor = builtin_cor().to_core();
        assert_eq!(cor.layer(), Layer::Core);
        assert_eq!(cor.class_of("withdraw_offer").unwrap().to_string(), "R");
        assert_eq!(cor.edges().len(), builtin_cor().edges().len());
    }
}
