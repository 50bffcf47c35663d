//! Labelled Petri nets and their reachability graphs.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{ConformanceError, ModelError};
use crate::label::EventClass;
use crate::model::ModelDefinition;

pub type PlaceId = usize;
pub type TransitionId = usize;

/// Token count per place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Marking(Vec<u32>);

impl Marking {
    pub fn empty(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn single(places: usize, place: PlaceId) -> Self {
        let mut m = Marking::empty(places);
        m.0[place] = 1;
        m
    }

    pub fn tokens(&self, place: PlaceId) -> u32 {
        self.0[place]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub name: String,
    /// `None` for invisible transitions.
    pub label: Option<EventClass>,
    pub inputs: Vec<(PlaceId, u32)>,
    pub outputs: Vec<(PlaceId, u32)>,
}

impl Transition {
    pub fn is_visible(&self) -> bool {
        self.label.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProcessNet {
    name: String,
    places: Vec<String>,
    transitions: Vec<Transition>,
    initial_marking: Marking,
    final_marking: Marking,
}

impl ProcessNet {
    pub fn new(
        name: impl Into<String>,
        places: Vec<String>,
        transitions: Vec<Transition>,
        initial_marking: Marking,
        final_marking: Marking,
    ) -> Result<Self, ModelError> {
        let n = places.len();
        for t in &transitions {
            if let Some((p, _)) = t.inputs.iter().chain(&t.outputs).find(|(p, _)| *p >= n) {
                return Err(ModelError::Invalid(format!(
                    "transition `{}` references missing place {p}",
                    t.name
                )));
            }
            if t.label.is_some_and(|l| l.is_marker()) {
                return Err(ModelError::Invalid(format!(
                    "transition `{}` cannot be labelled START/END",
                    t.name
                )));
            }
        }
        if initial_marking.0.len() != n || final_marking.0.len() != n {
            return Err(ModelError::Invalid("marking size differs from place count".into()));
        }
        Ok(ProcessNet {
            name: name.into(),
            places,
            transitions,
            initial_marking,
            final_marking,
        })
    }

    /// One place per node; each edge becomes a transition that moves the
    /// token from its source to its target place. Edges into END are
    /// invisible, every other edge is labelled with its target's class.
    pub fn from_definition(def: &ModelDefinition) -> ProcessNet {
        let places: Vec<String> = def.nodes().keys().cloned().collect();
        let index: HashMap<&str, PlaceId> = places.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
        let transitions = def
            .edges()
            .iter()
            .map(|(f, t)| {
                let target = def.class_of(t).expect("edge endpoints are nodes");
                Transition {
                    name: format!("{f}->{t}"),
                    label: (target != EventClass::End).then_some(target),
                    inputs: vec![(index[f.as_str()], 1)],
                    outputs: vec![(index[t.as_str()], 1)],
                }
            })
            .collect();
        let n = places.len();
        ProcessNet {
            name: def.name().to_string(),
            initial_marking: Marking::single(n, index[EventClass::START_NAME]),
            final_marking: Marking::single(n, index[EventClass::END_NAME]),
            places,
            transitions,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial_marking
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    pub fn visible_count(&self) -> usize {
        self.transitions.iter().filter(|t| t.is_visible()).count()
    }

    pub fn invisible_count(&self) -> usize {
        self.transitions.len() - self.visible_count()
    }

    /// Every transition has one input and one output arc of weight one, and
    /// both markings hold a single token.
    pub fn is_state_machine(&self) -> bool {
        self.transitions
            .iter()
            .all(|t| t.inputs.len() == 1 && t.outputs.len() == 1 && t.inputs[0].1 == 1 && t.outputs[0].1 == 1)
            && self.initial_marking.total() == 1
            && self.final_marking.total() == 1
    }

    pub fn is_enabled(&self, marking: &Marking, t: TransitionId) -> bool {
        self.transitions[t].inputs.iter().all(|(p, w)| marking.0[*p] >= *w)
    }

    pub fn fire(&self, marking: &Marking, t: TransitionId) -> Option<Marking> {
        if !self.is_enabled(marking, t) {
            return None;
        }
        let mut next = marking.clone();
        let tr = &self.transitions[t];
        for (p, w) in &tr.inputs {
            next.0[*p] -= w;
        }
        for (p, w) in &tr.outputs {
            next.0[*p] += w;
        }
        Some(next)
    }

    /// Explores all markings reachable from the initial one, up to `limit`.
    pub fn reachability(&self, limit: usize) -> Result<ReachabilityGraph, ConformanceError> {
        let mut markings = vec![self.initial_marking.clone()];
        let mut index = HashMap::from([(self.initial_marking.clone(), 0usize)]);
        let mut successors: Vec<Vec<(TransitionId, usize)>> = vec![Vec::new()];
        let mut queue = VecDeque::from([0usize]);
        while let Some(m) = queue.pop_front() {
            for t in 0..self.transitions.len() {
                let Some(next) = self.fire(&markings[m], t) else { continue };
                let id = match index.get(&next) {
                    Some(id) => *id,
                    None => {
                        if markings.len() >= limit {
                            return Err(ConformanceError::StateSpaceTooLarge(limit));
                        }
                        let id = markings.len();
                        index.insert(next.clone(), id);
                        markings.push(next);
                        successors.push(Vec::new());
                        queue.push_back(id);
                        id
                    }
                };
                successors[m].push((t, id));
            }
        }
        let final_id = index.get(&self.final_marking).copied();
        let mut predecessors = vec![Vec::new(); markings.len()];
        for (m, succ) in successors.iter().enumerate() {
            for &(t, n) in succ {
                predecessors[n].push((t, m));
            }
        }
        Ok(ReachabilityGraph {
            markings,
            successors,
            predecessors,
            initial: 0,
            final_marking: final_id,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ReachabilityGraph {
    pub markings: Vec<Marking>,
    /// (transition, target marking) per marking, in transition order.
    pub successors: Vec<Vec<(TransitionId, usize)>>,
    /// (transition, source marking) per marking.
    pub predecessors: Vec<Vec<(TransitionId, usize)>>,
    pub initial: usize,
    pub final_marking: Option<usize>,
}

impl ReachabilityGraph {
    pub fn len(&self) -> usize {
        self.markings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markings.is_empty()
    }
}
