//! Brute-force reference implementations, deliberately sharing no code with
//! the algorithms they check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use convmine::conformance::CostFunction;
use convmine::log::{EventLog, Trace};
use convmine::model::{Marking, ModelDefinition, ModelDocument, ProcessNet};
use convmine::{CoreLabel, EventClass, Label, Layer};
use rand::seq::IndexedRandom;
use rand::Rng;

// ---------------------------------------------------------------- alignment

/// Cheapest alignment cost found by enumerating every model run whose cost
/// can still beat the best one so far. For each run prefix the search keeps
/// an edit-distance row: `row[j]` is the cheapest way to explain the first
/// `j` trace events with the prefix, using only log moves, model moves and
/// label-equal synchronous moves.
pub fn alignment_cost(trace: &[EventClass], net: &ProcessNet, cost: &CostFunction) -> Option<u64> {
    let lc = cost.log_only as u64;
    let mc = cost.visible_model_only as u64;
    let n = trace.len();
    let row: Vec<u64> = (0..=n as u64).map(|j| j * lc).collect();
    // exclusive bound: all log moves plus a run firing each transition at
    // most once, which exists whenever the final marking is reachable in a
    // state machine or a once-through net
    let bound = n as u64 * lc + net.transitions().len() as u64 * mc + 1;
    let mut s = Search {
        net,
        trace,
        lc,
        mc,
        best: bound,
        found: false,
    };
    s.dfs(net.initial_marking().clone(), row, 0);
    s.found.then_some(s.best)
}

struct Search<'a> {
    net: &'a ProcessNet,
    trace: &'a [EventClass],
    lc: u64,
    mc: u64,
    best: u64,
    found: bool,
}

impl Search<'_> {
    fn dfs(&mut self, marking: Marking, row: Vec<u64>, silent_run: usize) {
        if &marking == self.net.final_marking() {
            let c = row[self.trace.len()];
            if c < self.best {
                self.best = c;
                self.found = true;
            }
        }
        for (t, tr) in self.net.transitions().iter().enumerate() {
            let Some(next) = self.net.fire(&marking, t) else { continue };
            let (next_row, silent) = match tr.label {
                None => {
                    // invisible moves are free; cap chains of them to stay finite
                    if silent_run >= self.net.transitions().len() {
                        continue;
                    }
                    (row.clone(), silent_run + 1)
                }
                Some(label) => {
                    let mut r = vec![row[0] + self.mc];
                    for j in 1..row.len() {
                        let mut v = row[j] + self.mc;
                        if self.trace[j - 1] == label {
                            v = v.min(row[j - 1]);
                        }
                        v = v.min(r[j - 1] + self.lc);
                        r.push(v);
                    }
                    (r, 0)
                }
            };
            // row minima never decrease along a run, so this prefix cannot win
            if *next_row.iter().min().unwrap() >= self.best {
                continue;
            }
            self.dfs(next, next_row, silent);
        }
    }
}

/// True iff `events` is the label sequence of some START-to-END walk
/// through the model graph.
pub fn replays(def: &ModelDefinition, events: &[EventClass]) -> bool {
    let mut current: BTreeSet<&str> = BTreeSet::from([EventClass::START_NAME]);
    for e in events {
        current = def
            .edges()
            .iter()
            .filter(|(f, t)| current.contains(f.as_str()) && def.class_of(t) == Some(*e))
            .map(|(_, t)| t.as_str())
            .collect();
        if current.is_empty() {
            return false;
        }
    }
    def.edges()
        .iter()
        .any(|(f, t)| current.contains(f.as_str()) && t == EventClass::END_NAME)
}

// ---------------------------------------------------------------- discovery

pub fn directly_follows(log: &EventLog) -> BTreeMap<(EventClass, EventClass), u64> {
    let mut out = BTreeMap::new();
    for t in log.traces() {
        let mut seq = vec![EventClass::Start];
        seq.extend_from_slice(t.events());
        seq.push(EventClass::End);
        for i in 0..seq.len() - 1 {
            *out.entry((seq[i], seq[i + 1])).or_insert(0) += 1;
        }
    }
    out
}

/// (count, distance histogram) for every ordered pair i < j.
pub fn succession(log: &EventLog) -> BTreeMap<(EventClass, EventClass), (u64, BTreeMap<usize, u64>)> {
    let mut out: BTreeMap<_, (u64, BTreeMap<usize, u64>)> = BTreeMap::new();
    for t in log.traces() {
        let e = t.events();
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                let entry = out.entry((e[i], e[j])).or_default();
                entry.0 += 1;
                *entry.1.entry(j - i).or_insert(0) += 1;
            }
        }
    }
    out
}

fn contains_window(events: &[EventClass], seq: &[EventClass]) -> bool {
    (0..events.len()).any(|start| start + seq.len() <= events.len() && (0..seq.len()).all(|k| events[start + k] == seq[k]))
}

/// Trace support of every sequence over the log alphabet of length
/// 2..=`max_len`, keeping those with support at least `min_support`,
/// sorted by descending support then sequence.
pub fn episodes(log: &EventLog, max_len: usize, min_support: u64) -> Vec<(Vec<EventClass>, u64)> {
    let alphabet: Vec<EventClass> = log
        .traces()
        .iter()
        .flat_map(|t| t.events().iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut candidates: Vec<Vec<EventClass>> = vec![vec![]];
    let mut out = Vec::new();
    for _ in 0..max_len {
        candidates = candidates
            .iter()
            .flat_map(|c| {
                alphabet.iter().map(move |a| {
                    let mut c = c.clone();
                    c.push(*a);
                    c
                })
            })
            .collect();
        if candidates[0].len() < 2 {
            continue;
        }
        for c in &candidates {
            let support = log.traces().iter().filter(|t| contains_window(t.events(), c)).count() as u64;
            if support >= min_support {
                out.push((c.clone(), support));
            }
        }
    }
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

// ---------------------------------------------------------------- generators

pub const CORE: [CoreLabel; 4] = [CoreLabel::Q, CoreLabel::R, CoreLabel::F, CoreLabel::A];

/// Two labels no core-layer net can fire.
pub fn foreign_labels() -> [EventClass; 2] {
    ["Q:Information".parse().unwrap(), "A:Results".parse().unwrap()]
}

pub fn random_trace(rng: &mut impl Rng, alphabet: &[EventClass], min_len: usize, max_len: usize) -> Vec<EventClass> {
    let len = rng.random_range(min_len..=max_len);
    (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

pub fn random_log(rng: &mut impl Rng, traces: usize, max_len: usize) -> EventLog {
    let alphabet: Vec<EventClass> = CORE.iter().map(|c| (*c).into()).collect();
    let traces = (0..traces)
        .map(|i| Trace::new(format!("t{i:03}"), random_trace(rng, &alphabet, 1, max_len)).unwrap())
        .collect();
    EventLog::new(traces, Layer::Core).unwrap()
}

/// A random valid model over 2..=5 named nodes with core labels (repeats
/// allowed) and at most `max_edges` edges.
pub fn random_model(rng: &mut impl Rng, max_edges: usize) -> ModelDefinition {
    loop {
        let k = rng.random_range(2..=5);
        let names: Vec<String> = (0..k).map(|i| format!("n{i}")).collect();
        let labels: BTreeMap<String, String> = names
            .iter()
            .map(|n| (n.clone(), CORE.choose(rng).unwrap().to_string()))
            .collect();
        let mut edges = BTreeSet::new();
        edges.insert(["START".to_string(), names[0].clone()]);
        edges.insert([names[k - 1].clone(), "END".to_string()]);
        let target = rng.random_range(k + 1..=max_edges);
        let mut from: Vec<String> = names.clone();
        from.push("START".into());
        let mut to: Vec<String> = names.clone();
        to.push("END".into());
        for _ in 0..target * 3 {
            if edges.len() >= target {
                break;
            }
            let (f, t) = (from.choose(rng).unwrap(), to.choose(rng).unwrap());
            // a START -> END edge would allow empty conversations
            if !(f == "START" && t == "END") {
                edges.insert([f.clone(), t.clone()]);
            }
        }
        let doc = ModelDocument {
            name: "random".into(),
            layer: Layer::Core,
            reconstructed: false,
            labels,
            edges: edges.into_iter().collect(),
            cycles: BTreeMap::new(),
        };
        if let Ok(def) = ModelDefinition::from_document(doc) {
            if def.edges().len() <= max_edges {
                return def;
            }
        }
    }
}

pub fn label(s: &str) -> Label {
    s.parse().unwrap()
}
