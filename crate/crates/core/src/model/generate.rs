//! Random walks through a model definition.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;
use crate::label::EventClass;
use crate::log::{EventLog, Trace};
use crate::model::ModelDefinition;

/// Generates `n` traces by uniform random walks from START to END. Once a
/// walk has emitted `max_len` events it only follows edges that lie on a
/// shortest path to END, so every walk terminates inside the model.
pub fn generate_traces(def: &ModelDefinition, n: usize, max_len: usize, seed: u64) -> Result<EventLog, ModelError> {
    if n == 0 || max_len == 0 {
        return Err(ModelError::InvalidParameter(
            "trace count and max length must be at least 1".into(),
        ));
    }
    let succ = def.successors();
    let dist = distance_to_end(def);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n.to_string().len();

    let mut traces = Vec::with_capacity(n);
    for i in 0..n {
        let mut events = Vec::new();
        let mut node = EventClass::START_NAME;
        loop {
            let options: Vec<&str> = if events.len() >= max_len {
                let here = dist[node];
                succ[node].iter().copied().filter(|s| dist[s] + 1 == here).collect()
            } else {
                succ[node].clone()
            };
            let next = options[rng.random_range(0..options.len())];
            if next == EventClass::END_NAME {
                break;
            }
            events.push(def.class_of(next).expect("edge endpoints are nodes"));
            node = next;
        }
        let trace = Trace::new(format!("gen-{i:0width$}"), events)
            .map_err(|e| ModelError::Invalid(format!("generated an invalid trace: {e}")))?;
        traces.push(trace);
    }
    EventLog::new(traces, def.layer()).map_err(|e| ModelError::Invalid(e.to_string()))
}

/// BFS distance (in edges) from every node to END.
fn distance_to_end(def: &ModelDefinition) -> BTreeMap<&str, usize> {
    let mut pred: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (f, t) in def.edges() {
        pred.entry(t.as_str()).or_default().push(f.as_str());
    }
    let mut dist = BTreeMap::from([(EventClass::END_NAME, 0usize)]);
    let mut queue = VecDeque::from([EventClass::END_NAME]);
    while let Some(n) = queue.pop_front() {
        let d = dist[n];
        for &p in pred.get(n).into_iter().flatten() {
            if !dist.contains_key(p) {
                dist.insert(p, d + 1);
                queue.push_back(p);
            }
        }
    }
    dist
}
