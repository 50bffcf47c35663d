//! Eventual-succession counts with distance statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::DiscoveryError;
use crate::label::EventClass;
use crate::log::EventLog;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccessionPair {
    /// Number of index pairs i < j with the first label at i and the second at j.
    pub count: u64,
    /// Histogram of j - i over those pairs.
    pub distances: BTreeMap<usize, u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelOccurrences {
    pub total: u64,
    pub traces_containing: u64,
    /// occurrences within one trace -> number of traces (traces without the label are omitted)
    pub per_trace: BTreeMap<u64, u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SuccessionDoc")]
pub struct SuccessionStats {
    pub pairs: BTreeMap<(EventClass, EventClass), SuccessionPair>,
    pub occurrences: BTreeMap<EventClass, LabelOccurrences>,
    pub trace_count: u64,
}

#[derive(Serialize)]
struct SuccessionDoc {
    trace_count: u64,
    occurrences: BTreeMap<EventClass, LabelOccurrences>,
    pairs: Vec<PairDoc>,
}

#[derive(Serialize)]
struct PairDoc {
    from: EventClass,
    to: EventClass,
    count: u64,
    distances: BTreeMap<usize, u64>,
}

impl From<SuccessionStats> for SuccessionDoc {
    fn from(s: SuccessionStats) -> Self {
        SuccessionDoc {
            trace_count: s.trace_count,
            occurrences: s.occurrences,
            pairs: s
                .pairs
                .into_iter()
                .map(|((from, to), p)| PairDoc {
                    from,
                    to,
                    count: p.count,
                    distances: p.distances,
                })
                .collect(),
        }
    }
}

impl SuccessionStats {
    pub fn pair(&self, first: EventClass, second: EventClass) -> Option<&SuccessionPair> {
        self.pairs.get(&(first, second))
    }
}

/// One pass per trace: each event is paired with the positions already seen
/// for every label, so the work is proportional to the number of pairs.
pub fn mine_succession(log: &EventLog) -> Result<SuccessionStats, DiscoveryError> {
    if log.is_empty() {
        return Err(DiscoveryError::EmptyLog);
    }
    let mut stats = SuccessionStats {
        trace_count: log.len() as u64,
        ..Default::default()
    };
    for trace in log.traces() {
        let mut seen: BTreeMap<EventClass, Vec<usize>> = BTreeMap::new();
        for (j, &current) in trace.events().iter().enumerate() {
            for (&earlier, positions) in &seen {
                let pair = stats.pairs.entry((earlier, current)).or_default();
                pair.count += positions.len() as u64;
                for &i in positions {
                    *pair.distances.entry(j - i).or_default() += 1;
                }
            }
            seen.entry(current).or_default().push(j);
        }
        for (label, positions) in seen {
            let occ = stats.occurrences.entry(label).or_default();
            let n = positions.len() as u64;
            occ.total += n;
            occ.traces_containing += 1;
            *occ.per_trace.entry(n).or_default() += 1;
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{CoreLabel, CoreLabel::*, Layer};
    use crate::log::Trace;

    fn one(trace: &[CoreLabel]) -> SuccessionStats {
        let t = Trace::new("t", trace.iter().map(|c| (*c).into()).collect()).unwrap();
        mine_succession(&EventLog::new(vec![t], Layer::Core).unwrap()).unwrap()
    }

    fn check(s: &SuccessionStats, a: CoreLabel, b: CoreLabel, count: u64, dists: &[(usize, u64)]) {
        let p = s.pair(a.into(), b.into()).unwrap_or_else(|| panic!("missing {a}->{b}"));
        assert_eq!(p.count, count);
        assert_eq!(p.distances, dists.iter().copied().collect());
    }

    #[test]
    fn three_distinct() {
        let s = one(&[Q, R, F]);
        assert_eq!(s.pairs.len(), 3);
        check(&s, Q, R, 1, &[(1, 1)]);
        check(&s, Q, F, 1, &[(2, 1)]);
        check(&s, R, F, 1, &[(1, 1)]);
    }

    #[test]
    fn repeated_label() {
        let s = one(&[Q, A, Q]);
        assert_eq!(s.pairs.len(), 3);
        check(&s, Q, A, 1, &[(1, 1)]);
        check(&s, A, Q, 1, &[(1, 1)]);
        check(&s, Q, Q, 1, &[(2, 1)]);
        let q = &s.occurrences[&Q.into()];
        assert_eq!((q.total, q.traces_containing), (2, 1));
        assert_eq!(q.per_trace, [(2, 1)].into_iter().collect());
    }

    #[test]
    fn empty_log() {
        assert_eq!(mine_succession(&EventLog::empty(Layer::Core)), Err(DiscoveryError::EmptyLog));
    }
}
