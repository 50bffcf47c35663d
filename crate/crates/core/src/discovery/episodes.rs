//! Frequent contiguous label sequences.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::DiscoveryError;
use crate::label::EventClass;
use crate::log::EventLog;

pub const DEFAULT_MAX_EPISODE_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportMode {
    /// Number of traces containing the sequence at least once.
    #[default]
    Trace,
    /// Number of occurrences over all traces.
    Occurrence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodePattern {
    pub sequence: Vec<EventClass>,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeOptions {
    pub max_len: usize,
    pub min_support: u64,
    pub mode: SupportMode,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        EpisodeOptions {
            max_len: DEFAULT_MAX_EPISODE_LEN,
            min_support: 1,
            mode: SupportMode::Trace,
        }
    }
}

/// Contiguous subsequences of length 2..=`max_len` with trace support of at
/// least `min_support`, by descending support then sequence.
pub fn mine_episodes(log: &EventLog, max_len: usize, min_support: u64) -> Result<Vec<EpisodePattern>, DiscoveryError> {
    mine_episodes_with(
        log,
        EpisodeOptions {
            max_len,
            min_support,
            mode: SupportMode::Trace,
        },
    )
}

pub fn mine_episodes_with(log: &EventLog, opts: EpisodeOptions) -> Result<Vec<EpisodePattern>, DiscoveryError> {
    if opts.max_len < 2 {
        return Err(DiscoveryError::InvalidParameter(format!(
            "episode length must be at least 2, got {}",
            opts.max_len
        )));
    }
    if opts.min_support == 0 {
        return Err(DiscoveryError::InvalidParameter("minimum support must be at least 1".into()));
    }
    if log.is_empty() {
        return Err(DiscoveryError::EmptyLog);
    }

    let mut support: BTreeMap<&[EventClass], u64> = BTreeMap::new();
    for trace in log.traces() {
        let events = trace.events();
        let mut in_trace: HashSet<&[EventClass]> = HashSet::new();
        for len in 2..=opts.max_len.min(events.len()) {
            for window in events.windows(len) {
                match opts.mode {
                    SupportMode::Trace => {
                        if in_trace.insert(window) {
                            *support.entry(window).or_default() += 1;
                        }
                    }
                    SupportMode::Occurrence => *support.entry(window).or_default() += 1,
                }
            }
        }
    }

    let mut patterns: Vec<EpisodePattern> = support
        .into_iter()
        .filter(|(_, s)| *s >= opts.min_support)
        .map(|(seq, s)| EpisodePattern {
            sequence: seq.to_vec(),
            support: s,
        })
        .collect();
    patterns.sort_by(|a, b| b.support.cmp(&a.support).then_with(|| a.sequence.cmp(&b.sequence)));
    Ok(patterns)
}
