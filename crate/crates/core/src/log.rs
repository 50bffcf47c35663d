//! Conversations and the event logs they reduce to.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::LogError;
use crate::label::{EventClass, Label, Layer, Speaker};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: Speaker,
    pub text: Option<String>,
    /// Non-empty, in annotation order.
    pub labels: Vec<Label>,
}

impl Utterance {
    /// Labels whose role disagrees with the speaker.
    pub fn side_mismatches(&self) -> impl Iterator<Item = &Label> + '_ {
        self.labels.iter().filter(move |l| l.speaker() != self.speaker)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub id: String,
    pub utterances: Vec<Utterance>,
    pub gold_success: Option<bool>,
}

/// How utterances with several labels become events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultilabelPolicy {
    /// One event per label, in annotation order.
    #[default]
    Expand,
    /// Only the first label.
    First,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReduceOptions {
    pub layer: Layer,
    pub policy: MultilabelPolicy,
    /// Collapse repeated labels within one utterance (after layer stripping).
    pub dedup: bool,
}

/// A conversation reduced to its sequence of event classes. START and END
/// are implicit and never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trace {
    pub conversation_id: String,
    events: Vec<EventClass>,
}

impl Trace {
    pub fn new(conversation_id: impl Into<String>, events: Vec<EventClass>) -> Result<Self, LogError> {
        let conversation_id = conversation_id.into();
        if events.is_empty() {
            return Err(LogError::EmptyTrace(conversation_id));
        }
        if let Some(marker) = events.iter().find(|e| e.is_marker()) {
            return Err(LogError::LayerMismatch {
                id: conversation_id,
                label: marker.to_string(),
                layer: Layer::Fine,
            });
        }
        Ok(Trace { conversation_id, events })
    }

    /// Builds a trace from labels.
    pub fn from_labels<I>(conversation_id: impl Into<String>, labels: I) -> Result<Self, LogError>
    where
        I: IntoIterator,
        I::Item: Into<Label>,
    {
        Trace::new(
            conversation_id,
            labels.into_iter().map(|l| EventClass::Label(l.into())).collect(),
        )
    }

    pub fn events(&self) -> &[EventClass] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog {
    traces: Vec<Trace>,
    layer: Layer,
}

impl EventLog {
    pub fn new(traces: Vec<Trace>, layer: Layer) -> Result<Self, LogError> {
        for t in &traces {
            for e in t.events() {
                if let EventClass::Label(l) = e {
                    if !layer.admits(l) {
                        return Err(LogError::LayerMismatch {
                            id: t.conversation_id.clone(),
                            label: l.to_string(),
                            layer,
                        });
                    }
                }
            }
        }
        Ok(EventLog { traces, layer })
    }

    pub fn empty(layer: Layer) -> Self {
        EventLog {
            traces: Vec::new(),
            layer,
        }
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    /// Strips every event to the core layer.
    pub fn to_core(&self) -> EventLog {
        let traces = self
            .traces
            .iter()
            .map(|t| Trace {
                conversation_id: t.conversation_id.clone(),
                events: t.events.iter().map(|e| e.at_layer(Layer::Core)).collect(),
            })
            .collect();
        EventLog {
            traces,
            layer: Layer::Core,
        }
    }

    /// Distinct event classes, sorted.
    pub fn alphabet(&self) -> BTreeSet<EventClass> {
        self.traces.iter().flat_map(|t| t.events.iter().copied()).collect()
    }
}

/// Reduces conversations to an event log: one trace per conversation, one
/// event per label.
pub fn reduce_to_log(conversations: &[Conversation], layer: Layer, policy: MultilabelPolicy) -> EventLog {
    reduce_to_log_with(
        conversations,
        ReduceOptions {
            layer,
            policy,
            dedup: false,
        },
    )
}

pub fn reduce_to_log_with(conversations: &[Conversation], opts: ReduceOptions) -> EventLog {
    let traces = normalize_conversations(conversations, opts)
        .into_iter()
        .filter_map(|c| {
            let events: Vec<EventClass> = c
                .utterances
                .iter()
                .flat_map(|u| u.labels.iter().copied().map(EventClass::Label))
                .collect();
            // conversations are non-empty by construction; skip defensively
            (!events.is_empty()).then_some(Trace {
                conversation_id: c.id,
                events,
            })
        })
        .collect();
    EventLog {
        traces,
        layer: opts.layer,
    }
}

/// Applies layer stripping, the multi-label policy and optional
/// deduplication to every utterance, keeping the conversation structure.
/// Reducing the result with `Expand` yields the same log as reducing the
/// input with `opts`.
pub fn normalize_conversations(conversations: &[Conversation], opts: ReduceOptions) -> Vec<Conversation> {
    conversations
        .iter()
        .map(|c| Conversation {
            id: c.id.clone(),
            gold_success: c.gold_success,
            utterances: c
                .utterances
                .iter()
                .map(|u| {
                    let mut labels: Vec<Label> = match opts.policy {
                        MultilabelPolicy::Expand => u.labels.iter().map(|l| l.at_layer(opts.layer)).collect(),
                        MultilabelPolicy::First => u.labels.first().map(|l| l.at_layer(opts.layer)).into_iter().collect(),
                    };
                    if opts.dedup {
                        let mut seen = BTreeSet::new();
                        labels.retain(|l| seen.insert(*l));
                    }
                    Utterance {
                        speaker: u.speaker,
                        text: u.text.clone(),
                        labels,
                    }
                })
                .collect(),
        })
        .collect()
}

/// Gold success annotations carried by the conversations themselves.
pub fn gold_annotations(conversations: &[Conversation]) -> BTreeMap<String, bool> {
    conversations
        .iter()
        .filter_map(|c| c.gold_success.map(|s| (c.id.clone(), s)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogStatistics {
    pub dialogues: usize,
    pub utterances: usize,
    pub distinct_labels: usize,
}

pub fn log_statistics(log: &EventLog) -> LogStatistics {
    LogStatistics {
        dialogues: log.len(),
        utterances: log.event_count(),
        distinct_labels: log.alphabet().len(),
    }
}
