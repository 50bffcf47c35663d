//! Mapping tables from dataset-specific annotation schemes onto QRFA labels.
//!
//! A source label may be qualified with the speaker (`user:withdraw`,
//! `agent:withdraw`) when the same string means different things for the
//! two roles. Lookup tries the qualified key first, then the bare label.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::IngestError;
use crate::ingest::transcript::RawConversation;
use crate::label::{CoreLabel, Label, Speaker, SubLabel};
use crate::log::{Conversation, Utterance};

/// What to do with a source label that has no entry in the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnmappedPolicy {
    #[default]
    Error,
    DropEvent,
    DropTrace,
}

impl FromStr for UnmappedPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(UnmappedPolicy::Error),
            "drop_event" => Ok(UnmappedPolicy::DropEvent),
            "drop_trace" => Ok(UnmappedPolicy::DropTrace),
            other => Err(format!(
                "unknown unmapped policy `{other}` (expected error, drop_event or drop_trace)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingTable {
    pub scheme_name: String,
    entries: BTreeMap<String, Label>,
    pub unmapped_policy: UnmappedPolicy,
}

const BUILTINS: &[(&str, &str)] = &[
    ("cor", include_str!("../../data/mappings/cor.csv")),
    ("dstc1", include_str!("../../data/mappings/dstc1.csv")),
    ("dstc2", include_str!("../../data/mappings/dstc2.csv")),
    ("ode", include_str!("../../data/mappings/ode.csv")),
    ("qrfa", include_str!("../../data/mappings/qrfa.csv")),
    ("scs", include_str!("../../data/mappings/scs.csv")),
];

impl MappingTable {
    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTINS.iter().map(|(n, _)| *n)
    }

    /// Loads a shipped table. `qrfa` maps QRFA label strings onto themselves
    /// and is used to re-read normalized transcripts.
    pub fn builtin(name: &str) -> Result<Self, IngestError> {
        let (_, text) = BUILTINS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| IngestError::UnknownBuiltin(name.to_string()))?;
        MappingTable::from_csv_str(name, text)
    }

    pub fn from_csv_str(scheme_name: &str, text: &str) -> Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| IngestError::Mapping {
            row: 1,
            message: e.to_string(),
        })?;
        let cols: Vec<&str> = headers.iter().collect();
        if cols.len() < 2 || cols[0] != "source_label" || cols[1] != "core" || cols.get(2).is_some_and(|c| *c != "sub") {
            return Err(IngestError::Mapping {
                row: 1,
                message: format!("expected header `source_label,core,sub`, found `{}`", cols.join(",")),
            });
        }

        let mut entries = BTreeMap::new();
        for record in rdr.records() {
            let record = record.map_err(|e| IngestError::Mapping {
                row: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let row = record.position().map_or(0, |p| p.line() as usize);
            let err = |message: String| IngestError::Mapping { row, message };

            let source = record.get(0).unwrap_or("").to_string();
            if source.is_empty() {
                return Err(err("empty source label".into()));
            }
            let core: CoreLabel = record
                .get(1)
                .unwrap_or("")
                .parse()
                .map_err(|e| err(format!("`{source}`: {e}")))?;
            let sub = match record.get(2).unwrap_or("") {
                "" => None,
                s => Some(s.parse::<SubLabel>().map_err(|e| err(format!("`{source}`: {e}")))?),
            };
            let label = Label::new(core, sub).map_err(|e| err(format!("`{source}`: {e}")))?;
            if let Some((speaker, _)) = split_qualified(&source) {
                if speaker != label.speaker() {
                    return Err(err(format!("`{source}` is qualified for the {speaker} but maps to {label}")));
                }
            }
            if entries.insert(source.clone(), label).is_some() {
                return Err(err(format!("duplicate source label `{source}`")));
            }
        }
        Ok(MappingTable {
            scheme_name: scheme_name.to_string(),
            entries,
            unmapped_policy: UnmappedPolicy::default(),
        })
    }

    pub fn with_policy(mut self, policy: UnmappedPolicy) -> Self {
        self.unmapped_policy = policy;
        self
    }

    pub fn entries(&self) -> &BTreeMap<String, Label> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact, case-sensitive match after trimming.
    pub fn lookup(&self, speaker: Speaker, source_label: &str) -> Option<Label> {
        let key = source_label.trim();
        self.entries
            .get(&format!("{speaker}:{key}"))
            .or_else(|| self.entries.get(key))
            .copied()
    }
}

fn split_qualified(source: &str) -> Option<(Speaker, &str)> {
    let (prefix, rest) = source.split_once(':')?;
    let speaker = prefix.parse().ok()?;
    Some((speaker, rest))
}

/// Reads a mapping CSV; the scheme name is the file stem.
pub fn parse_mapping(path: &Path) -> Result<MappingTable, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    MappingTable::from_csv_str(&name, &text)
}

/// One occurrence of a source label the table does not cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnmappedReport {
    pub source_label: String,
    pub conversation_id: String,
    /// Utterance index within the conversation.
    pub utterance: usize,
    /// Label index within the utterance.
    pub position: usize,
}

/// A mapped label whose role disagrees with the utterance speaker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideWarning {
    pub conversation_id: String,
    pub utterance: usize,
    pub speaker: Speaker,
    pub label: Label,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingOutcome {
    pub conversations: Vec<Conversation>,
    pub unmapped: Vec<UnmappedReport>,
    /// (conversation id, utterance index) of utterances that lost every label.
    pub dropped_utterances: Vec<(String, usize)>,
    pub dropped_conversations: Vec<String>,
    pub side_warnings: Vec<SideWarning>,
}

/// Replaces every source label by its QRFA label.
pub fn apply_mapping(raw: &[RawConversation], table: &MappingTable) -> Result<MappingOutcome, IngestError> {
    let mut out = MappingOutcome::default();

    for conv in raw {
        let mut utterances = Vec::with_capacity(conv.raw_utterances.len());
        let mut drop_trace = false;

        for (ui, ru) in conv.raw_utterances.iter().enumerate() {
            let mut labels = Vec::with_capacity(ru.labels.len());
            for (pi, source) in ru.labels.iter().enumerate() {
                match table.lookup(ru.speaker, source) {
                    Some(label) => labels.push(label),
                    None => {
                        let report = UnmappedReport {
                            source_label: source.trim().to_string(),
                            conversation_id: conv.id.clone(),
                            utterance: ui,
                            position: pi,
                        };
                        match table.unmapped_policy {
                            UnmappedPolicy::Error => return Err(IngestError::Unmapped(report)),
                            UnmappedPolicy::DropEvent => {}
                            UnmappedPolicy::DropTrace => drop_trace = true,
                        }
                        out.unmapped.push(report);
                    }
                }
            }
            if labels.is_empty() {
                out.dropped_utterances.push((conv.id.clone(), ui));
                continue;
            }
            let utterance = Utterance {
                speaker: ru.speaker,
                text: ru.text.clone(),
                labels,
            };
            out.side_warnings.extend(utterance.side_mismatches().map(|l| SideWarning {
                conversation_id: conv.id.clone(),
                utterance: ui,
                speaker: ru.speaker,
                label: *l,
            }));
            utterances.push(utterance);
        }

        if drop_trace || utterances.is_empty() {
            out.dropped_conversations.push(conv.id.clone());
            continue;
        }
        out.conversations.push(Conversation {
            id: conv.id.clone(),
            utterances,
            gold_success: conv.gold_success,
        });
    }
    Ok(out)
}
