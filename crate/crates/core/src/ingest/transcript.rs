//! Transcript files: JSONL (one conversation per line) and CSV (one
//! utterance per row).

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::IngestError;
use crate::label::Speaker;
use crate::log::{Conversation, LogStatistics};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptFormat {
    Jsonl,
    Csv,
}

impl FromStr for TranscriptFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(TranscriptFormat::Jsonl),
            "csv" => Ok(TranscriptFormat::Csv),
            other => Err(format!("unknown transcript format `{other}` (expected jsonl or csv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawUtterance {
    pub speaker: Speaker,
    #[serde(default)]
    pub text: Option<String>,
    pub labels: Vec<String>,
}

/// A conversation as read from disk, labels still in the source scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawConversation {
    pub id: String,
    #[serde(rename = "success", default)]
    pub gold_success: Option<bool>,
    #[serde(rename = "utterances")]
    pub raw_utterances: Vec<RawUtterance>,
}

impl From<&Conversation> for RawConversation {
    fn from(c: &Conversation) -> Self {
        RawConversation {
            id: c.id.clone(),
            gold_success: c.gold_success,
            raw_utterances: c
                .utterances
                .iter()
                .map(|u| RawUtterance {
                    speaker: u.speaker,
                    text: u.text.clone(),
                    labels: u.labels.iter().map(ToString::to_string).collect(),
                })
                .collect(),
        }
    }
}

pub fn parse_transcripts(path: &Path, format: TranscriptFormat) -> Result<Vec<RawConversation>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        TranscriptFormat::Jsonl => read_jsonl(BufReader::new(file)),
        TranscriptFormat::Csv => read_csv(file),
    }
}

fn check_conversation(conv: &RawConversation, line: usize, seen: &mut HashSet<String>) -> Result<(), IngestError> {
    if conv.raw_utterances.is_empty() {
        return Err(IngestError::EmptyConversation {
            line,
            id: conv.id.clone(),
        });
    }
    if let Some(i) = conv.raw_utterances.iter().position(|u| u.labels.is_empty()) {
        return Err(IngestError::Parse {
            line,
            message: format!("utterance {i} of `{}` has no labels", conv.id),
        });
    }
    if !seen.insert(conv.id.clone()) {
        return Err(IngestError::DuplicateId(conv.id.clone()));
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<RawConversation>, IngestError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| IngestError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let conv: RawConversation = serde_json::from_str(&line).map_err(|e| IngestError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        check_conversation(&conv, line_no, &mut seen)?;
        out.push(conv);
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    conversation_id: String,
    turn_index: i64,
    speaker: String,
    labels: String,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    success: Option<String>,
}

fn parse_success(s: Option<&str>, line: usize) -> Result<Option<bool>, IngestError> {
    match s.map(str::trim) {
        None | Some("") | Some("null") => Ok(None),
        Some("true") | Some("1") => Ok(Some(true)),
        Some("false") | Some("0") => Ok(Some(false)),
        Some(other) => Err(IngestError::Parse {
            line,
            message: format!("invalid success value `{other}`"),
        }),
    }
}

/// Rows must be grouped by conversation and ordered by `turn_index`.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<RawConversation>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out: Vec<RawConversation> = Vec::new();
    let mut seen = HashSet::new();
    let mut last_turn = i64::MIN;
    let mut open_line = 0;

    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();

    for result in rdr.records() {
        let record = result.map_err(|e| IngestError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row: CsvRow = record.deserialize(Some(&headers)).map_err(|e| IngestError::Parse {
            line,
            message: e.to_string(),
        })?;
        let speaker = row.speaker.parse::<Speaker>().map_err(|e| IngestError::Parse {
            line,
            message: e.to_string(),
        })?;
        let labels: Vec<String> = row
            .labels
            .split('|')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        let success = parse_success(row.success.as_deref(), line)?;
        let text = row.text.filter(|t| !t.is_empty());

        let continues = out.last().is_some_and(|c| c.id == row.conversation_id);
        if continues {
            if row.turn_index <= last_turn {
                return Err(IngestError::Parse {
                    line,
                    message: format!("turn_index {} of `{}` is not increasing", row.turn_index, row.conversation_id),
                });
            }
            let conv = out.last_mut().expect("checked above");
            match (conv.gold_success, success) {
                (Some(a), Some(b)) if a != b => {
                    return Err(IngestError::Parse {
                        line,
                        message: format!("conflicting success values for `{}`", conv.id),
                    })
                }
                (None, Some(b)) => conv.gold_success = Some(b),
                _ => {}
            }
        } else {
            if let Some(prev) = out.last() {
                check_conversation(prev, open_line, &mut seen)?;
            }
            if seen.contains(&row.conversation_id) {
                return Err(IngestError::DuplicateId(row.conversation_id));
            }
            out.push(RawConversation {
                id: row.conversation_id.clone(),
                gold_success: success,
                raw_utterances: Vec::new(),
            });
            open_line = line;
        }
        last_turn = row.turn_index;
        out.last_mut()
            .expect("just pushed")
            .raw_utterances
            .push(RawUtterance { speaker, text, labels });
    }
    if let Some(prev) = out.last() {
        check_conversation(prev, open_line, &mut seen)?;
    }
    Ok(out)
}

/// Writes the normalized JSONL form read back by [`read_jsonl`].
pub fn write_jsonl<W: Write>(conversations: &[RawConversation], mut writer: W) -> Result<(), IngestError> {
    for c in conversations {
        let line = serde_json::to_string(c).map_err(|e| IngestError::Write(e.to_string()))?;
        writeln!(writer, "{line}").map_err(|e| IngestError::Write(e.to_string()))?;
    }
    Ok(())
}

/// Corpus counts over source labels, before any mapping.
pub fn source_statistics(raw: &[RawConversation]) -> LogStatistics {
    let labels: HashSet<&str> = raw
        .iter()
        .flat_map(|c| c.raw_utterances.iter())
        .flat_map(|u| u.labels.iter().map(String::as_str))
        .collect();
    LogStatistics {
        dialogues: raw.len(),
        utterances: raw.iter().map(|c| c.raw_utterances.len()).sum(),
        distinct_labels: labels.len(),
    }
}
