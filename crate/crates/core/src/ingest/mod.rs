//! Reading transcripts and mapping tables, and normalizing source labels
//! onto the QRFA schema.

mod gold;
mod mapping;
mod transcript;

pub use gold::{parse_gold_csv, read_gold_csv};
pub use mapping::{apply_mapping, parse_mapping, MappingOutcome, MappingTable, SideWarning, UnmappedPolicy, UnmappedReport};
pub use transcript::{
    parse_transcripts, read_csv, read_jsonl, source_statistics, write_jsonl, RawConversation, RawUtterance, TranscriptFormat,
};
