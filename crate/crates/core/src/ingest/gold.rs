//! Sidecar gold annotations: `conversation_id,success`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::IngestError;

pub fn parse_gold_csv(path: &Path) -> Result<BTreeMap<String, bool>, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_gold_csv(&text)
}

pub fn read_gold_csv(text: &str) -> Result<BTreeMap<String, bool>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut gold = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| IngestError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let id = record.get(0).unwrap_or("");
        let success = match record.get(1).unwrap_or("") {
            "true" | "1" => true,
            "false" | "0" => false,
            other => {
                return Err(IngestError::Parse {
                    line,
                    message: format!("invalid success value `{other}`"),
                })
            }
        };
        if gold.insert(id.to_string(), success).is_some() {
            return Err(IngestError::DuplicateId(id.to_string()));
        }
    }
    Ok(gold)
}
