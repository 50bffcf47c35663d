//! Loading inputs and writing outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use convmine::ingest::{apply_mapping, parse_transcripts, MappingTable, TranscriptFormat};
use convmine::log::{gold_annotations, reduce_to_log, EventLog, MultilabelPolicy};
use convmine::model::{builtin_cor, builtin_qrfa, ModelDefinition};
use convmine::Layer;

use crate::error::{usage, CliError};

/// Writes outputs, refusing to replace existing files unless forced.
#[derive(Debug, Clone, Copy)]
pub struct Writer {
    pub force: bool,
}

impl Writer {
    pub fn check(&self, path: &Path) -> Result<(), CliError> {
        if !self.force && path.exists() {
            return Err(CliError::WouldOverwrite(path.to_path_buf()));
        }
        Ok(())
    }

    pub fn write(&self, path: &Path, contents: &str) -> Result<(), CliError> {
        self.check(path)?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|source| CliError::Write {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        fs::write(path, contents).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Writes to `path`, or prints when there is none.
    pub fn emit(&self, path: Option<&Path>, contents: &str) -> Result<(), CliError> {
        match path {
            Some(p) => self.write(p, contents),
            None => {
                print!("{contents}");
                Ok(())
            }
        }
    }
}

pub fn require_file(path: &Path) -> Result<(), CliError> {
    if !path.is_file() {
        return Err(usage(format!("input file {} does not exist", path.display())));
    }
    Ok(())
}

/// `builtin:NAME` or a path to a mapping CSV.
pub fn load_mapping(spec: &str) -> Result<MappingTable, CliError> {
    match spec.strip_prefix("builtin:") {
        Some(name) => MappingTable::builtin(name).map_err(|_| {
            let names: Vec<&str> = MappingTable::builtin_names().collect();
            usage(format!("unknown built-in mapping `{name}` (available: {})", names.join(", ")))
        }),
        None => {
            let path = Path::new(spec);
            require_file(path)?;
            Ok(convmine::ingest::parse_mapping(path)?)
        }
    }
}

/// `qrfa`, `cor`, or a path to a model definition JSON.
pub fn load_model(spec: &str) -> Result<ModelDefinition, CliError> {
    match spec {
        "qrfa" => Ok(builtin_qrfa()),
        "cor" => Ok(builtin_cor()),
        path => {
            let path = Path::new(path);
            if !path.is_file() {
                return Err(usage(format!(
                    "model `{}` is neither a built-in (qrfa, cor) nor an existing file",
                    path.display()
                )));
            }
            Ok(ModelDefinition::load(path)?)
        }
    }
}

/// Reads a normalized transcript (QRFA labels) as an event log. The layer is
/// fine if any label carries a sublabel, core otherwise.
pub fn load_log(path: &Path) -> Result<(EventLog, BTreeMap<String, bool>), CliError> {
    require_file(path)?;
    let raw = parse_transcripts(path, TranscriptFormat::Jsonl)?;
    let outcome = apply_mapping(&raw, &MappingTable::builtin("qrfa")?)?;
    let fine = outcome
        .conversations
        .iter()
        .flat_map(|c| &c.utterances)
        .flat_map(|u| &u.labels)
        .any(|l| l.sub().is_some());
    let layer = if fine { Layer::Fine } else { Layer::Core };
    let log = reduce_to_log(&outcome.conversations, layer, MultilabelPolicy::Expand);
    Ok((log, gold_annotations(&outcome.conversations)))
}

/// `NAME=PATH`.
pub fn named_path(arg: &str) -> Result<(String, PathBuf), String> {
    match arg.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected NAME=PATH, got `{arg}`")),
    }
}
