//! The `pipeline` subcommand and its TOML configuration.
//!
//! ```toml
//! out_dir = "results"
//! models = ["qrfa", "cor"]
//! report = "md"
//!
//! [[dataset]]
//! name = "scs"
//! input = "scs.jsonl"
//! mapping = "builtin:scs"
//! ```
//!
//! Relative paths are resolved against the directory holding the config.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use convmine::evaluation::{dataset_report, DEFAULT_THRESHOLD};
use serde::Deserialize;

use crate::commands::{load_models, render, render_dataset_report, report_log, run_check, run_ingest, IngestPlan, IngestStats};
use crate::error::{usage, CliError};
use crate::io::Writer;
use crate::{Format, LayerArg, MultilabelArg, PipelineArgs, ReportFormat, UnmappedArg};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub out_dir: PathBuf,
    pub models: Vec<String>,
    #[serde(default)]
    pub report: ReportFormat,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "one")]
    pub log_cost: u32,
    #[serde(default = "one")]
    pub model_cost: u32,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub input: PathBuf,
    #[serde(default)]
    pub format: Format,
    pub mapping: String,
    #[serde(default)]
    pub unmapped: UnmappedArg,
    #[serde(default)]
    pub layer: LayerArg,
    #[serde(default)]
    pub multilabel: MultilabelArg,
    #[serde(default)]
    pub dedup: bool,
    pub gold: Option<PathBuf>,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn one() -> u32 {
    1
}

pub fn load_config(path: &Path) -> Result<PipelineConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg: PipelineConfig = toml::from_str(&text).map_err(|e| usage(format!("{}: {}", path.display(), e.message())))?;
    if cfg.datasets.is_empty() || cfg.models.is_empty() {
        return Err(usage(format!(
            "{}: needs at least one [[dataset]] and one model",
            path.display()
        )));
    }
    let base = path.parent().unwrap_or(Path::new(""));
    let resolve = |p: &Path| if p.is_relative() { base.join(p) } else { p.to_path_buf() };
    cfg.out_dir = resolve(&cfg.out_dir);
    for d in &mut cfg.datasets {
        d.input = resolve(&d.input);
        d.gold = d.gold.as_deref().map(resolve);
        if !d.mapping.starts_with("builtin:") {
            d.mapping = resolve(Path::new(&d.mapping)).to_string_lossy().into_owned();
        }
    }
    let resolved: Vec<String> = cfg
        .models
        .iter()
        .map(|m| match m.as_str() {
            "qrfa" | "cor" => m.clone(),
            other => resolve(Path::new(other)).to_string_lossy().into_owned(),
        })
        .collect();
    cfg.models = resolved;
    Ok(cfg)
}

/// For every dataset: ingest, then check against every model; finally one
/// evaluation table over all of them. Outputs land in `out_dir`:
/// `NAME.jsonl`, `NAME.stats.EXT`, `NAME.MODEL.fitness.EXT` and `report.EXT`.
pub fn pipeline(a: &PipelineArgs) -> Result<(), CliError> {
    let cfg = load_config(&a.config)?;
    let w = Writer { force: a.force };
    let ext = match cfg.report {
        ReportFormat::Json => "json",
        ReportFormat::Md => "md",
    };
    let cost = crate::CostArgs {
        log_cost: cfg.log_cost,
        model_cost: cfg.model_cost,
    }
    .function()?;
    let models = load_models(&cfg.models)?;

    let mut names = std::collections::BTreeSet::new();
    for d in &cfg.datasets {
        if !names.insert(d.name.as_str()) {
            return Err(usage(format!("two datasets are named `{}`", d.name)));
        }
    }
    let out = |file: String| cfg.out_dir.join(file);
    let mut planned = vec![out(format!("report.{ext}"))];
    for d in &cfg.datasets {
        planned.push(out(format!("{}.jsonl", d.name)));
        planned.push(out(format!("{}.stats.{ext}", d.name)));
        for m in models.keys() {
            planned.push(out(format!("{}.{m}.fitness.{ext}", d.name)));
        }
    }
    for p in &planned {
        w.check(p)?;
    }

    let mut logs = BTreeMap::new();
    for d in &cfg.datasets {
        let plan = IngestPlan {
            input: d.input.clone(),
            format: d.format,
            mapping: d.mapping.clone(),
            unmapped: d.unmapped,
            layer: d.layer,
            multilabel: d.multilabel,
            dedup: d.dedup,
            gold: d.gold.clone(),
        };
        let (jsonl, stats) = run_ingest(&plan)?;
        let log_path = out(format!("{}.jsonl", d.name));
        w.write(&log_path, &jsonl)?;
        w.write(
            &out(format!("{}.stats.{ext}", d.name)),
            &render(&stats, cfg.report, IngestStats::to_markdown),
        )?;

        let entry = report_log(&log_path, None)?;
        for (m, def) in &models {
            let result = run_check(&entry.log, def, &cost, false)?;
            let text = render(&result.report, cfg.report, |r| r.to_markdown());
            w.write(&out(format!("{}.{m}.fitness.{ext}", d.name)), &text)?;
        }
        logs.insert(d.name.clone(), entry);
    }

    let report = dataset_report(&logs, &models, &cost, cfg.threshold)?;
    w.write(&out(format!("report.{ext}")), &render_dataset_report(&report, cfg.report))
}
