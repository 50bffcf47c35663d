use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use convmine::conformance::{log_fitness, Aligner, Alignment, CostFunction, FitnessReport, Move};
use convmine::discovery::{directly_follows, mine_episodes_with, mine_succession, EdgeThreshold, EpisodeOptions, SupportMode};
use convmine::evaluation::{dataset_report, project_to_common_layer, DatasetReport, ReportLog};
use convmine::ingest::{
    apply_mapping, parse_gold_csv, parse_transcripts, source_statistics, write_jsonl, RawConversation, TranscriptFormat,
    UnmappedPolicy,
};
use convmine::log::{
    log_statistics, normalize_conversations, reduce_to_log_with, LogStatistics, MultilabelPolicy, ReduceOptions,
};
use convmine::model::{from_transition_graph, generate_traces, ModelDefinition, ProcessNet, ToDot};
use convmine::{EventClass, Layer};
use serde::Serialize;

use crate::error::{usage, CliError};
use crate::io::{load_log, load_mapping, load_model, require_file, Writer};
use crate::{
    CheckArgs, CostArgs, DiscoverArgs, EvaluateArgs, Format, GenerateArgs, IngestArgs, LayerArg, MultilabelArg, ReportFormat,
    SupportArg, UnmappedArg,
};

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

impl From<LayerArg> for Layer {
    fn from(l: LayerArg) -> Self {
        match l {
            LayerArg::Core => Layer::Core,
            LayerArg::Fine => Layer::Fine,
        }
    }
}

impl CostArgs {
    pub fn function(&self) -> Result<CostFunction, CliError> {
        Ok(CostFunction::new(self.log_cost, self.model_cost)?)
    }
}

/// Everything `ingest` needs, shared with the pipeline.
#[derive(Debug, Clone)]
pub struct IngestPlan {
    pub input: PathBuf,
    pub format: Format,
    pub mapping: String,
    pub unmapped: UnmappedArg,
    pub layer: LayerArg,
    pub multilabel: MultilabelArg,
    pub dedup: bool,
    pub gold: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestStats {
    pub mapping: String,
    pub layer: Layer,
    /// Counts over source labels, before mapping.
    pub source: LogStatistics,
    /// Counts over the written log.
    pub normalized: LogStatistics,
    /// Occurrences of each source label missing from the mapping.
    pub unmapped_labels: BTreeMap<String, usize>,
    pub dropped_events: usize,
    pub dropped_utterances: usize,
    pub dropped_conversations: Vec<String>,
    pub side_warnings: usize,
    pub gold_annotated: usize,
    pub gold_successful: usize,
}

impl IngestStats {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        writeln!(out, "| | Dialogues | Utterances | Labels |").unwrap();
        writeln!(out, "|---|---|---|---|").unwrap();
        for (name, s) in [
            (format!("source ({})", self.mapping), &self.source),
            (format!("normalized ({})", self.layer), &self.normalized),
        ] {
            writeln!(out, "| {name} | {} | {} | {} |", s.dialogues, s.utterances, s.distinct_labels).unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "- dropped events: {}", self.dropped_events).unwrap();
        writeln!(out, "- dropped utterances: {}", self.dropped_utterances).unwrap();
        writeln!(out, "- dropped conversations: {}", self.dropped_conversations.len()).unwrap();
        writeln!(out, "- speaker/label side warnings: {}", self.side_warnings).unwrap();
        writeln!(
            out,
            "- gold annotations: {} ({} successful)",
            self.gold_annotated, self.gold_successful
        )
        .unwrap();
        for (label, n) in &self.unmapped_labels {
            writeln!(out, "- unmapped `{label}`: {n}").unwrap();
        }
        out
    }
}

/// Parses, maps and normalizes a transcript file. Returns the normalized
/// JSONL text and its statistics.
pub fn run_ingest(plan: &IngestPlan) -> Result<(String, IngestStats), CliError> {
    require_file(&plan.input)?;
    let policy = match plan.unmapped {
        UnmappedArg::Error => UnmappedPolicy::Error,
        UnmappedArg::DropEvent => UnmappedPolicy::DropEvent,
        UnmappedArg::DropTrace => UnmappedPolicy::DropTrace,
    };
    let table = load_mapping(&plan.mapping)?.with_policy(policy);
    let format = match plan.format {
        Format::Jsonl => TranscriptFormat::Jsonl,
        Format::Csv => TranscriptFormat::Csv,
    };
    let raw = parse_transcripts(&plan.input, format)?;
    let mut outcome = apply_mapping(&raw, &table)?;

    if let Some(path) = &plan.gold {
        require_file(path)?;
        let gold = parse_gold_csv(path)?;
        for c in &mut outcome.conversations {
            if let Some(s) = gold.get(&c.id) {
                c.gold_success = Some(*s);
            }
        }
    }

    let opts = ReduceOptions {
        layer: plan.layer.into(),
        policy: match plan.multilabel {
            MultilabelArg::Expand => MultilabelPolicy::Expand,
            MultilabelArg::First => MultilabelPolicy::First,
        },
        dedup: plan.dedup,
    };
    let normalized = normalize_conversations(&outcome.conversations, opts);
    let log = reduce_to_log_with(&outcome.conversations, opts);
    let out: Vec<RawConversation> = normalized.iter().map(RawConversation::from).collect();
    let mut buf = Vec::new();
    write_jsonl(&out, &mut buf)?;

    let mut unmapped_labels = BTreeMap::new();
    for u in &outcome.unmapped {
        *unmapped_labels.entry(u.source_label.clone()).or_insert(0) += 1;
    }
    let dropped_conversations = outcome.dropped_conversations.clone();
    let stats = IngestStats {
        mapping: table.scheme_name.clone(),
        layer: opts.layer,
        source: source_statistics(&raw),
        normalized: log_statistics(&log),
        dropped_events: if policy == UnmappedPolicy::DropEvent {
            outcome.unmapped.len()
        } else {
            0
        },
        unmapped_labels,
        dropped_utterances: outcome
            .dropped_utterances
            .iter()
            .filter(|(id, _)| !dropped_conversations.contains(id))
            .count(),
        dropped_conversations,
        side_warnings: outcome.side_warnings.len(),
        gold_annotated: out.iter().filter(|c| c.gold_success.is_some()).count(),
        gold_successful: out.iter().filter(|c| c.gold_success == Some(true)).count(),
    };
    Ok((String::from_utf8(buf).expect("JSON is UTF-8"), stats))
}

pub fn render<T: Serialize>(value: &T, format: ReportFormat, md: impl FnOnce(&T) -> String) -> String {
    match format {
        ReportFormat::Json => to_json(value),
        ReportFormat::Md => md(value),
    }
}

pub fn ingest(a: &IngestArgs) -> Result<(), CliError> {
    let w = Writer { force: a.force };
    w.check(&a.output)?;
    if let Some(s) = &a.stats {
        w.check(s)?;
    }
    let plan = IngestPlan {
        input: a.input.clone(),
        format: a.format,
        mapping: a.mapping.clone(),
        unmapped: a.unmapped,
        layer: a.layer,
        multilabel: a.multilabel,
        dedup: a.dedup,
        gold: a.gold.clone(),
    };
    let (jsonl, stats) = run_ingest(&plan)?;
    w.write(&a.output, &jsonl)?;
    w.emit(a.stats.as_deref(), &render(&stats, a.report, IngestStats::to_markdown))
}

#[derive(Debug, Serialize)]
struct DiscoverSummary {
    traces: usize,
    events: usize,
    graph_edges: usize,
    model_edges: usize,
    min_edge_freq: u64,
    pruned: convmine::model::PruneReport,
    episodes: usize,
    files: Vec<String>,
}

pub fn discover(a: &DiscoverArgs) -> Result<(), CliError> {
    let w = Writer { force: a.force };
    let names = [
        "graph.json",
        "graph.dot",
        "model.json",
        "model.dot",
        "succession.json",
        "episodes.json",
    ];
    let paths: Vec<PathBuf> = names.iter().map(|n| a.out_dir.join(n)).collect();
    for p in &paths {
        w.check(p)?;
    }
    let (log, _) = load_log(&a.log)?;
    let graph = directly_follows(&log)?;
    let threshold = match a.min_edge_share {
        Some(f) => EdgeThreshold::Relative(f),
        None => EdgeThreshold::Absolute(a.min_edge_freq),
    };
    let min = threshold.resolve(graph.trace_count())?;
    let (model, pruned) = from_transition_graph(&graph, min)?;
    let succession = mine_succession(&log)?;
    let episodes = mine_episodes_with(
        &log,
        EpisodeOptions {
            max_len: a.max_episode_len,
            min_support: a.min_support,
            mode: match a.support {
                SupportArg::Trace => SupportMode::Trace,
                SupportArg::Occurrence => SupportMode::Occurrence,
            },
        },
    )?;

    let contents = [
        to_json(&graph),
        graph.to_dot(),
        model.to_json() + "\n",
        model.to_dot(),
        to_json(&succession),
        to_json(&episodes),
    ];
    for (p, c) in paths.iter().zip(&contents) {
        w.write(p, c)?;
    }
    let summary = DiscoverSummary {
        traces: log.len(),
        events: log.event_count(),
        graph_edges: graph.edges().len(),
        model_edges: model.edges().len(),
        min_edge_freq: min,
        pruned,
        episodes: episodes.len(),
        files: names.iter().map(|n| n.to_string()).collect(),
    };
    print!(
        "{}",
        render(&summary, a.report, |s| {
            let mut out = String::new();
            writeln!(
                out,
                "| Traces | Events | Graph edges | Model edges (min {}) | Episodes |",
                s.min_edge_freq
            )
            .unwrap();
            writeln!(out, "|---|---|---|---|---|").unwrap();
            writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                s.traces, s.events, s.graph_edges, s.model_edges, s.episodes
            )
            .unwrap();
            out
        })
    );
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct VariantAlignment {
    pub events: Vec<EventClass>,
    pub conversations: Vec<String>,
    pub alignment: Alignment,
}

#[derive(Debug, Serialize)]
pub struct CheckOutput {
    #[serde(flatten)]
    pub report: FitnessReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignments: Option<Vec<VariantAlignment>>,
}

impl CheckOutput {
    fn to_markdown(&self) -> String {
        let mut out = self.report.to_markdown();
        if let Some(list) = &self.alignments {
            out.push_str("\n| Variant | Conversations | Cost | Alignment |\n|---|---|---|---|\n");
            for v in list {
                let events: Vec<String> = v.events.iter().map(ToString::to_string).collect();
                let moves: Vec<String> = v
                    .alignment
                    .moves
                    .iter()
                    .map(|m| match m {
                        Move::Synchronous { label, .. } => label.to_string(),
                        Move::LogOnly { label } => format!("log:{label}"),
                        Move::ModelOnly { label: Some(l), .. } => format!("model:{l}"),
                        Move::ModelOnly { label: None, .. } => "tau".to_string(),
                    })
                    .collect();
                writeln!(
                    out,
                    "| {} | {} | {} | {} |",
                    events.join(" "),
                    v.conversations.len(),
                    v.alignment.cost,
                    moves.join(" ")
                )
                .unwrap();
            }
        }
        out
    }
}

/// Fitness of `log` against `def`, after bringing both to a common layer.
pub fn run_check(
    log: &convmine::log::EventLog,
    def: &ModelDefinition,
    cost: &CostFunction,
    alignments: bool,
) -> Result<CheckOutput, CliError> {
    let (log, model) = project_to_common_layer(log, def);
    let net = ProcessNet::from_definition(&model);
    let mut report = log_fitness(&log, &net, cost)?;
    report.reconstructed = def.reconstructed();
    let alignments = if alignments {
        let aligner = Aligner::new(&net, *cost)?;
        let mut index: BTreeMap<&[EventClass], usize> = BTreeMap::new();
        let mut list: Vec<VariantAlignment> = Vec::new();
        for t in log.traces() {
            let i = *index.entry(t.events()).or_insert_with(|| {
                list.push(VariantAlignment {
                    events: t.events().to_vec(),
                    conversations: Vec::new(),
                    alignment: aligner.align(t.events()),
                });
                list.len() - 1
            });
            list[i].conversations.push(t.conversation_id.clone());
        }
        Some(list)
    } else {
        None
    };
    Ok(CheckOutput { report, alignments })
}

pub fn check(a: &CheckArgs) -> Result<(), CliError> {
    let w = Writer { force: a.force };
    if let Some(p) = &a.output {
        w.check(p)?;
    }
    let cost = a.cost.function()?;
    let def = load_model(&a.model)?;
    let (log, _) = load_log(&a.log)?;
    let out = run_check(&log, &def, &cost, a.alignments)?;
    w.emit(a.output.as_deref(), &render(&out, a.report, CheckOutput::to_markdown))
}

/// Models keyed by name; built-ins use their selector, files their
/// definition name.
pub fn load_models(specs: &[String]) -> Result<BTreeMap<String, ModelDefinition>, CliError> {
    let mut models = BTreeMap::new();
    for spec in specs {
        let def = load_model(spec)?;
        let name = def.name().to_string();
        if models.insert(name.clone(), def).is_some() {
            return Err(usage(format!("two models are named `{name}`")));
        }
    }
    Ok(models)
}

pub fn report_log(path: &Path, sidecar: Option<&Path>) -> Result<ReportLog, CliError> {
    let (log, mut gold) = load_log(path)?;
    if let Some(p) = sidecar {
        require_file(p)?;
        gold.extend(parse_gold_csv(p)?);
    }
    Ok(ReportLog {
        log,
        gold: (!gold.is_empty()).then_some(gold),
    })
}

pub fn render_dataset_report(r: &DatasetReport, format: ReportFormat) -> String {
    render(r, format, DatasetReport::to_markdown)
}

pub fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let w = Writer { force: a.force };
    if let Some(p) = &a.output {
        w.check(p)?;
    }
    let cost = a.cost.function()?;
    let models = load_models(&a.models)?;
    let sidecars: BTreeMap<&str, &Path> = a.gold.iter().map(|(n, p)| (n.as_str(), p.as_path())).collect();
    if let Some(n) = sidecars.keys().find(|n| !a.logs.iter().any(|(l, _)| l == *n)) {
        return Err(usage(format!("--gold names `{n}`, which is not a --log name")));
    }
    let mut logs = BTreeMap::new();
    for (name, path) in &a.logs {
        let entry = report_log(path, sidecars.get(name.as_str()).copied())?;
        if logs.insert(name.clone(), entry).is_some() {
            return Err(usage(format!("two logs are named `{name}`")));
        }
    }
    let report = dataset_report(&logs, &models, &cost, a.threshold)?;
    w.emit(a.output.as_deref(), &render_dataset_report(&report, a.report))
}

pub fn generate(a: &GenerateArgs) -> Result<(), CliError> {
    let w = Writer { force: a.force };
    w.check(&a.output)?;
    let def = load_model(&a.model)?;
    let log = generate_traces(&def, a.count, a.max_len, a.seed)?;
    let raw: Vec<RawConversation> = log
        .traces()
        .iter()
        .map(|t| RawConversation {
            id: t.conversation_id.clone(),
            gold_success: None,
            raw_utterances: t
                .events()
                .iter()
                .filter_map(|e| e.label())
                .map(|l| convmine::ingest::RawUtterance {
                    speaker: l.speaker(),
                    text: None,
                    labels: vec![l.to_string()],
                })
                .collect(),
        })
        .collect();
    let mut buf = Vec::new();
    write_jsonl(&raw, &mut buf)?;
    w.write(&a.output, &String::from_utf8(buf).expect("JSON is UTF-8"))
}
