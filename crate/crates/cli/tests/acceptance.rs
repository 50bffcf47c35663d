//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p convmine-cli --test acceptance`.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use convmine::conformance::{log_fitness, optimal_alignment, worst_case_cost, Aligner, CostFunction};
use convmine::discovery::{directly_follows, extract_model, mine_episodes, mine_succession};
use convmine::evaluation::{score_error_detection, Metric, SuccessPrediction};
use convmine::log::{EventLog, Trace};
use convmine::model::{builtin_qrfa, generate_traces, ProcessNet};
use convmine::{CoreLabel, EventClass, Layer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Files = BTreeMap<PathBuf, Vec<u8>>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mixed_alphabet() -> Vec<EventClass> {
    let mut a: Vec<EventClass> = oracle::CORE.iter().map(|c| (*c).into()).collect();
    a.extend(oracle::foreign_labels());
    a
}

fn qrfa_net() -> ProcessNet {
    ProcessNet::from_definition(&builtin_qrfa())
}

fn alignment_optimality() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let alphabet = mixed_alphabet();
    let cost = CostFunction::default();
    let qrfa = qrfa_net();
    let mut checked = 0;
    for _ in 0..200 {
        let trace = oracle::random_trace(&mut rng, &alphabet, 0, 8);
        let got = optimal_alignment(&trace, &qrfa, &cost).map_err(|e| e.to_string())?;
        let want = oracle::alignment_cost(&trace, &qrfa, &cost);
        ensure(Some(got.cost) == want, || format!("QRFA {trace:?}: {} vs {want:?}", got.cost))?;
        checked += 1;
    }
    for net_index in 0..20 {
        let def = oracle::random_model(&mut rng, 12);
        let net = ProcessNet::from_definition(&def);
        ensure(net.transitions().len() <= 12 && net.is_state_machine(), || {
            format!("net {net_index} out of range")
        })?;
        let aligner = Aligner::new(&net, cost).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let trace = oracle::random_trace(&mut rng, &alphabet, 0, 8);
            let got = aligner.align(&trace).cost;
            let want = oracle::alignment_cost(&trace, &net, &cost);
            ensure(Some(got) == want, || {
                format!("{} {trace:?}: {got} vs {want:?}", def.to_json())
            })?;
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{checked} traces exact, {:.2}s including enumeration",
        elapsed.as_secs_f64()
    ))
}

fn fitness_bounds() -> Outcome {
    let def = builtin_qrfa();
    let net = qrfa_net();
    let aligner = Aligner::new(&net, CostFunction::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let alphabet = mixed_alphabet();
    let generated = generate_traces(&def, 500, 10, 12).map_err(|e| e.to_string())?;
    let mut traces: Vec<Vec<EventClass>> = generated.traces().iter().map(|t| t.events().to_vec()).collect();
    while traces.len() < 1000 {
        traces.push(oracle::random_trace(&mut rng, &alphabet, 1, 8));
    }
    let mut perfect = 0;
    for (i, events) in traces.iter().enumerate() {
        let f = aligner.fitness(format!("t{i}"), events);
        ensure((0.0..=1.0).contains(&f.fitness), || {
            format!("{events:?}: fitness {}", f.fitness)
        })?;
        let replays = oracle::replays(&def, events);
        ensure((f.fitness == 1.0) == replays, || {
            format!("{events:?}: fitness {} but replay {replays}", f.fitness)
        })?;
        perfect += usize::from(replays);
    }
    Ok(format!("1000 traces in [0,1], {perfect} replayable ones exactly at 1"))
}

fn generation_implies_fit() -> Outcome {
    let log = generate_traces(&builtin_qrfa(), 1000, 20, 42).map_err(|e| e.to_string())?;
    let report = log_fitness(&log, &qrfa_net(), &CostFunction::default()).map_err(|e| e.to_string())?;
    let agg = report.aggregates.ok_or("no aggregates")?;
    ensure(
        agg.traces == 1000 && agg.mean == 1.0 && agg.std_dev == 0.0 && agg.cases_with_value_1 == 1.0,
        || format!("{agg:?}"),
    )?;
    Ok("mean 1, std 0, cases with value 1 = 1".into())
}

fn q_end_penalty() -> Outcome {
    let net = qrfa_net();
    let cost = CostFunction::default();
    let trace = [EventClass::from(CoreLabel::Q)];
    let opt = optimal_alignment(&trace, &net, &cost).map_err(|e| e.to_string())?.cost;
    let worst = worst_case_cost(&trace, &net, &cost).map_err(|e| e.to_string())?;
    let fit = Aligner::new(&net, cost)
        .map_err(|e| e.to_string())?
        .fitness("q", &trace)
        .fitness;
    ensure(opt == 1 && worst == 3 && (fit - 2.0 / 3.0).abs() <= 1e-12, || {
        format!("cost {opt}, worst {worst}, fitness {fit}")
    })?;
    Ok(format!("cost 1, worst 3, fitness {fit:.15}"))
}

fn discovery_round_trip() -> Outcome {
    let def = builtin_qrfa();
    let log = generate_traces(&def, 10_000, 20, 42).map_err(|e| e.to_string())?;
    let g = directly_follows(&log).map_err(|e| e.to_string())?;
    let model = extract_model(&g, 1).map_err(|e| e.to_string())?;
    let mined: BTreeSet<_> = model.edges().keys().copied().collect();
    let expected = def.class_edges();
    ensure(mined == expected && expected.len() == 13, || {
        format!(
            "missing {:?}, extra {:?}",
            expected.difference(&mined).collect::<Vec<_>>(),
            mined.difference(&expected).collect::<Vec<_>>()
        )
    })?;
    Ok("13 edges recovered, none extra".into())
}

fn succession_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..100 {
        let n = rng.random_range(1..=30);
        let log = oracle::random_log(&mut rng, n, 12);
        let s = mine_succession(&log).map_err(|e| e.to_string())?;
        let got: BTreeMap<_, _> = s.pairs.iter().map(|(k, p)| (*k, (p.count, p.distances.clone()))).collect();
        ensure(got == oracle::succession(&log), || format!("log {i} differs"))?;
    }
    Ok("100 logs exact".into())
}

fn episode_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for i in 0..100 {
        let n = rng.random_range(1..=20);
        let log = oracle::random_log(&mut rng, n, 10);
        let got: Vec<_> = mine_episodes(&log, 4, 1)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|p| (p.sequence, p.support))
            .collect();
        ensure(got == oracle::episodes(&log, 4, 1), || format!("log {i} differs"))?;
    }
    let def = builtin_qrfa();
    let corpus = generate_traces(&def, 10_000, 20, 42).map_err(|e| e.to_string())?;
    let found: BTreeSet<Vec<EventClass>> = mine_episodes(&corpus, 3, 1)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|p| p.sequence)
        .collect();
    ensure(def.cycles().len() == 4, || format!("{} named cycles", def.cycles().len()))?;
    for (name, edges) in def.cycles() {
        let mut nodes = edges.iter().map(|(f, _)| def.class_of(f).unwrap());
        let (x, y) = (nodes.next().unwrap(), nodes.next().unwrap());
        let present = found.contains(&vec![x, y])
            && found.contains(&vec![y, x])
            && (found.contains(&vec![x, y, x]) || found.contains(&vec![y, x, y]));
        ensure(present, || format!("cycle {name} ({x} {y}) not mined"))?;
    }
    Ok("100 logs exact; 4 cycles mined".into())
}

struct Fixture {
    predicted: &'static str,
    gold: &'static str,
    cells: [u64; 4],
    precision: Option<f64>,
    recall: Option<f64>,
}

const fn fx(
    predicted: &'static str,
    gold: &'static str,
    cells: [u64; 4],
    precision: Option<f64>,
    recall: Option<f64>,
) -> Fixture {
    Fixture {
        predicted,
        gold,
        cells,
        precision,
        recall,
    }
}

/// `S`/`F` per conversation, `-` for no gold; cells are TP, FP, FN, TN with
/// failure as the positive class.
const FIXTURES: [Fixture; 20] = [
    fx("FFSS", "FSFS", [1, 1, 1, 1], Some(0.5), Some(0.5)),
    fx("SSSS", "SSFF", [0, 0, 2, 2], None, Some(0.0)),
    fx("FFFF", "FFFF", [4, 0, 0, 0], Some(1.0), Some(1.0)),
    fx("FFFF", "SSSS", [0, 4, 0, 0], Some(0.0), None),
    fx("SSSS", "SSSS", [0, 0, 0, 4], None, None),
    fx("FSFSF", "FFSSF", [2, 1, 1, 1], Some(2.0 / 3.0), Some(2.0 / 3.0)),
    fx("FFS", "F-S", [1, 0, 0, 1], Some(1.0), Some(1.0)),
    fx("FFS", "F-F", [1, 0, 1, 0], Some(1.0), Some(0.5)),
    fx("SFSFSF", "SSSSSF", [1, 2, 0, 3], Some(1.0 / 3.0), Some(1.0)),
    fx("SSSSSSSSSF", "FSSSSSSSSF", [1, 0, 1, 8], Some(1.0), Some(0.5)),
    fx("F", "F", [1, 0, 0, 0], Some(1.0), Some(1.0)),
    fx("S", "F", [0, 0, 1, 0], None, Some(0.0)),
    fx("F", "S", [0, 1, 0, 0], Some(0.0), None),
    fx("S", "S", [0, 0, 0, 1], None, None),
    fx("FFFSSS", "FSFSFS", [2, 1, 1, 2], Some(2.0 / 3.0), Some(2.0 / 3.0)),
    fx("FFFFFSSSSS", "FFFSSFFSSS", [3, 2, 2, 3], Some(0.6), Some(0.6)),
    fx("SFFS", "S-F-", [1, 0, 0, 1], Some(1.0), Some(1.0)),
    fx("FSFSFSFS", "FFFFSSSS", [2, 2, 2, 2], Some(0.5), Some(0.5)),
    // every conversation predicted successful while 2 of 25 failed
    fx(
        "SSSSSSSSSSSSSSSSSSSSSSSSS",
        "SSSSSSSSSSSSFSSSSSSSSSSFS",
        [0, 0, 2, 23],
        None,
        Some(0.0),
    ),
    fx("FFFFFFFFFS", "FFFFFFFSSS", [7, 2, 0, 1], Some(7.0 / 9.0), Some(1.0)),
];

fn metric_matches(m: Metric, want: Option<f64>) -> bool {
    match (m.value(), want) {
        (Some(a), Some(b)) => (a - b).abs() < 1e-12,
        (None, None) => true,
        _ => false,
    }
}

fn evaluation_arithmetic() -> Outcome {
    for (i, f) in FIXTURES.iter().enumerate() {
        let preds: Vec<_> = f
            .predicted
            .chars()
            .enumerate()
            .map(|(j, c)| SuccessPrediction {
                conversation_id: format!("c{j:02}"),
                predicted_success: c == 'S',
                fitness: if c == 'S' { 1.0 } else { 0.5 },
            })
            .collect();
        let gold: BTreeMap<String, bool> = f
            .gold
            .chars()
            .enumerate()
            .filter(|(_, c)| *c != '-')
            .map(|(j, c)| (format!("c{j:02}"), c == 'S'))
            .collect();
        let m = score_error_detection(&preds, &gold).map_err(|e| format!("fixture {i}: {e}"))?;
        let cells = [m.true_positives, m.false_positives, m.false_negatives, m.true_negatives];
        let missing = f.gold.chars().filter(|c| *c == '-').count();
        ensure(
            cells == f.cells
                && metric_matches(m.precision, f.precision)
                && metric_matches(m.recall, f.recall)
                && m.missing_gold.len() == missing,
            || format!("fixture {i}: {cells:?} P={} R={}", m.precision, m.recall),
        )?;
    }
    Ok("20 fixtures; all-success fixture gives recall 0, precision undefined".into())
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_convmine"))
}

const TRANSCRIPT: &str = r#"{"id":"d1","success":true,"utterances":[{"speaker":"user","text":"cheap food","labels":["inform"]},{"speaker":"agent","labels":["offer"]},{"speaker":"user","labels":["thankyou"]}]}
{"id":"d2","success":false,"utterances":[{"speaker":"user","labels":["request"]},{"speaker":"agent","labels":["canthelp"]},{"speaker":"user","labels":["negate"]}]}
{"id":"d3","success":true,"utterances":[{"speaker":"user","labels":["inform","request"]},{"speaker":"agent","labels":["inform"]},{"speaker":"user","labels":["mystery"]}]}
"#;

const PIPELINE: &str = r#"out_dir = "results"
models = ["qrfa", "cor"]
report = "md"

[[dataset]]
name = "dstc"
input = "in.jsonl"
mapping = "builtin:dstc2"
unmapped = "drop_event"
layer = "core"
"#;

const RUNS: &[&[&str]] = &[
    &["generate", "--model", "qrfa", "-n", "300", "--seed", "9", "-o", "gen.jsonl"],
    &[
        "ingest",
        "in.jsonl",
        "--mapping",
        "builtin:dstc2",
        "--unmapped",
        "drop_event",
        "-o",
        "in.norm.jsonl",
        "--stats",
        "in.stats.md",
        "--report",
        "md",
    ],
    &["discover", "gen.jsonl", "--out-dir", "disc"],
    &["check", "gen.jsonl", "--model", "cor", "--alignments", "-o", "check.json"],
    &["check", "in.norm.jsonl", "--model", "qrfa", "--report", "md"],
    &[
        "evaluate",
        "--log",
        "gen=gen.jsonl",
        "--log",
        "dstc=in.norm.jsonl",
        "--model",
        "qrfa",
        "--model",
        "cor",
        "-o",
        "eval.json",
    ],
    &["evaluate", "--log", "dstc=in.norm.jsonl", "--model", "qrfa", "--report", "md"],
    &["pipeline", "pipeline.toml"],
];

/// Every file under `root` with its contents, keyed by relative path.
fn snapshot(root: &Path) -> Files {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn cli_session() -> Result<(Files, Vec<Vec<u8>>), String> {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    fs::write(dir.path().join("in.jsonl"), TRANSCRIPT).map_err(|e| e.to_string())?;
    fs::write(dir.path().join("pipeline.toml"), PIPELINE).map_err(|e| e.to_string())?;
    let mut stdout = Vec::new();
    for args in RUNS {
        let o = bin()
            .current_dir(dir.path())
            .args(*args)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || {
            format!("{} failed: {}", args[0], String::from_utf8_lossy(&o.stderr))
        })?;
        stdout.push(o.stdout);
    }
    Ok((snapshot(dir.path()), stdout))
}

fn cli_determinism() -> Outcome {
    let (files_a, out_a) = cli_session()?;
    let (files_b, out_b) = cli_session()?;
    ensure(files_a.keys().eq(files_b.keys()), || "different file sets".into())?;
    for (path, bytes) in &files_a {
        ensure(&files_b[path] == bytes, || format!("{} differs", path.display()))?;
    }
    for (i, (a, b)) in out_a.iter().zip(&out_b).enumerate() {
        ensure(a == b, || format!("stdout of {} differs", RUNS[i][0]))?;
    }
    Ok(format!(
        "{} runs over 6 subcommands, {} files identical",
        RUNS.len(),
        files_a.len()
    ))
}

fn performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let alphabet = mixed_alphabet();
    let traces: Vec<Trace> = (0..15_000)
        .map(|i| {
            let len = if i < 10_000 { 47 } else { 46 };
            Trace::new(format!("p{i:05}"), oracle::random_trace(&mut rng, &alphabet, len, len)).unwrap()
        })
        .collect();
    let log = EventLog::new(traces, Layer::Fine).map_err(|e| e.to_string())?;
    ensure(log.event_count() == 700_000, || format!("{} events", log.event_count()))?;
    let start = Instant::now();
    let report = log_fitness(&log, &qrfa_net(), &CostFunction::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(report.traces.len() == 15_000, || "missing traces".into())?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("15000 traces / 700000 events in {:.2}s", elapsed.as_secs_f64()))
}

/// Reference Average/case QRFA fitness per corpus.
const PUBLISHED: [(&str, f64); 4] = [("scs", 0.89), ("ode", 1.00), ("dstc1", 0.96), ("dstc2", 0.99)];

/// Informational: runs only when `CONVMINE_DATASET_DIR` holds transcript
/// files named `scs.jsonl`, `ode.jsonl`, `dstc1.jsonl` or `dstc2.jsonl`.
fn dataset_reproduction() -> Option<String> {
    let root = PathBuf::from(std::env::var_os("CONVMINE_DATASET_DIR")?);
    let tmp = TempDir::new().ok()?;
    let mut lines = Vec::new();
    for (name, published) in PUBLISHED {
        let input = root.join(format!("{name}.jsonl"));
        if !input.is_file() {
            lines.push(format!("{name}: not found"));
            continue;
        }
        let norm = tmp.path().join(format!("{name}.norm.jsonl"));
        let ingest = bin()
            .args([
                "ingest",
                input.to_str()?,
                "--mapping",
                &format!("builtin:{name}"),
                "--unmapped",
                "drop_event",
                "--layer",
                "core",
                "-o",
            ])
            .arg(&norm)
            .output()
            .ok()?;
        if !ingest.status.success() {
            lines.push(format!(
                "{name}: ingest failed: {}",
                String::from_utf8_lossy(&ingest.stderr).trim()
            ));
            continue;
        }
        let check = bin().arg("check").arg(&norm).args(["--model", "qrfa"]).output().ok()?;
        let mean = serde_json::from_slice::<serde_json::Value>(&check.stdout)
            .ok()
            .and_then(|v| v["aggregates"]["mean"].as_f64());
        lines.push(match mean {
            Some(m) => format!(
                "{name}: {m:.2} vs {published:.2} ({})",
                if (m - published).abs() <= 0.05 {
                    "within 0.05"
                } else {
                    "outside 0.05"
                }
            ),
            None => format!("{name}: check failed"),
        });
    }
    Some(lines.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("alignment optimality", alignment_optimality),
        ("fitness bounds and characterization", fitness_bounds),
        ("generation implies fit", generation_implies_fit),
        ("Q->END penalty", q_end_penalty),
        ("discovery round-trip", discovery_round_trip),
        ("succession oracle", succession_oracle),
        ("episode oracle", episode_oracle),
        ("evaluation arithmetic", evaluation_arithmetic),
        ("CLI determinism", cli_determinism),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    match dataset_reproduction() {
        Some(detail) => println!("INFO dataset reproduction: {detail}"),
        None => println!("SKIP dataset reproduction: set CONVMINE_DATASET_DIR to run"),
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
