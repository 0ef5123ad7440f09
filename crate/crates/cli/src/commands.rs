use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use execrep::dataset::{build_dataset, render_eval_prompt, BuildOptions, DatasetError, PromptTemplates, StageId};
use execrep::encoding::{encode_ast, encode_dfg};
use execrep::gateway::{Gateway, TranslationRequest};
use execrep::harness::{
    aggregate, evaluate_all, load_benchmark, AggregateReport, BenchmarkSample, Direction, ExecOutcome, ExecStatus,
    GeneratedSolution, HarnessError,
};
use execrep::metrics::{metric_rows, MetricRow, MetricsError, ScoredPair};
use execrep::{extract_dfg, parse, simplify, DfgOptions, LanguageId, SourceUnit, SyntaxError};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::CliConfig;
use crate::lock::OutputLock;
use crate::CliError;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Operational(format!("{}: {e}", path.display()))
}

impl From<SyntaxError> for CliError {
    fn from(e: SyntaxError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(_) | DatasetError::Json(_) => CliError::Operational(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::ToolchainMissing(..) | HarnessError::SandboxFailure(_) | HarnessError::Io(_) => {
                CliError::Operational(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Repr {
    Ast,
    Dfg,
}

pub struct ExtractArgs {
    pub file: PathBuf,
    pub lang: Option<LanguageId>,
    pub repr: Repr,
    pub literals: bool,
    pub keep_isolated: bool,
}

pub fn extract(args: &ExtractArgs) -> Result<String, CliError> {
    let lang = match args.lang {
        Some(l) => l,
        None => {
            let ext = args.file.extension().and_then(|e| e.to_str()).unwrap_or_default();
            LanguageId::from_extension(ext).map_err(|e| CliError::Input(format!("{e}; pass --lang")))?
        }
    };
    let bytes = std::fs::read(&args.file).map_err(|e| CliError::Input(format!("{}: {e}", args.file.display())))?;
    let unit = SourceUnit::from_bytes(lang, &bytes, args.file.to_string_lossy())?;
    let tree = parse(&unit)?;
    if tree.had_errors {
        log::warn!("{}: source has syntax errors; encoding the recovered tree", args.file.display());
    }
    let text = match args.repr {
        Repr::Ast => encode_ast(&simplify(&tree)),
        Repr::Dfg => encode_dfg(&extract_dfg(
            &tree,
            &DfgOptions {
                include_literals: args.literals,
                prune_isolated: !args.keep_isolated,
            },
        )),
    };
    Ok(text.text)
}

pub struct BuildArgs {
    pub manifest: PathBuf,
    pub root: Option<PathBuf>,
    pub out: PathBuf,
    pub stages: Vec<StageId>,
    pub dedup: bool,
    pub threshold: Option<f64>,
}

pub fn templates(cfg: &CliConfig) -> Result<PromptTemplates, CliError> {
    match &cfg.templates_dir {
        Some(dir) => Ok(PromptTemplates::with_overrides(dir)?),
        None => Ok(PromptTemplates::default()),
    }
}

pub fn build(args: &BuildArgs, cfg: &CliConfig) -> Result<Value, CliError> {
    std::fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    let _lock = OutputLock::acquire(&args.out.join(".execrep.lock"))?;
    let root = match &args.root {
        Some(r) => r.clone(),
        None => args.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let mut dedup = cfg.dedup.clone();
    if let Some(t) = args.threshold {
        if !(t > 0.0 && t <= 1.0) {
            return Err(CliError::Input(format!("dedup threshold must be in (0, 1], got {t}")));
        }
        dedup.threshold = t;
    }
    let options = BuildOptions {
        stages: if args.stages.is_empty() { StageId::ALL.to_vec() } else { args.stages.clone() },
        dedup: args.dedup.then_some(dedup),
        templates: templates(cfg)?,
    };
    let summary = build_dataset(&root, &args.manifest, &args.out, &options)?;
    if let Some(report) = &summary.dedup {
        let path = args.out.join("dedup_report.json");
        let f = File::create(&path).map_err(io_err(&path))?;
        serde_json::to_writer_pretty(f, report).map_err(|e| CliError::Operational(e.to_string()))?;
    }
    for f in &summary.render_failures {
        log::warn!("{} not rendered for stage {}: {}", f.pair_id, f.stage, f.reason);
    }
    Ok(serde_json::json!({
        "ingested": summary.ingested,
        "skipped": summary.skipped,
        "retained_pairs": summary.retained_pairs,
        "dropped": summary.dedup.as_ref().map_or(0, |d| d.entries.len()),
        "render_failures": summary.render_failures.len(),
        "manifest": summary.manifest,
    }))
}

/// One translation job: the source function and the direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationTask {
    pub sample_id: String,
    pub src_lang: LanguageId,
    pub tgt_lang: LanguageId,
    pub source: String,
}

/// One line of a solutions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub sample_id: String,
    pub src_lang: LanguageId,
    pub tgt_lang: LanguageId,
    /// Extracted function; `null` when the reply had no code block.
    pub function_text: Option<String>,
    #[serde(default)]
    pub raw_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Value>,
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let f = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| CliError::Input(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

pub enum TaskSource {
    File(PathBuf),
    Bench { root: PathBuf, from: LanguageId, to: LanguageId },
}

fn tasks(source: &TaskSource) -> Result<Vec<TranslationTask>, CliError> {
    match source {
        TaskSource::File(p) => read_jsonl(p),
        TaskSource::Bench { root, from, to } => {
            if from == to {
                return Err(CliError::Input("source and target language must differ".into()));
            }
            load_benchmark(root, *from)?
                .into_iter()
                .map(|s| {
                    let source = s.gold_function.ok_or_else(|| {
                        CliError::Input(format!("{}: no reference function under {}_gold", s.sample_id, from.name()))
                    })?;
                    Ok(TranslationTask { sample_id: s.sample_id, src_lang: *from, tgt_lang: *to, source })
                })
                .collect()
        }
    }
}

type Key = (LanguageId, LanguageId, String);

pub struct TranslateArgs {
    pub source: TaskSource,
    pub out: PathBuf,
    pub resume: bool,
}

pub fn translate(args: &TranslateArgs, cfg: &CliConfig) -> Result<Value, CliError> {
    let _lock = OutputLock::for_file(&args.out)?;
    let all = tasks(&args.source)?;
    let done: HashSet<Key> = if args.resume && args.out.exists() {
        read_jsonl::<SolutionRecord>(&args.out)?
            .into_iter()
            .map(|r| (r.src_lang, r.tgt_lang, r.sample_id))
            .collect()
    } else {
        HashSet::new()
    };
    let templates = templates(cfg)?;
    let mut by_id: BTreeMap<String, Vec<TranslationTask>> = BTreeMap::new();
    let mut reqs = Vec::new();
    for (i, t) in all.into_iter().enumerate() {
        if done.contains(&(t.src_lang, t.tgt_lang, t.sample_id.clone())) {
            continue;
        }
        // Request ids must be unique even when one sample goes several ways.
        let rid = format!("{i}:{}", t.sample_id);
        reqs.push(TranslationRequest {
            sample_id: rid.clone(),
            prompt: render_eval_prompt(&templates, t.src_lang, t.tgt_lang, &t.source),
            target: t.tgt_lang,
        });
        by_id.entry(rid).or_default().push(t);
    }
    let skipped = done.len();
    let gateway = Arc::new(Gateway::new(cfg.gateway.clone()).map_err(|e| CliError::Input(e.to_string()))?);
    let mut file = OpenOptions::new()
        .create(true)
        .append(args.resume)
        .write(true)
        .truncate(!args.resume)
        .open(&args.out)
        .map_err(io_err(&args.out))?;
    let (mut written, mut failed, mut no_code) = (0usize, Vec::new(), 0usize);
    let mut write_err = None;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Operational(e.to_string()))?;
    runtime.block_on(gateway.translate_all(reqs, |rid, res| {
        let task = &by_id[&rid][0];
        match res {
            Ok(r) => {
                no_code += r.extracted_code.is_none() as usize;
                let rec = SolutionRecord {
                    sample_id: task.sample_id.clone(),
                    src_lang: task.src_lang,
                    tgt_lang: task.tgt_lang,
                    function_text: r.extracted_code,
                    raw_text: r.raw_text,
                    usage: r.usage,
                };
                let line = serde_json::to_string(&rec).expect("record serializes");
                if let Err(e) = writeln!(file, "{line}").and_then(|_| file.flush()) {
                    write_err.get_or_insert(e);
                }
                written += 1;
            }
            Err(e) => {
                log::error!("{}: {e}", task.sample_id);
                failed.push(task.sample_id.clone());
            }
        }
    }));
    if let Some(e) = write_err {
        return Err(io_err(&args.out)(e));
    }
    if !failed.is_empty() {
        return Err(CliError::Operational(format!(
            "{} of {} requests failed ({} written); rerun with --resume to retry",
            failed.len(),
            failed.len() + written,
            written
        )));
    }
    Ok(serde_json::json!({ "written": written, "skipped": skipped, "without_code": no_code }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Exec,
    Match,
    Both,
}

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub solutions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exec: Option<AggregateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r#match: Option<MatchReport>,
}

#[derive(Debug, Serialize)]
pub struct MatchReport {
    /// How exact match compares texts.
    pub em_granularity: &'static str,
    pub rows: Vec<MetricRow>,
}

fn no_code(sample_id: &str, canonical_total: u32) -> ExecOutcome {
    ExecOutcome {
        sample_id: sample_id.to_string(),
        compiled: false,
        n_success: 0,
        n_total: canonical_total,
        status: ExecStatus::CompileError,
        renamed: false,
        diagnostics: "no function in solution".into(),
    }
}

pub struct EvalArgs {
    pub bench: PathBuf,
    pub solutions: PathBuf,
    pub mode: Mode,
}

pub fn eval(args: &EvalArgs, cfg: &CliConfig, jobs: usize) -> Result<EvalReport, CliError> {
    let sols: Vec<SolutionRecord> = read_jsonl(&args.solutions)?;
    if sols.is_empty() {
        return Err(HarnessError::EmptyDirection(format!("{} has no solutions", args.solutions.display())).into());
    }
    let langs: BTreeSet<LanguageId> = sols.iter().map(|s| s.tgt_lang).collect();
    let mut bench: BTreeMap<(LanguageId, String), BenchmarkSample> = BTreeMap::new();
    for lang in langs {
        for s in load_benchmark(&args.bench, lang)? {
            bench.insert((lang, s.sample_id.clone()), s);
        }
    }
    let sample = |s: &SolutionRecord| {
        bench.get(&(s.tgt_lang, s.sample_id.clone())).ok_or_else(|| {
            CliError::Input(format!("{}: not in the {} benchmark", s.sample_id, s.tgt_lang.name()))
        })
    };
    let directions: Vec<Direction> = sols
        .iter()
        .map(|s| Direction { src: s.src_lang, tgt: s.tgt_lang })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let exec = if args.mode != Mode::Match {
        let mut jobs_list = Vec::new();
        let mut outcomes: Vec<Option<(Direction, ExecOutcome)>> = Vec::new();
        for s in &sols {
            let b = sample(s)?;
            let dir = Direction { src: s.src_lang, tgt: s.tgt_lang };
            match s.function_text.as_deref().filter(|t| !t.trim().is_empty()) {
                Some(text) => {
                    jobs_list.push((
                        b.clone(),
                        GeneratedSolution { sample_id: s.sample_id.clone(), lang: s.tgt_lang, function_text: text.to_string() },
                    ));
                    outcomes.push(None);
                }
                None => outcomes.push(Some((dir, no_code(&s.sample_id, cfg.harness.canonical_total)))),
            }
        }
        let mut results = evaluate_all(&jobs_list, &cfg.harness, jobs).into_iter();
        let mut all = Vec::with_capacity(sols.len());
        for (s, slot) in sols.iter().zip(outcomes) {
            match slot {
                Some(o) => all.push(o),
                None => all.push((Direction { src: s.src_lang, tgt: s.tgt_lang }, results.next().expect("one result per job")?)),
            }
        }
        Some(aggregate(&all, &directions, cfg.harness.canonical_total)?)
    } else {
        None
    };

    let matched = if args.mode != Mode::Exec {
        let mut pairs = Vec::new();
        for s in &sols {
            let b = sample(s)?;
            let reference = b.gold_function.clone().ok_or_else(|| {
                CliError::Input(format!("{}: no reference function under {}_gold", s.sample_id, s.tgt_lang.name()))
            })?;
            pairs.push(ScoredPair {
                sample_id: s.sample_id.clone(),
                src_lang: s.src_lang,
                tgt_lang: s.tgt_lang,
                reference,
                hypothesis: s.function_text.clone().unwrap_or_default(),
            });
        }
        Some(MatchReport { em_granularity: "token", rows: metric_rows(&pairs)? })
    } else {
        None
    };
    Ok(EvalReport { solutions: sols.len(), exec, r#match: matched })
}
