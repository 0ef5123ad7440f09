//! Instruction-record construction: ingest aligned source files, render the
//! four prompt variants, and write one record file per training stage.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataflow::{extract_dfg, DfgOptions};
use crate::dedup::{dedup_pairs, DedupConfig, DropReport};
use crate::encoding::{encode_ast, encode_dfg};
use crate::lang::LanguageId;
use crate::syntax::{parse, simplify, SourceUnit};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("manifest not found: {0}")]
    ManifestMissing(PathBuf),
    #[error("malformed manifest line {line}: {reason}")]
    MalformedManifestLine { line: usize, reason: String },
    #[error("pair {pair_id} has no natural-language description")]
    MissingNlDescription { pair_id: String },
    #[error("could not encode {stage} input: {reason}")]
    EncodingFailed { stage: StageId, reason: String },
    #[error("invalid pair: {0}")]
    InvalidPair(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelPair {
    pub pair_id: String,
    pub src_lang: LanguageId,
    pub tgt_lang: LanguageId,
    pub src_code: String,
    pub tgt_code: String,
    pub nl_description: Option<String>,
}

impl ParallelPair {
    pub fn new(
        pair_id: impl Into<String>,
        src_lang: LanguageId,
        tgt_lang: LanguageId,
        src_code: impl Into<String>,
        tgt_code: impl Into<String>,
        nl_description: Option<String>,
    ) -> Result<Self, DatasetError> {
        let pair = ParallelPair {
            pair_id: pair_id.into(),
            src_lang,
            tgt_lang,
            src_code: src_code.into(),
            tgt_code: tgt_code.into(),
            nl_description,
        };
        if pair.src_lang == pair.tgt_lang {
            return Err(DatasetError::InvalidPair(format!(
                "{}: source and target are both {}",
                pair.pair_id, pair.src_lang
            )));
        }
        if pair.src_code.trim().is_empty() || pair.tgt_code.trim().is_empty() {
            return Err(DatasetError::InvalidPair(format!(
                "{}: empty code",
                pair.pair_id
            )));
        }
        Ok(pair)
    }
}

/// Training stage, in curriculum order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageId {
    Code,
    Fs,
    Ss,
    Vd,
}

impl StageId {
    pub const ALL: [StageId; 4] = [StageId::Code, StageId::Fs, StageId::Ss, StageId::Vd];

    pub fn name(self) -> &'static str {
        match self {
            StageId::Code => "code",
            StageId::Fs => "fs",
            StageId::Ss => "ss",
            StageId::Vd => "vd",
        }
    }

    /// Stem of the stage's record file.
    pub fn file_stem(self) -> &'static str {
        match self {
            StageId::Code => "stage1_code",
            StageId::Fs => "stage2_fs",
            StageId::Ss => "stage3_ss",
            StageId::Vd => "stage4_vd",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.jsonl", self.file_stem())
    }
}

impl std::fmt::Display for StageId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StageId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "code" => Ok(StageId::Code),
            "fs" => Ok(StageId::Fs),
            "ss" => Ok(StageId::Ss),
            "vd" => Ok(StageId::Vd),
            other => Err(format!("unknown stage {other:?} (expected code, fs, ss or vd)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub pair_id: String,
    pub src_lang: LanguageId,
    pub tgt_lang: LanguageId,
    pub stage: StageId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub instruction: String,
    pub input: String,
    pub output: String,
    pub meta: RecordMeta,
}

/// Prompt templates with `{src}` and `{tgt}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplates {
    pub code: String,
    pub fs: String,
    pub ss: String,
    pub vd: String,
    pub eval: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            code: include_str!("../resources/templates/code.txt").to_string(),
            fs: include_str!("../resources/templates/fs.txt").to_string(),
            ss: include_str!("../resources/templates/ss.txt").to_string(),
            vd: include_str!("../resources/templates/vd.txt").to_string(),
            eval: include_str!("../resources/templates/eval.txt").to_string(),
        }
    }
}

impl PromptTemplates {
    /// Defaults, with any of `code.txt`, `fs.txt`, `ss.txt`, `vd.txt`,
    /// `eval.txt` found in `dir` replacing the built-in text.
    pub fn with_overrides(dir: &Path) -> Result<Self, DatasetError> {
        let mut t = PromptTemplates::default();
        for (name, slot) in [
            ("code", &mut t.code),
            ("fs", &mut t.fs),
            ("ss", &mut t.ss),
            ("vd", &mut t.vd),
            ("eval", &mut t.eval),
        ] {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                *slot = fs::read_to_string(path)?.trim_end_matches(['\n', '\r']).to_string();
            }
        }
        Ok(t)
    }

    pub fn for_stage(&self, stage: StageId) -> &str {
        match stage {
            StageId::Code => &self.code,
            StageId::Fs => &self.fs,
            StageId::Ss => &self.ss,
            StageId::Vd => &self.vd,
        }
    }

    pub fn instruction(&self, stage: StageId, src: LanguageId, tgt: LanguageId) -> String {
        fill(self.for_stage(stage), src, tgt)
    }
}

fn fill(template: &str, src: LanguageId, tgt: LanguageId) -> String {
    template.replace("{src}", src.name()).replace("{tgt}", tgt.name())
}

fn trim_newlines(s: &str) -> &str {
    s.trim_end_matches(['\n', '\r'])
}

fn code_block(code: &str) -> String {
    format!("<Code>\n{}\n</Code>", trim_newlines(code))
}

/// Render one pair as the record of the given stage.
pub fn render_record(
    pair: &ParallelPair,
    stage: StageId,
    templates: &PromptTemplates,
) -> Result<InstructionRecord, DatasetError> {
    let mut input = code_block(&pair.src_code);
    match stage {
        StageId::Code => {}
        StageId::Fs => {
            let nl = pair
                .nl_description
                .as_deref()
                .filter(|s| !s.trim().is_empty())
                .ok_or_else(|| DatasetError::MissingNlDescription {
                    pair_id: pair.pair_id.clone(),
                })?;
            input.push_str(&format!("\n\n<NL>\n{}\n</NL>", trim_newlines(nl)));
        }
        StageId::Ss | StageId::Vd => {
            let fail = |e: crate::syntax::SyntaxError| DatasetError::EncodingFailed {
                stage,
                reason: e.to_string(),
            };
            let unit = SourceUnit::new(pair.src_lang, pair.src_code.clone(), pair.pair_id.clone())
                .map_err(fail)?;
            let tree = parse(&unit).map_err(fail)?;
            if stage == StageId::Ss {
                let text = encode_ast(&simplify(&tree));
                input.push_str(&format!("\n<AST>\n{}\n</AST>", trim_newlines(&text.text)));
            } else {
                let text = encode_dfg(&extract_dfg(&tree, &DfgOptions::default()));
                input.push_str(&format!("\n\n<DFG>\n{}\n</DFG>", trim_newlines(&text.text)));
            }
        }
    }
    Ok(InstructionRecord {
        instruction: templates.instruction(stage, pair.src_lang, pair.tgt_lang),
        input,
        output: format!("```{}\n{}\n```", pair.tgt_lang.name(), trim_newlines(&pair.tgt_code)),
        meta: RecordMeta {
            pair_id: pair.pair_id.clone(),
            src_lang: pair.src_lang,
            tgt_lang: pair.tgt_lang,
            stage,
        },
    })
}

/// Single-turn prompt used when asking a model for a translation.
pub fn render_eval_prompt(
    templates: &PromptTemplates,
    src: LanguageId,
    tgt: LanguageId,
    code: &str,
) -> String {
    format!("{}\n\n{}", fill(&templates.eval, src, tgt), code_block(code))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedEntry {
    pub line: usize,
    pub pair_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub pairs: Vec<ParallelPair>,
    pub skipped: Vec<SkippedEntry>,
}

fn language_of(path: &str, line: usize) -> Result<LanguageId, DatasetError> {
    let ext = Path::new(path)
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default();
    LanguageId::from_extension(ext).map_err(|e| DatasetError::MalformedManifestLine {
        line,
        reason: format!("{path}: {e}"),
    })
}

/// Read a manifest of `pair_id<TAB>src_file<TAB>tgt_file[<TAB>nl_file]`
/// lines. Paths are relative to `root`. Blank lines and lines starting with
/// `#` are ignored. Rows whose files cannot be read are skipped and listed in
/// the report.
pub fn ingest_pairs(root: &Path, manifest: &Path) -> Result<IngestReport, DatasetError> {
    let text = match fs::read_to_string(manifest) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(DatasetError::ManifestMissing(manifest.to_path_buf()))
        }
        Err(e) => return Err(e.into()),
    };
    let mut report = IngestReport::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(DatasetError::MalformedManifestLine {
                line,
                reason: format!("expected 3 or 4 tab-separated fields, found {}", fields.len()),
            });
        }
        let pair_id = fields[0].trim();
        if pair_id.is_empty() {
            return Err(DatasetError::MalformedManifestLine {
                line,
                reason: "empty pair id".into(),
            });
        }
        let src_lang = language_of(fields[1], line)?;
        let tgt_lang = language_of(fields[2], line)?;
        if src_lang == tgt_lang {
            return Err(DatasetError::MalformedManifestLine {
                line,
                reason: format!("source and target are both {src_lang}"),
            });
        }
        let read = |rel: &str| fs::read_to_string(root.join(rel.trim()));
        let mut skip = |reason: String| {
            report.skipped.push(SkippedEntry {
                line,
                pair_id: pair_id.to_string(),
                reason,
            })
        };
        let src = match read(fields[1]) {
            Ok(s) => s,
            Err(e) => {
                skip(format!("{}: {e}", fields[1]));
                continue;
            }
        };
        let tgt = match read(fields[2]) {
            Ok(s) => s,
            Err(e) => {
                skip(format!("{}: {e}", fields[2]));
                continue;
            }
        };
        let nl = match fields.get(3).map(|f| f.trim()).filter(|f| !f.is_empty()) {
            Some(f) => match read(f) {
                Ok(s) => Some(s),
                Err(e) => {
                    skip(format!("{f}: {e}"));
                    continue;
                }
            },
            None => None,
        };
        match ParallelPair::new(pair_id, src_lang, tgt_lang, src, tgt, nl) {
            Ok(p) => report.pairs.push(p),
            Err(e) => skip(e.to_string()),
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFile {
    pub stage: StageId,
    pub file: String,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    /// Stages in training order.
    pub order: Vec<StageId>,
    pub stages: Vec<StageFile>,
    pub total_records: usize,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Write every record to the file of its stage (one JSON object per line)
/// plus `manifest.json`. All four stage files are created, empty ones
/// included.
pub fn emit_stages(
    records: &[InstructionRecord],
    out_dir: &Path,
) -> Result<DatasetManifest, DatasetError> {
    fs::create_dir_all(out_dir)?;
    let mut by_stage: BTreeMap<StageId, Vec<&InstructionRecord>> = BTreeMap::new();
    for r in records {
        by_stage.entry(r.meta.stage).or_default().push(r);
    }
    let mut stages = Vec::new();
    for stage in StageId::ALL {
        let file = stage.file_name();
        let mut w = BufWriter::new(File::create(out_dir.join(&file))?);
        let rows = by_stage.get(&stage).map(Vec::as_slice).unwrap_or_default();
        for r in rows {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        stages.push(StageFile {
            stage,
            file,
            records: rows.len(),
        });
    }
    let manifest = DatasetManifest {
        order: StageId::ALL.to_vec(),
        total_records: records.len(),
        stages,
    };
    let mut w = BufWriter::new(File::create(out_dir.join(MANIFEST_FILE))?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderFailure {
    pub pair_id: String,
    pub stage: StageId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub manifest: DatasetManifest,
    pub ingested: usize,
    pub skipped: Vec<SkippedEntry>,
    pub retained_pairs: usize,
    pub dedup: Option<DropReport>,
    pub render_failures: Vec<RenderFailure>,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub stages: Vec<StageId>,
    pub dedup: Option<DedupConfig>,
    pub templates: PromptTemplates,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            stages: StageId::ALL.to_vec(),
            dedup: Some(DedupConfig::default()),
            templates: PromptTemplates::default(),
        }
    }
}

/// Ingest, deduplicate, render and emit. Pairs that cannot be rendered for
/// a stage (no description for `fs`) are left out of that stage only.
pub fn build_dataset(
    root: &Path,
    manifest: &Path,
    out_dir: &Path,
    options: &BuildOptions,
) -> Result<BuildSummary, DatasetError> {
    let ingest = ingest_pairs(root, manifest)?;
    let ingested = ingest.pairs.len();
    let (pairs, dedup) = match &options.dedup {
        Some(cfg) => {
            let (kept, report) = dedup_pairs(ingest.pairs, cfg);
            (kept, Some(report))
        }
        None => (ingest.pairs, None),
    };
    let mut stages = options.stages.clone();
    stages.sort();
    stages.dedup();
    let rendered: Vec<Result<InstructionRecord, RenderFailure>> = pairs
        .par_iter()
        .flat_map_iter(|p| {
            stages.iter().map(move |&s| {
                render_record(p, s, &options.templates).map_err(|e| RenderFailure {
                    pair_id: p.pair_id.clone(),
                    stage: s,
                    reason: e.to_string(),
                })
            })
        })
        .collect();
    let mut records = Vec::with_capacity(rendered.len());
    let mut render_failures = Vec::new();
    for r in rendered {
        match r {
            Ok(rec) => records.push(rec),
            Err(f) => render_failures.push(f),
        }
    }
    let manifest = emit_stages(&records, out_dir)?;
    Ok(BuildSummary {
        manifest,
        ingested,
        skipped: ingest.skipped,
        retained_pairs: pairs.len(),
        dedup,
        render_failures,
    })
}
