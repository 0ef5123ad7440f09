//! Unit-test execution harness: splice a translated function into a
//! benchmark template, compile and run it in a child process group with
//! time and output limits, and aggregate CA / CCA / TCA.

use std::collections::BTreeMap;
use std::io::Read;
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};
use std::sync::LazyLock;
use std::thread;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::lang::LanguageId;
use crate::syntax::{parse, SourceUnit};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("template for {sample_id} has {found} fill markers, expected exactly one")]
    MarkerMissing { sample_id: String, found: usize },
    #[error("solution for {sample_id} is {solution}, template is {template}")]
    LanguageMismatch {
        sample_id: String,
        template: LanguageId,
        solution: LanguageId,
    },
    #[error("solution is for {solution}, sample is {sample}")]
    SampleMismatch { sample: String, solution: String },
    #[error("solution for {0} is empty")]
    EmptySolution(String),
    #[error("no toolchain for {0}: {1}")]
    ToolchainMissing(LanguageId, String),
    #[error("sandbox failure: {0}")]
    SandboxFailure(String),
    #[error("no outcomes for direction {0}")]
    EmptyDirection(String),
    #[error("benchmark layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkSample {
    pub sample_id: String,
    pub lang: LanguageId,
    pub template: String,
    pub gold_function: Option<String>,
}

impl BenchmarkSample {
    pub fn new(
        sample_id: impl Into<String>,
        lang: LanguageId,
        template: impl Into<String>,
        gold_function: Option<String>,
    ) -> Result<Self, HarnessError> {
        let s = BenchmarkSample {
            sample_id: sample_id.into(),
            lang,
            template: template.into(),
            gold_function,
        };
        let found = s.template.matches(lang.fill_marker()).count();
        if found != 1 {
            return Err(HarnessError::MarkerMissing {
                sample_id: s.sample_id,
                found,
            });
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedSolution {
    pub sample_id: String,
    pub lang: LanguageId,
    pub function_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecStatus {
    Ok,
    CompileError,
    RuntimeError,
    Timeout,
    ResultsLineMissing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecOutcome {
    pub sample_id: String,
    pub compiled: bool,
    pub n_success: u32,
    pub n_total: u32,
    pub status: ExecStatus,
    /// Whether the solution's function was renamed to the expected callee.
    #[serde(default)]
    pub renamed: bool,
    /// Tail of the compiler or program diagnostics, for inspection.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub diagnostics: String,
}

impl ExecOutcome {
    pub fn results_known(&self) -> bool {
        self.status == ExecStatus::Ok
    }
}

/// Replace the fill marker of the template with the function text.
pub fn splice(sample: &BenchmarkSample, sol: &GeneratedSolution) -> Result<String, HarnessError> {
    if sol.sample_id != sample.sample_id {
        return Err(HarnessError::SampleMismatch {
            sample: sample.sample_id.clone(),
            solution: sol.sample_id.clone(),
        });
    }
    if sol.lang != sample.lang {
        return Err(HarnessError::LanguageMismatch {
            sample_id: sample.sample_id.clone(),
            template: sample.lang,
            solution: sol.lang,
        });
    }
    if sol.function_text.trim().is_empty() {
        return Err(HarnessError::EmptySolution(sol.sample_id.clone()));
    }
    let marker = sample.lang.fill_marker();
    let found = sample.template.matches(marker).count();
    if found != 1 {
        return Err(HarnessError::MarkerMissing {
            sample_id: sample.sample_id.clone(),
            found,
        });
    }
    Ok(sample.template.replacen(marker, &sol.function_text, 1))
}

fn function_name(lang: LanguageId, text: &str) -> Option<String> {
    // Java methods only parse inside a class body.
    let wrapped = match lang {
        LanguageId::Java => format!("class __W {{\n{text}\n}}"),
        _ => text.to_string(),
    };
    let tree = parse(&SourceUnit::new(lang, wrapped, "").ok()?).ok()?;
    let container = match lang {
        LanguageId::Java => {
            let class = tree.named_children(tree.root).find(|&c| tree.kind(c) == "class_declaration")?;
            tree.child_by_field(class, "body")?
        }
        _ => tree.root,
    };
    let mut names = Vec::new();
    for c in tree.named_children(container) {
        let def = match (lang, tree.kind(c)) {
            (LanguageId::Python, "decorated_definition") => tree.child_by_field(c, "definition"),
            (LanguageId::Python, "function_definition") | (LanguageId::Java, "method_declaration") => Some(c),
            (LanguageId::Cpp, "function_definition") => Some(c),
            (LanguageId::Cpp, "template_declaration") => tree
                .named_children(c)
                .find(|&d| tree.kind(d) == "function_definition"),
            _ => None,
        };
        let Some(def) = def else { continue };
        let name = match lang {
            LanguageId::Cpp => {
                let mut d = tree.child_by_field(def, "declarator");
                while let Some(n) = d {
                    if matches!(tree.kind(n), "identifier" | "field_identifier") {
                        break;
                    }
                    d = tree.child_by_field(n, "declarator");
                }
                d
            }
            _ => tree.child_by_field(def, "name"),
        };
        if let Some(n) = name {
            names.push(n);
        }
    }
    if names.len() != 1 {
        return None;
    }
    Some(tree.text(names[0]).to_string())
}

/// Rename the single top-level function of `text` (and its recursive
/// calls) to `callee`. Returns `None` when there is not exactly one
/// top-level function or it already has that name.
pub fn rename_function(lang: LanguageId, text: &str, callee: &str) -> Option<String> {
    let old = function_name(lang, text)?;
    if old == callee {
        return None;
    }
    let tree = parse(&SourceUnit::new(lang, text, "").ok()?).ok()?;
    let mut out = String::with_capacity(text.len());
    let mut at = 0;
    for leaf in tree.leaves_under(tree.root) {
        let node = &tree.nodes[leaf];
        if matches!(node.kind, "identifier" | "field_identifier") && tree.text(leaf) == old {
            out.push_str(&text[at..node.span.start]);
            out.push_str(callee);
            at = node.span.end;
        }
    }
    out.push_str(&text[at..]);
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Toolchain {
    /// Compile command; absent for interpreted languages without a check.
    /// Placeholders: `{src}` source file, `{out}` output binary, `{dir}`
    /// working directory, `{class}` Java main class.
    pub compile: Option<Vec<String>>,
    pub run: Vec<String>,
}

fn argv(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl Toolchain {
    pub fn default_for(lang: LanguageId) -> Self {
        match lang {
            LanguageId::Cpp => Toolchain {
                compile: Some(argv(&["g++", "-std=c++17", "-O1", "-o", "{out}", "{src}"])),
                run: argv(&["{out}"]),
            },
            LanguageId::Java => Toolchain {
                compile: Some(argv(&["javac", "-d", "{dir}", "{src}"])),
                run: argv(&["java", "-cp", "{dir}", "{class}"]),
            },
            LanguageId::Python => Toolchain {
                compile: Some(argv(&["python3", "-m", "py_compile", "{src}"])),
                run: argv(&["python3", "{src}"]),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    pub compile_timeout_secs: f64,
    pub run_timeout_secs: f64,
    /// Bytes of stdout / stderr kept per phase; the rest is discarded.
    pub output_cap_bytes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            compile_timeout_secs: 30.0,
            run_timeout_secs: 20.0,
            output_cap_bytes: 256 * 1024 * 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub cpp: Toolchain,
    pub java: Toolchain,
    pub python: Toolchain,
    pub limits: Limits,
    /// Rename a lone generated function to this callee before splicing.
    pub rename_to: Option<String>,
    /// Case count assumed for samples whose results line was not seen.
    pub canonical_total: u32,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            cpp: Toolchain::default_for(LanguageId::Cpp),
            java: Toolchain::default_for(LanguageId::Java),
            python: Toolchain::default_for(LanguageId::Python),
            limits: Limits::default(),
            rename_to: Some("f_filled".into()),
            canonical_total: 10,
        }
    }
}

impl HarnessConfig {
    pub fn toolchain(&self, lang: LanguageId) -> &Toolchain {
        match lang {
            LanguageId::Cpp => &self.cpp,
            LanguageId::Java => &self.java,
            LanguageId::Python => &self.python,
        }
    }
}

static RESULTS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#Results:\s*(\d+)\s*,\s*(\d+)").unwrap());

/// `(n_success, n_total)` from the last results line of the output.
pub fn parse_results(stdout: &str) -> Option<(u32, u32)> {
    let c = RESULTS.captures_iter(stdout).last()?;
    Some((c[1].parse().ok()?, c[2].parse().ok()?))
}

#[derive(Debug)]
pub struct ProcessResult {
    pub status: Option<ExitStatus>,
    pub timed_out: bool,
    pub stdout: String,
    pub stderr: String,
}

fn read_capped(mut r: impl Read + Send + 'static, cap: u64) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut kept = Vec::new();
        let mut buf = [0u8; 8192];
        loop {
            match r.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = cap.saturating_sub(kept.len() as u64) as usize;
                    kept.extend_from_slice(&buf[..n.min(room)]);
                }
            }
        }
        kept
    })
}

fn kill_group(pid: u32) {
    // SAFETY: signalling a process group we created; a stale id only
    // yields ESRCH.
    unsafe {
        libc::killpg(pid as libc::pid_t, libc::SIGKILL);
    }
}

fn resolve_program(name: &str) -> Option<PathBuf> {
    let p = Path::new(name);
    if p.components().count() > 1 {
        return p.exists().then(|| p.to_path_buf());
    }
    std::env::var_os("PATH").and_then(|paths| {
        std::env::split_paths(&paths)
            .map(|d| d.join(name))
            .find(|c| c.is_file())
    })
}

/// Run a command in its own process group, killing the whole group when
/// the time limit passes.
pub fn run_limited(cmd: &[String], cwd: &Path, timeout: Duration, cap: u64) -> Result<ProcessResult, HarnessError> {
    let (prog, args) = cmd
        .split_first()
        .ok_or_else(|| HarnessError::SandboxFailure("empty command".into()))?;
    let mut child = Command::new(prog)
        .args(args)
        .current_dir(cwd)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0)
        .spawn()
        .map_err(|e| HarnessError::SandboxFailure(format!("{prog}: {e}")))?;
    let pid = child.id();
    let out = read_capped(child.stdout.take().expect("piped"), cap);
    let err = read_capped(child.stderr.take().expect("piped"), cap);
    let start = Instant::now();
    let mut timed_out = false;
    let status = loop {
        match child.try_wait()? {
            Some(s) => break Some(s),
            None if start.elapsed() >= timeout => {
                timed_out = true;
                kill_group(pid);
                child.wait()?;
                break None;
            }
            None => thread::sleep(Duration::from_millis(5)),
        }
    };
    // Stray descendants would otherwise keep the pipes open.
    kill_group(pid);
    let stdout = String::from_utf8_lossy(&out.join().unwrap_or_default()).into_owned();
    let stderr = String::from_utf8_lossy(&err.join().unwrap_or_default()).into_owned();
    Ok(ProcessResult {
        status,
        timed_out,
        stdout,
        stderr,
    })
}

static JAVA_CLASS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"public\s+(?:final\s+)?class\s+(\w+)").unwrap());

fn tail(s: &str) -> String {
    let lines: Vec<&str> = s.lines().collect();
    lines[lines.len().saturating_sub(20)..].join("\n")
}

/// Compile (or byte-compile) and run one program in a fresh temporary
/// directory.
pub fn compile_and_run(program: &str, lang: LanguageId, cfg: &HarnessConfig, sample_id: &str) -> Result<ExecOutcome, HarnessError> {
    let tc = cfg.toolchain(lang);
    for cmd in tc.compile.iter().chain(std::iter::once(&tc.run)) {
        if let Some(first) = cmd.first().filter(|f| !f.starts_with('{')) {
            if resolve_program(first).is_none() {
                return Err(HarnessError::ToolchainMissing(lang, first.clone()));
            }
        }
    }
    let dir = tempfile::Builder::new().prefix("execrep-run-").tempdir()?;
    let class = match lang {
        LanguageId::Java => JAVA_CLASS
            .captures(program)
            .map(|c| c[1].to_string())
            .unwrap_or_else(|| "Main".into()),
        _ => "main".into(),
    };
    let src = dir.path().join(format!("{class}.{}", lang.extension()));
    std::fs::write(&src, program)?;
    let out = dir.path().join("prog");
    let fill = |cmd: &[String]| -> Vec<String> {
        cmd.iter()
            .map(|a| {
                a.replace("{src}", &src.to_string_lossy())
                    .replace("{out}", &out.to_string_lossy())
                    .replace("{dir}", &dir.path().to_string_lossy())
                    .replace("{class}", &class)
            })
            .collect()
    };
    let limits = &cfg.limits;
    let outcome = |compiled, status, n: (u32, u32), diag: &str| ExecOutcome {
        sample_id: sample_id.to_string(),
        compiled,
        n_success: n.0.min(n.1),
        n_total: n.1,
        status,
        renamed: false,
        diagnostics: tail(diag),
    };
    if let Some(compile) = &tc.compile {
        let r = run_limited(
            &fill(compile),
            dir.path(),
            Duration::from_secs_f64(limits.compile_timeout_secs),
            limits.output_cap_bytes,
        )?;
        if r.timed_out {
            return Ok(outcome(false, ExecStatus::Timeout, (0, 0), "compile timed out"));
        }
        if !r.status.is_some_and(|s| s.success()) {
            return Ok(outcome(false, ExecStatus::CompileError, (0, 0), &r.stderr));
        }
    }
    let r = run_limited(
        &fill(&tc.run),
        dir.path(),
        Duration::from_secs_f64(limits.run_timeout_secs),
        limits.output_cap_bytes,
    )?;
    if r.timed_out {
        return Ok(outcome(true, ExecStatus::Timeout, (0, 0), "run timed out"));
    }
    match parse_results(&r.stdout) {
        Some(n) => Ok(outcome(true, ExecStatus::Ok, n, &r.stderr)),
        None if !r.status.is_some_and(|s| s.success()) => {
            Ok(outcome(true, ExecStatus::RuntimeError, (0, 0), &r.stderr))
        }
        None => Ok(outcome(true, ExecStatus::ResultsLineMissing, (0, 0), &r.stderr)),
    }
}

/// Splice, optionally rename, compile and run one solution.
pub fn evaluate_solution(sample: &BenchmarkSample, sol: &GeneratedSolution, cfg: &HarnessConfig) -> Result<ExecOutcome, HarnessError> {
    let mut sol = sol.clone();
    let mut renamed = false;
    if let Some(callee) = &cfg.rename_to {
        if let Some(text) = rename_function(sol.lang, &sol.function_text, callee) {
            sol.function_text = text;
            renamed = true;
        }
    }
    let program = splice(sample, &sol)?;
    let mut out = compile_and_run(&program, sample.lang, cfg, &sample.sample_id)?;
    out.renamed = renamed;
    Ok(out)
}

/// Evaluate many solutions on a bounded worker pool. Results keep the
/// input order.
pub fn evaluate_all(
    jobs: &[(BenchmarkSample, GeneratedSolution)],
    cfg: &HarnessConfig,
    workers: usize,
) -> Vec<Result<ExecOutcome, HarnessError>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        jobs.par_iter()
            .map(|(s, g)| evaluate_solution(s, g, cfg))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Direction {
    pub src: LanguageId,
    pub tgt: LanguageId,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} -> {}", self.src.display_name(), self.tgt.display_name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub label: String,
    pub samples: usize,
    pub ca: f64,
    /// Mean per-sample fraction of passed cases.
    pub cca: f64,
    /// Passed cases over all cases.
    pub cca_micro: f64,
    pub tca: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub rows: Vec<AggregateRow>,
}

impl AggregateReport {
    pub fn row(&self, label: &str) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

fn direction_row(label: String, outcomes: &[&ExecOutcome], canonical_total: u32) -> AggregateRow {
    let n = outcomes.len() as f64;
    let mut compiled = 0usize;
    let mut passed = 0usize;
    let mut ratio_sum = 0.0;
    let (mut succ, mut total) = (0u64, 0u64);
    for o in outcomes {
        let t = if o.results_known() { o.n_total } else { canonical_total };
        let s = if o.compiled && o.results_known() { o.n_success.min(t) } else { 0 };
        if o.compiled {
            compiled += 1;
        }
        if o.compiled && o.results_known() && o.n_total > 0 && o.n_success == o.n_total {
            passed += 1;
        }
        if t > 0 {
            ratio_sum += s as f64 / t as f64;
        }
        succ += s as u64;
        total += t as u64;
    }
    AggregateRow {
        label,
        samples: outcomes.len(),
        ca: compiled as f64 / n,
        cca: ratio_sum / n,
        cca_micro: if total == 0 { 0.0 } else { succ as f64 / total as f64 },
        tca: passed as f64 / n,
    }
}

fn mean_row(label: String, rows: &[&AggregateRow]) -> AggregateRow {
    let n = rows.len() as f64;
    let avg = |f: fn(&AggregateRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
    AggregateRow {
        label,
        samples: rows.iter().map(|r| r.samples).sum(),
        ca: avg(|r| r.ca),
        cca: avg(|r| r.cca),
        cca_micro: avg(|r| r.cca_micro),
        tca: avg(|r| r.tca),
    }
}

/// Per-direction rows, then "From X" / "To X" means over the directions
/// leaving or entering each language, then "Average" over directions.
pub fn aggregate(
    outcomes: &[(Direction, ExecOutcome)],
    directions: &[Direction],
    canonical_total: u32,
) -> Result<AggregateReport, HarnessError> {
    let mut by_dir: BTreeMap<Direction, Vec<&ExecOutcome>> = directions.iter().map(|d| (*d, Vec::new())).collect();
    for (d, o) in outcomes {
        by_dir.entry(*d).or_default().push(o);
    }
    if by_dir.is_empty() {
        return Err(HarnessError::EmptyDirection("(none)".into()));
    }
    let mut dir_rows = BTreeMap::new();
    for (d, os) in &by_dir {
        if os.is_empty() {
            return Err(HarnessError::EmptyDirection(d.to_string()));
        }
        dir_rows.insert(*d, direction_row(d.to_string(), os, canonical_total));
    }
    let mut rows: Vec<AggregateRow> = dir_rows.values().cloned().collect();
    for lang in LanguageId::ALL {
        let from: Vec<&AggregateRow> = dir_rows.iter().filter(|(d, _)| d.src == lang).map(|(_, r)| r).collect();
        if !from.is_empty() {
            rows.push(mean_row(format!("From {}", lang.display_name()), &from));
        }
        let to: Vec<&AggregateRow> = dir_rows.iter().filter(|(d, _)| d.tgt == lang).map(|(_, r)| r).collect();
        if !to.is_empty() {
            rows.push(mean_row(format!("To {}", lang.display_name()), &to));
        }
    }
    let all: Vec<&AggregateRow> = dir_rows.values().collect();
    rows.push(mean_row("Average".into(), &all));
    Ok(AggregateReport { rows })
}

/// Templates under `<root>/<lang>/<id>.<ext>`, gold functions (optional)
/// under `<root>/<lang>_gold/<id>.<ext>`. Samples are sorted by id.
pub fn load_benchmark(root: &Path, lang: LanguageId) -> Result<Vec<BenchmarkSample>, HarnessError> {
    let dir = root.join(lang.name());
    if !dir.is_dir() {
        return Err(HarnessError::Layout(format!("{} is not a directory", dir.display())));
    }
    let gold_dir = root.join(format!("{}_gold", lang.name()));
    let mut out = Vec::new();
    for entry in std::fs::read_dir(&dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some(lang.extension()) {
            continue;
        }
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| HarnessError::Layout(format!("bad file name {}", path.display())))?
            .to_string();
        let template = std::fs::read_to_string(&path)?;
        let gold_path = gold_dir.join(path.file_name().expect("file"));
        let gold = gold_path.is_file().then(|| std::fs::read_to_string(&gold_path)).transpose()?;
        out.push(BenchmarkSample::new(id, lang, template, gold)?);
    }
    out.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(compiled: bool, s: u32, t: u32, status: ExecStatus) -> ExecOutcome {
        ExecOutcome {
            sample_id: "x".into(),
            compiled,
            n_success: s,
            n_total: t,
            status,
            renamed: false,
            diagnostics: String::new(),
        }
    }

    #[test]
    fn results_line_parsing() {
        assert_eq!(parse_results("noise\n#Results: 7, 10"), Some((7, 10)));
        assert_eq!(parse_results("#Results:3,4\n#Results: 9 , 10\n"), Some((9, 10)));
        assert_eq!(parse_results("Results: 1, 2"), None);
    }

    #[test]
    fn aggregate_two_samples() {
        let d = Direction {
            src: LanguageId::Cpp,
            tgt: LanguageId::Python,
        };
        let report = aggregate(
            &[
                (d, outcome(true, 10, 10, ExecStatus::Ok)),
                (d, outcome(false, 0, 0, ExecStatus::CompileError)),
            ],
            &[d],
            10,
        )
        .unwrap();
        let r = &report.rows[0];
        assert_eq!((r.ca, r.cca, r.tca, r.cca_micro), (0.5, 0.5, 0.5, 0.5));
        assert_eq!(report.rows.last().unwrap().label, "Average");
    }

    #[test]
    fn empty_direction_is_an_error() {
        let d = Direction {
            src: LanguageId::Java,
            tgt: LanguageId::Cpp,
        };
        assert!(matches!(aggregate(&[], &[d], 10), Err(HarnessError::EmptyDirection(_))));
    }

    #[test]
    fn rename_cpp_and_python() {
        let cpp = "int f_gold ( int n ) { return n <= 1 ? 1 : n * f_gold ( n - 1 ) ; }";
        assert_eq!(
            rename_function(LanguageId::Cpp, cpp, "f_filled").unwrap(),
            "int f_filled ( int n ) { return n <= 1 ? 1 : n * f_filled ( n - 1 ) ; }"
        );
        let py = "def g(x):\n    return x + 1\n";
        assert_eq!(rename_function(LanguageId::Python, py, "f_filled").unwrap(), "def f_filled(x):\n    return x + 1\n");
        let two = "def a():\n    pass\ndef b():\n    pass\n";
        assert_eq!(rename_function(LanguageId::Python, two, "f_filled"), None);
        let java = "static int sq(int x) { return x * x; }";
        assert_eq!(rename_function(LanguageId::Java, java, "f_filled").unwrap(), "static int f_filled(int x) { return x * x; }");
    }

    #[test]
    fn splice_is_reversible() {
        let s = BenchmarkSample::new("a", LanguageId::Python, "import sys\n#TOFILL\nprint(1)\n", None).unwrap();
        let g = GeneratedSolution {
            sample_id: "a".into(),
            lang: LanguageId::Python,
            function_text: "def f_filled():\n    return 1\n".into(),
        };
        let p = splice(&s, &g).unwrap();
        assert_eq!(p.replacen(&g.function_text, LanguageId::Python.fill_marker(), 1), s.template);
        assert!(matches!(
            BenchmarkSample::new("b", LanguageId::Cpp, "int main(){}", None),
            Err(HarnessError::MarkerMissing { .. })
        ));
        let wrong = GeneratedSolution {
            lang: LanguageId::Cpp,
            ..g
        };
        assert!(matches!(splice(&s, &wrong), Err(HarnessError::LanguageMismatch { .. })));
    }

    #[test]
    fn timeout_kills_process_group() {
        let start = Instant::now();
        let r = run_limited(
            &argv(&["sh", "-c", "sleep 30 & sleep 30"]),
            Path::new("/"),
            Duration::from_millis(200),
            1024,
        )
        .unwrap();
        assert!(r.timed_out);
        assert!(start.elapsed() < Duration::from_secs(5));
    }
}
