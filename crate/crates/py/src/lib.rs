//! Python bindings for the execrep toolkit.

use std::collections::{BTreeMap, HashSet};

use execrep::codebleu::{self, CodeBleuWeights};
use execrep::dataset::{render_record as render, ParallelPair, PromptTemplates, StageId};
use execrep::dedup::{dedup_sets, jaccard as jaccard_sets, source_shingles, DedupConfig};
use execrep::encoding::{self, GraphKind, GraphText, LabeledGraph};
use execrep::gateway;
use execrep::harness;
use execrep::metrics;
use execrep::{DfgOptions, LanguageId, SourceUnit};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn lang(name: &str) -> PyResult<LanguageId> {
    name.parse().map_err(value_err)
}

fn tree(language: &str, code: &str) -> PyResult<execrep::SyntaxTree> {
    let unit = SourceUnit::new(lang(language)?, code, "<python>").map_err(value_err)?;
    execrep::parse(&unit).map_err(value_err)
}

/// Labelled graph recovered from graph text or built from code.
#[pyclass(module = "execrep_py", get_all, from_py_object)]
#[derive(Clone)]
pub struct Graph {
    /// `"ast"` or `"dfg"`.
    pub kind: String,
    pub count: usize,
    pub labels: BTreeMap<usize, String>,
    pub adjacency: BTreeMap<usize, Vec<usize>>,
}

impl Graph {
    fn from_labeled(g: LabeledGraph) -> Self {
        Graph {
            kind: match g.kind {
                GraphKind::Ast => "ast".into(),
                GraphKind::Dfg => "dfg".into(),
            },
            count: g.count,
            labels: g.labels,
            adjacency: g.adjacency,
        }
    }

    fn labeled(&self) -> PyResult<LabeledGraph> {
        Ok(LabeledGraph {
            kind: graph_kind(&self.kind)?,
            count: self.count,
            labels: self.labels.clone(),
            adjacency: self.adjacency.clone(),
        })
    }
}

fn graph_kind(kind: &str) -> PyResult<GraphKind> {
    match kind {
        "ast" => Ok(GraphKind::Ast),
        "dfg" => Ok(GraphKind::Dfg),
        other => Err(PyValueError::new_err(format!("graph kind must be 'ast' or 'dfg', got {other:?}"))),
    }
}

#[pymethods]
impl Graph {
    /// Canonical graph text.
    fn encode(&self) -> PyResult<String> {
        Ok(encoding::encode_labeled(&self.labeled()?).text)
    }

    fn __repr__(&self) -> String {
        format!("Graph(kind={:?}, count={}, edges={})", self.kind, self.count, self.adjacency.values().map(Vec::len).sum::<usize>())
    }

    fn __eq__(&self, other: &Graph) -> bool {
        self.kind == other.kind && self.count == other.count && self.labels == other.labels && self.adjacency == other.adjacency
    }
}

#[pyfunction]
fn tokenize(language: &str, code: &str) -> PyResult<Vec<String>> {
    execrep::syntax::tokenize(lang(language)?, code).map_err(value_err)
}

/// Simplified AST of `code` as a graph.
#[pyfunction]
fn ast(language: &str, code: &str) -> PyResult<Graph> {
    Ok(Graph::from_labeled(LabeledGraph::from(&execrep::simplify(&tree(language, code)?))))
}

/// Data-flow graph of `code`.
#[pyfunction]
#[pyo3(signature = (language, code, include_literals = true, prune_isolated = true))]
fn dfg(language: &str, code: &str, include_literals: bool, prune_isolated: bool) -> PyResult<Graph> {
    let g = execrep::extract_dfg(&tree(language, code)?, &DfgOptions { include_literals, prune_isolated });
    Ok(Graph::from_labeled(LabeledGraph::from(&g)))
}

#[pyfunction]
fn parse_graph_text(text: String, kind: &str) -> PyResult<Graph> {
    let g = encoding::parse_graph_text(&GraphText { kind: graph_kind(kind)?, text }).map_err(value_err)?;
    Ok(Graph::from_labeled(g))
}

/// Instruction record of one stage as a dict with `instruction`, `input`
/// and `output`.
#[pyfunction]
#[pyo3(signature = (src_lang, tgt_lang, src_code, tgt_code, stage, nl_description = None, pair_id = "pair"))]
fn render_record<'py>(
    py: Python<'py>,
    src_lang: &str,
    tgt_lang: &str,
    src_code: &str,
    tgt_code: &str,
    stage: &str,
    nl_description: Option<String>,
    pair_id: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let pair = ParallelPair::new(pair_id, lang(src_lang)?, lang(tgt_lang)?, src_code, tgt_code, nl_description)
        .map_err(value_err)?;
    let stage: StageId = stage.parse().map_err(value_err)?;
    let r = render(&pair, stage, &PromptTemplates::default()).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("instruction", r.instruction)?;
    d.set_item("input", r.input)?;
    d.set_item("output", r.output)?;
    d.set_item("stage", stage.name())?;
    Ok(d)
}

/// Near-duplicate removal over token 5-grams. Returns the retained indices
/// and `(dropped, survivor)` index pairs.
#[pyfunction]
#[pyo3(signature = (language, texts, threshold = 0.85))]
fn dedup(language: &str, texts: Vec<String>, threshold: f64) -> PyResult<(Vec<usize>, Vec<(usize, usize)>)> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(PyValueError::new_err("threshold must be in (0, 1]"));
    }
    let l = lang(language)?;
    let sets: Vec<HashSet<u64>> = texts.iter().map(|t| source_shingles(l, t)).collect();
    let out = dedup_sets(&sets, &DedupConfig { threshold, ..DedupConfig::default() });
    Ok((out.retained, out.dropped))
}

/// Exact Jaccard similarity of the token 5-gram sets of two texts.
#[pyfunction]
fn jaccard(language: &str, a: &str, b: &str) -> PyResult<f64> {
    let l = lang(language)?;
    Ok(jaccard_sets(&source_shingles(l, a), &source_shingles(l, b)))
}

#[pyfunction]
fn exact_match(language: &str, reference: &str, hypothesis: &str) -> PyResult<bool> {
    Ok(metrics::exact_match(lang(language)?, reference, hypothesis))
}

/// Corpus BLEU-4 (0-100) over grammar tokens.
#[pyfunction]
fn bleu(language: &str, references: Vec<String>, hypotheses: Vec<String>) -> PyResult<f64> {
    let l = lang(language)?;
    let tok = |v: &[String]| -> Vec<Vec<String>> {
        v.iter()
            .map(|c| execrep::syntax::tokenize(l, c).unwrap_or_else(|_| c.split_whitespace().map(str::to_string).collect()))
            .collect()
    };
    metrics::bleu(&tok(&references), &tok(&hypotheses)).map_err(value_err)
}

#[pyfunction]
#[pyo3(name = "codebleu", signature = (language, references, hypotheses, weights = (0.25, 0.25, 0.25, 0.25)))]
fn codebleu_scores<'py>(
    py: Python<'py>,
    language: &str,
    references: Vec<String>,
    hypotheses: Vec<String>,
    weights: (f64, f64, f64, f64),
) -> PyResult<Bound<'py, PyDict>> {
    if references.len() != hypotheses.len() || references.is_empty() {
        return Err(PyValueError::new_err("need equally many references and hypotheses, at least one"));
    }
    let refs: Vec<&str> = references.iter().map(String::as_str).collect();
    let hyps: Vec<&str> = hypotheses.iter().map(String::as_str).collect();
    let w = CodeBleuWeights { ngram: weights.0, weighted_ngram: weights.1, syntax: weights.2, dataflow: weights.3 };
    let l = lang(language)?;
    let s = py.detach(|| codebleu::codebleu(&refs, &hyps, l, w));
    let d = PyDict::new(py);
    d.set_item("ngram_match", s.ngram)?;
    d.set_item("weighted_ngram_match", s.weighted_ngram)?;
    d.set_item("syntax_match", s.syntax_match)?;
    d.set_item("dataflow_match", s.dataflow_match)?;
    d.set_item("codebleu", s.combined)?;
    Ok(d)
}

/// Code inside the first fence tagged with `language`, else the first fence.
#[pyfunction]
fn extract_code_block(raw: &str, language: &str) -> PyResult<String> {
    gateway::extract_code_block(raw, lang(language)?).map_err(value_err)
}

/// `(n_success, n_total)` from the last `#Results:` line, or None.
#[pyfunction]
fn parse_results(stdout: &str) -> Option<(u32, u32)> {
    harness::parse_results(stdout)
}

/// Insert `function_text` at the fill marker of `template`.
#[pyfunction]
fn splice(language: &str, template: &str, function_text: &str) -> PyResult<String> {
    let l = lang(language)?;
    let sample = harness::BenchmarkSample::new("s", l, template, None).map_err(value_err)?;
    let sol = harness::GeneratedSolution { sample_id: "s".into(), lang: l, function_text: function_text.into() };
    harness::splice(&sample, &sol).map_err(value_err)
}

#[pymodule]
fn execrep_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(ast, m)?)?;
    m.add_function(wrap_pyfunction!(dfg, m)?)?;
    m.add_function(wrap_pyfunction!(parse_graph_text, m)?)?;
    m.add_function(wrap_pyfunction!(render_record, m)?)?;
    m.add_function(wrap_pyfunction!(dedup, m)?)?;
    m.add_function(wrap_pyfunction!(jaccard, m)?)?;
    m.add_function(wrap_pyfunction!(exact_match, m)?)?;
    m.add_function(wrap_pyfunction!(bleu, m)?)?;
    m.add_function(wrap_pyfunction!(codebleu_scores, m)?)?;
    m.add_function(wrap_pyfunction!(extract_code_block, m)?)?;
    m.add_function(wrap_pyfunction!(parse_results, m)?)?;
    m.add_function(wrap_pyfunction!(splice, m)?)?;
    Ok(())
}
