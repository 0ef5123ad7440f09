//! Natural-language graph text for ASTs and data-flow graphs, e.g.
//!
//! ```text
//! G describes a graph among nodes 0, 1, and 2.
//! In this graph:
//! Node 0 represents variable x.
//! Node 1 represents variable y.
//! Node 2 represents variable x.
//! In this graph:
//! Node 2 is connected to nodes 0, 1.
//! ```
//!
//! The parser accepts the encoder's output (one statement per line) as well
//! as text where several statements share a line or the header wraps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::dataflow::DataFlowGraph;
use crate::syntax::SimplifiedAst;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Ast,
    Dfg,
}

impl GraphKind {
    /// Word used in node statements ("represents code x." / "represents variable x.").
    pub fn node_word(self) -> &'static str {
        match self {
            GraphKind::Ast => "code",
            GraphKind::Dfg => "variable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphText {
    pub kind: GraphKind,
    pub text: String,
}

impl std::fmt::Display for GraphText {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

/// Graph recovered from graph text: labelled nodes plus adjacency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledGraph {
    pub kind: GraphKind,
    pub count: usize,
    pub labels: BTreeMap<usize, String>,
    pub adjacency: BTreeMap<usize, Vec<usize>>,
}

impl From<&SimplifiedAst> for LabeledGraph {
    fn from(ast: &SimplifiedAst) -> Self {
        LabeledGraph {
            kind: GraphKind::Ast,
            count: ast.count,
            labels: ast.leaves.clone(),
            adjacency: ast
                .edges
                .iter()
                .filter(|(_, c)| !c.is_empty())
                .map(|(&p, c)| {
                    let mut c = c.clone();
                    c.sort_unstable();
                    (p, c)
                })
                .collect(),
        }
    }
}

impl From<&DataFlowGraph> for LabeledGraph {
    fn from(g: &DataFlowGraph) -> Self {
        LabeledGraph {
            kind: GraphKind::Dfg,
            count: g.nodes.len(),
            labels: g.nodes.iter().map(|n| (n.index, n.text.clone())).collect(),
            adjacency: g.adjacency(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodingError {
    #[error("malformed graph text at line {line}: {reason}")]
    MalformedEncoding { line: usize, reason: String },
}

fn malformed(line: usize, reason: impl Into<String>) -> EncodingError {
    EncodingError::MalformedEncoding {
        line,
        reason: reason.into(),
    }
}

const SECTION: &str = "In this graph:";
const HEADER: &str = "G describes a graph among ";

fn header(count: usize) -> String {
    let list = match count {
        0 => "no nodes".to_string(),
        1 => "node 0".to_string(),
        2 => "nodes 0 and 1".to_string(),
        n => {
            let mut s = String::from("nodes ");
            for i in 0..n - 1 {
                let _ = write!(s, "{i}, ");
            }
            let _ = write!(s, "and {}", n - 1);
            s
        }
    };
    format!("{HEADER}{list}.")
}

fn join_targets(targets: &[usize]) -> String {
    targets
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Render any labelled graph in the canonical one-statement-per-line form.
pub fn encode_labeled(g: &LabeledGraph) -> GraphText {
    let mut text = header(g.count);
    text.push('\n');
    text.push_str(SECTION);
    text.push('\n');
    let word = g.kind.node_word();
    for (i, label) in &g.labels {
        let _ = writeln!(text, "Node {i} represents {word} {label}.");
    }
    text.push_str(SECTION);
    text.push('\n');
    for (from, targets) in &g.adjacency {
        if targets.is_empty() {
            continue;
        }
        let mut targets = targets.clone();
        targets.sort_unstable();
        targets.dedup();
        if targets.len() == 1 {
            let _ = writeln!(text, "Node {from} is connected to node {}.", targets[0]);
        } else {
            let _ = writeln!(text, "Node {from} is connected to nodes {}.", join_targets(&targets));
        }
    }
    GraphText {
        kind: g.kind,
        text,
    }
}

pub fn encode_dfg(g: &DataFlowGraph) -> GraphText {
    encode_labeled(&LabeledGraph::from(g))
}

pub fn encode_ast(a: &SimplifiedAst) -> GraphText {
    encode_labeled(&LabeledGraph::from(a))
}

/// Collapse every run of whitespace to a single space and trim the ends.
/// Golden comparisons are done on this form.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

static STATEMENT_START: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"Node (\d+) (?:represents (?:variable|code) |is connected to nodes? )").unwrap()
});
static NODE_STATEMENT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^Node (\d+) represents (variable|code) ").unwrap());
static EDGE_STATEMENT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^Node (\d+) is connected to (node|nodes) (.*)\.$").unwrap());

/// Split a line into statements at `. Node <n> ...` boundaries.
fn split_statements(line: &str) -> Vec<&str> {
    let mut cuts = vec![0];
    for m in STATEMENT_START.find_iter(line) {
        let s = m.start();
        if s >= 2 && &line[s - 2..s] == ". " {
            cuts.push(s);
        }
    }
    cuts.push(line.len());
    cuts.windows(2)
        .map(|w| line[w[0]..w[1]].trim_end())
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_header(text: &str, line: usize) -> Result<usize, EncodingError> {
    let text = normalize_whitespace(text);
    let rest = text
        .strip_prefix(HEADER)
        .and_then(|r| r.strip_suffix('.'))
        .ok_or_else(|| malformed(line, "missing graph header"))?;
    if rest == "no nodes" {
        return Ok(0);
    }
    if rest == "node 0" {
        return Ok(1);
    }
    let list = rest
        .strip_prefix("nodes ")
        .ok_or_else(|| malformed(line, "header must list nodes"))?;
    let items: Vec<&str> = if let Some((a, b)) = list.split_once(" and ").filter(|_| !list.contains(',')) {
        vec![a, b]
    } else {
        let (head, last) = list
            .rsplit_once(", and ")
            .ok_or_else(|| malformed(line, "header list must end with ', and <n>'"))?;
        head.split(", ").chain(std::iter::once(last)).collect()
    };
    for (expected, item) in items.iter().enumerate() {
        let value: usize = item
            .parse()
            .map_err(|_| malformed(line, format!("bad index {item:?} in header")))?;
        if value != expected {
            return Err(malformed(line, format!("header index {value} out of order")));
        }
    }
    Ok(items.len())
}

fn index(raw: &str, count: usize, line: usize) -> Result<usize, EncodingError> {
    let value: usize = raw
        .parse()
        .map_err(|_| malformed(line, format!("bad node index {raw:?}")))?;
    if value >= count {
        return Err(malformed(line, format!("node {value} not declared in header")));
    }
    Ok(value)
}

/// Parse graph text back into a labelled graph. Every structural violation is
/// reported with the 1-based line number where it was found.
pub fn parse_graph_text(t: &GraphText) -> Result<LabeledGraph, EncodingError> {
    let lines: Vec<&str> = t.text.lines().collect();
    let mut pos = 0;
    while pos < lines.len() && lines[pos].trim().is_empty() {
        pos += 1;
    }
    let header_line = pos + 1;
    let mut header_text = String::new();
    while pos < lines.len() && lines[pos].trim() != SECTION {
        header_text.push_str(lines[pos]);
        header_text.push(' ');
        pos += 1;
    }
    if pos >= lines.len() {
        return Err(malformed(header_line, "missing 'In this graph:' section"));
    }
    let count = parse_header(&header_text, header_line)?;
    pos += 1;

    // node section: statements, possibly with labels spanning lines
    let mut labels: BTreeMap<usize, String> = BTreeMap::new();
    let mut last: Option<(usize, usize)> = None; // (node index, line)
    let mut word = t.kind.node_word();
    let mut found_section = false;
    while pos < lines.len() {
        let raw = lines[pos];
        let lineno = pos + 1;
        pos += 1;
        if raw.trim() == SECTION {
            found_section = true;
            break;
        }
        let statements = split_statements(raw);
        if statements.is_empty() || !NODE_STATEMENT.is_match(statements[0]) {
            // continuation of a multi-line label
            let Some((prev, _)) = last else {
                if raw.trim().is_empty() {
                    continue;
                }
                return Err(malformed(lineno, "expected a node statement"));
            };
            let label = labels.get_mut(&prev).expect("previous label");
            label.push('\n');
            label.push_str(raw);
            continue;
        }
        for st in statements {
            let caps = NODE_STATEMENT
                .captures(st)
                .ok_or_else(|| malformed(lineno, "expected a node statement"))?;
            let i = index(&caps[1], count, lineno)?;
            if &caps[2] != word {
                return Err(malformed(lineno, format!("expected 'represents {word}'")));
            }
            word = t.kind.node_word();
            if let Some((prev, _)) = last {
                if i <= prev {
                    return Err(malformed(lineno, format!("node {i} out of order")));
                }
            }
            labels.insert(i, st[caps[0].len()..].to_string());
            last = Some((i, lineno));
        }
    }
    if !found_section {
        return Err(malformed(lines.len().max(1), "missing edge section"));
    }
    // every label must be closed by a final period
    for label in labels.values_mut() {
        let trimmed = label.trim_end_matches([' ', '\t', '\r', '\n']);
        match trimmed.strip_suffix('.') {
            Some(l) => *label = l.to_string(),
            None => {
                let line = last.map(|(_, l)| l).unwrap_or(header_line);
                return Err(malformed(line, "node statement must end with '.'"));
            }
        }
    }

    let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut last_origin: Option<usize> = None;
    while pos < lines.len() {
        let raw = lines[pos];
        let lineno = pos + 1;
        pos += 1;
        if raw.trim().is_empty() {
            continue;
        }
        for st in split_statements(raw) {
            let caps = EDGE_STATEMENT
                .captures(st)
                .ok_or_else(|| malformed(lineno, "expected an edge statement"))?;
            let from = index(&caps[1], count, lineno)?;
            if last_origin.is_some_and(|p| from <= p) {
                return Err(malformed(lineno, format!("edge origin {from} out of order")));
            }
            last_origin = Some(from);
            let targets = caps[3]
                .split(", ")
                .map(|raw| index(raw.trim(), count, lineno))
                .collect::<Result<Vec<_>, _>>()?;
            let plural = &caps[2] == "nodes";
            if !plural && targets.len() > 1 {
                return Err(malformed(lineno, "singular 'node' with several targets"));
            }
            if targets.windows(2).any(|w| w[0] >= w[1]) {
                return Err(malformed(lineno, "edge targets must be strictly ascending"));
            }
            adjacency.insert(from, targets);
        }
    }

    match t.kind {
        GraphKind::Dfg => {
            if let Some(missing) = (0..count).find(|i| !labels.contains_key(i)) {
                return Err(malformed(
                    header_line,
                    format!("node {missing} has no node statement"),
                ));
            }
        }
        GraphKind::Ast => {
            for i in 0..count {
                let leaf = labels.contains_key(&i);
                let interior = adjacency.contains_key(&i);
                if leaf && interior {
                    return Err(malformed(
                        header_line,
                        format!("node {i} is both a leaf and a parent"),
                    ));
                }
                if !leaf && !interior && count > 1 {
                    return Err(malformed(
                        header_line,
                        format!("node {i} is neither a leaf nor a parent"),
                    ));
                }
            }
        }
    }

    Ok(LabeledGraph {
        kind: t.kind,
        count,
        labels,
        adjacency,
    })
}
