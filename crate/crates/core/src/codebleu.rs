//! CodeBLEU components, computed the way the widely used reference package
//! computes them: whitespace-token BLEU with epsilon smoothing, keyword
//! weighted unigram recall, subtree s-expression match, and a comes-from /
//! computed-from dataflow match with positional variable renaming.
//!
//! The dataflow extractor here is deliberately separate from
//! [`crate::dataflow`]: it reproduces the reference rule set (which, for C++,
//! applies its C# rules to the C++ parse) so scores stay comparable with
//! published numbers.

use std::collections::{HashMap, HashSet};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use tree_sitter::{Node, Point};

use crate::lang::LanguageId;
use crate::syntax::{parse_raw, subtree_sexps};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuWeights {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub syntax: f64,
    pub dataflow: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        CodeBleuWeights {
            ngram: 0.25,
            weighted_ngram: 0.25,
            syntax: 0.25,
            dataflow: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuScores {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub syntax_match: f64,
    pub dataflow_match: f64,
    pub combined: f64,
}

pub fn keywords(lang: LanguageId) -> &'static [&'static str] {
    static PY: LazyLock<Vec<&str>> =
        LazyLock::new(|| lines(include_str!("../resources/keywords/python.txt")));
    static CPP: LazyLock<Vec<&str>> =
        LazyLock::new(|| lines(include_str!("../resources/keywords/cpp.txt")));
    static JAVA: LazyLock<Vec<&str>> =
        LazyLock::new(|| lines(include_str!("../resources/keywords/java.txt")));
    match lang {
        LanguageId::Python => &PY,
        LanguageId::Cpp => &CPP,
        LanguageId::Java => &JAVA,
    }
}

fn lines(s: &'static str) -> Vec<&'static str> {
    s.lines().map(str::trim).collect()
}

type Counts<'a> = HashMap<&'a [String], usize>;

fn ngram_counts(tokens: &[String], n: usize) -> Counts<'_> {
    let mut c = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *c.entry(w).or_insert(0) += 1;
        }
    }
    c
}

fn brevity_penalty(ref_len: usize, hyp_len: usize) -> f64 {
    if hyp_len > ref_len {
        1.0
    } else if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    }
}

/// Clipped n-gram precision numerators and denominators for orders 1..=4.
pub(crate) fn precision_counts(refs: &[Vec<String>], hyps: &[Vec<String>]) -> ([f64; 4], [f64; 4], usize, usize) {
    let mut num = [0.0; 4];
    let mut den = [0.0; 4];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (r, h) in refs.iter().zip(hyps) {
        for n in 1..=4 {
            let hc = ngram_counts(h, n);
            let rc = ngram_counts(r, n);
            let clipped: usize = hc
                .iter()
                .map(|(g, &c)| c.min(rc.get(g).copied().unwrap_or(0)))
                .sum();
            num[n - 1] += clipped as f64;
            den[n - 1] += hc.values().sum::<usize>().max(1) as f64;
        }
        hyp_len += h.len();
        ref_len += r.len();
    }
    (num, den, ref_len, hyp_len)
}

fn smoothed_geo_mean(num: [f64; 4], den: [f64; 4], bp: f64) -> f64 {
    if num[0] == 0.0 {
        return 0.0;
    }
    let s: f64 = (0..4)
        .map(|i| {
            let p = if num[i] == 0.0 { 0.1 } else { num[i] };
            0.25 * (p / den[i]).ln()
        })
        .sum();
    bp * s.exp()
}

/// Corpus BLEU-4 in [0, 1] with epsilon (0.1) smoothing of zero counts.
pub fn ngram_match(refs: &[Vec<String>], hyps: &[Vec<String>]) -> f64 {
    let (num, den, r, h) = precision_counts(refs, hyps);
    smoothed_geo_mean(num, den, brevity_penalty(r, h))
}

/// Corpus BLEU-4 in which unigram recall weighs keywords 1 and other
/// tokens 0.2. There is effectively no brevity penalty.
pub fn weighted_ngram_match(refs: &[Vec<String>], hyps: &[Vec<String>], keywords: &[&str]) -> f64 {
    let mut num = [0.0; 4];
    let mut den = [0.0; 4];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (r, h) in refs.iter().zip(hyps) {
        for n in 1..=4 {
            let hc = ngram_counts(h, n);
            let rc = ngram_counts(r, n);
            let weight = |g: &[String]| {
                if n == 1 && !keywords.contains(&g[0].as_str()) {
                    0.2
                } else {
                    1.0
                }
            };
            let mut clipped = 0.0;
            let mut total = 0.0;
            for (g, &c) in &rc {
                clipped += c.min(hc.get(g).copied().unwrap_or(0)) as f64 * weight(g);
                total += c as f64 * weight(g);
            }
            num[n - 1] += clipped;
            den[n - 1] += total.max(1.0);
        }
        hyp_len += h.len();
        // The reference measures each reference as a (tokens, weights)
        // pair, so its length is always 2.
        ref_len += 2;
    }
    smoothed_geo_mean(num, den, brevity_penalty(ref_len, hyp_len))
}

static C_LIKE_COMMENTS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?sm)//.*?$|/\*.*?\*/|'(?:\\.|[^\\'])*'|"(?:\\.|[^\\"])*""#).unwrap()
});

fn drop_blank_lines(s: &str) -> String {
    s.split('\n')
        .filter(|l| !l.trim().is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Remove comments (and, for Python, docstring-position strings), then
/// drop blank lines.
pub fn remove_comments(lang: LanguageId, source: &str) -> String {
    match lang {
        LanguageId::Python => strip_python(source),
        LanguageId::Cpp | LanguageId::Java => {
            let replaced = C_LIKE_COMMENTS.replace_all(source, |c: &regex::Captures| {
                let s = &c[0];
                if s.starts_with('/') {
                    " ".to_string()
                } else {
                    s.to_string()
                }
            });
            drop_blank_lines(&replaced)
        }
    }
}

fn collect_leaves<'t>(node: Node<'t>, out: &mut Vec<Node<'t>>) {
    if node.child_count() == 0 || node.kind() == "string" {
        out.push(node);
        return;
    }
    let mut cursor = node.walk();
    for c in node.children(&mut cursor) {
        collect_leaves(c, out);
    }
}

/// Python comment/docstring removal following the token-stream rules of the
/// reference: a string token is dropped when it directly follows an indent
/// or the end of a logical line, or starts in column 0.
fn strip_python(source: &str) -> String {
    let Ok(tree) = parse_raw(LanguageId::Python, source) else {
        return drop_blank_lines(source);
    };
    let mut leaves = Vec::new();
    collect_leaves(tree.root_node(), &mut leaves);
    let bytes = source.as_bytes();
    let line_blank = |row: usize, lines: &[&str]| lines.get(row).is_none_or(|l| l.trim().is_empty() || l.trim_start().starts_with('#'));
    let src_lines: Vec<&str> = source.split('\n').collect();

    let mut remove: Vec<(usize, usize)> = Vec::new();
    let mut depth: i64 = 0;
    let mut logical_indent: Option<usize> = None;
    let mut prev: Option<Node> = None;
    for leaf in leaves {
        let kind = leaf.kind();
        if kind == "comment" {
            remove.push((leaf.start_byte(), leaf.end_byte()));
            continue;
        }
        let start = leaf.start_position();
        let continued = prev.is_some_and(|p| {
            p.end_position().row == start.row
                || bytes[p.end_byte()..leaf.start_byte()].contains(&b'\\')
        });
        let starts_logical_line = !continued && depth == 0;
        if kind == "string" {
            let drop = if continued {
                false
            } else if start.column == 0 {
                true
            } else if depth > 0 {
                false
            } else {
                match (prev, logical_indent) {
                    (Some(p), Some(indent)) => {
                        if start.column > indent {
                            true
                        } else if start.column < indent {
                            false
                        } else {
                            let gap = (p.end_position().row + 1)..start.row;
                            !gap.clone().any(|r| line_blank(r, &src_lines))
                        }
                    }
                    _ => true,
                }
            };
            if drop {
                remove.push((leaf.start_byte(), leaf.end_byte()));
            }
        }
        if starts_logical_line {
            logical_indent = Some(start.column);
        }
        match kind {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth = (depth - 1).max(0),
            _ => {}
        }
        prev = Some(leaf);
    }
    let mut out = String::with_capacity(source.len());
    let mut at = 0;
    for (s, e) in remove {
        if s >= at {
            out.push_str(&source[at..s]);
            at = e;
        }
    }
    out.push_str(&source[at..]);
    drop_blank_lines(&out)
}

/// Matched reference subtrees over total reference subtrees, with counts
/// summed across the corpus. Inputs are expected comment-free.
pub fn syntax_match_counts(lang: LanguageId, reference: &str, hypothesis: &str) -> (usize, usize) {
    let Ok(reference) = subtree_sexps(lang, reference) else {
        return (0, 0);
    };
    let hyp = subtree_sexps(lang, hypothesis).unwrap_or_default();
    let hyp: HashSet<&str> = hyp.iter().map(String::as_str).collect();
    let matched = reference.iter().filter(|s| hyp.contains(s.as_str())).count();
    (matched, reference.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flavor {
    Python,
    Java,
    CSharp,
}

impl Flavor {
    fn of(lang: LanguageId) -> Self {
        match lang {
            LanguageId::Python => Flavor::Python,
            LanguageId::Java => Flavor::Java,
            LanguageId::Cpp => Flavor::CSharp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Relation {
    ComesFrom,
    ComputedFrom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    code: String,
    idx: usize,
    rel: Relation,
    parents: Vec<String>,
    parent_idx: Vec<usize>,
}

type States = HashMap<String, Vec<usize>>;
type SpanKey = (Point, Point);

struct Extractor {
    flavor: Flavor,
    index_to_code: HashMap<SpanKey, (usize, String)>,
}

fn key(n: Node) -> SpanKey {
    (n.start_position(), n.end_position())
}

fn is_token(n: Node) -> bool {
    (n.child_count() == 0 || matches!(n.kind(), "string_literal" | "string" | "character_literal"))
        && n.kind() != "comment"
}

fn children(n: Node) -> Vec<Node> {
    let mut cursor = n.walk();
    n.children(&mut cursor).collect()
}

fn token_spans<'t>(n: Node<'t>, out: &mut Vec<Node<'t>>) {
    if is_token(n) {
        out.push(n);
    } else {
        for c in children(n) {
            token_spans(c, out);
        }
    }
}

/// Text between two points, addressing each line by character index the
/// way the reference slices decoded lines with byte columns.
fn text_between(lines: &[Vec<char>], a: Point, b: Point) -> String {
    let slice = |row: usize, from: usize, to: Option<usize>| -> String {
        let Some(l) = lines.get(row) else {
            return String::new();
        };
        let to = to.unwrap_or(l.len()).min(l.len());
        let from = from.min(to);
        l[from..to].iter().collect()
    };
    if a.row == b.row {
        slice(a.row, a.column, Some(b.column))
    } else {
        let mut s = slice(a.row, a.column, None);
        for r in a.row + 1..b.row {
            s.push_str(&slice(r, 0, None));
        }
        s.push_str(&slice(b.row, 0, Some(b.column)));
        s
    }
}

fn sort_by_idx(mut v: Vec<Entry>) -> Vec<Entry> {
    v.sort_by_key(|e| e.idx);
    v
}

fn push_unique<T: PartialEq + Clone>(into: &mut Vec<T>, from: &[T]) {
    for x in from {
        if !into.contains(x) {
            into.push(x.clone());
        }
    }
}

/// Merge entries sharing (code, idx, relation), as the reference does after
/// evaluating a loop twice.
fn merge_loop_entries(entries: Vec<Entry>) -> Vec<Entry> {
    let mut order: Vec<(String, usize, Relation)> = Vec::new();
    let mut merged: HashMap<(String, usize, Relation), Entry> = HashMap::new();
    for e in entries {
        let k = (e.code.clone(), e.idx, e.rel);
        match merged.get_mut(&k) {
            Some(m) => {
                let mut names = Vec::new();
                push_unique(&mut names, &m.parents);
                push_unique(&mut names, &e.parents);
                m.parents = names;
                m.parent_idx.extend(e.parent_idx);
                m.parent_idx.sort_unstable();
                m.parent_idx.dedup();
            }
            None => {
                order.push(k.clone());
                merged.insert(k, e);
            }
        }
    }
    let out: Vec<Entry> = order.into_iter().map(|k| merged.remove(&k).unwrap()).collect();
    sort_by_idx(out)
}

fn join_states(list: Vec<States>) -> States {
    let mut out: States = HashMap::new();
    for s in list {
        for (k, v) in s {
            out.entry(k).or_default().extend(v);
        }
    }
    for v in out.values_mut() {
        v.sort_unstable();
        v.dedup();
    }
    out
}

impl Extractor {
    fn lookup(&self, n: Node) -> (usize, String) {
        self.index_to_code
            .get(&key(n))
            .cloned()
            .unwrap_or((usize::MAX, String::new()))
    }

    fn variable_tokens(&self, n: Node, out: &mut Vec<(usize, String)>) {
        if is_token(n) {
            let (idx, code) = self.lookup(n);
            if n.kind() != code {
                out.push((idx, code));
            }
        } else {
            for c in children(n) {
                self.variable_tokens(c, out);
            }
        }
    }

    fn vars(&self, n: Option<Node>) -> Vec<(usize, String)> {
        let mut v = Vec::new();
        if let Some(n) = n {
            self.variable_tokens(n, &mut v);
        }
        v
    }

    fn visit_opt(&self, n: Option<Node>, states: States) -> (Vec<Entry>, States) {
        match n {
            Some(n) => self.visit(n, states),
            None => (Vec::new(), states),
        }
    }

    /// Definition `name = value`: every name token comes from every value
    /// token.
    fn definition(&self, name: Option<Node>, value: Option<Node>, mut states: States) -> (Vec<Entry>, States) {
        let mut dfg = Vec::new();
        match value {
            None => {
                for (idx, code) in self.vars(name) {
                    dfg.push(Entry {
                        code: code.clone(),
                        idx,
                        rel: Relation::ComesFrom,
                        parents: vec![],
                        parent_idx: vec![],
                    });
                    states.insert(code, vec![idx]);
                }
            }
            Some(v) => {
                let names = self.vars(name);
                let values = self.vars(Some(v));
                let (temp, s) = self.visit(v, states);
                states = s;
                dfg.extend(temp);
                for (i1, c1) in names {
                    for (i2, c2) in &values {
                        dfg.push(Entry {
                            code: c1.clone(),
                            idx: i1,
                            rel: Relation::ComesFrom,
                            parents: vec![c2.clone()],
                            parent_idx: vec![*i2],
                        });
                    }
                    states.insert(c1, vec![i1]);
                }
            }
        }
        (sort_by_idx(dfg), states)
    }

    /// `left` computed from `right`, one entry per (left, right) token pair.
    fn pairwise_computed(&self, left: Option<Node>, right: Option<Node>, states: &mut States, dfg: &mut Vec<Entry>) {
        let values = self.vars(right);
        for (i1, c1) in self.vars(left) {
            for (i2, c2) in &values {
                dfg.push(Entry {
                    code: c1.clone(),
                    idx: i1,
                    rel: Relation::ComputedFrom,
                    parents: vec![c2.clone()],
                    parent_idx: vec![*i2],
                });
            }
            states.insert(c1, vec![i1]);
        }
    }

    /// Python form: each left token computed from all right tokens at once.
    fn grouped_computed(&self, left: Node, right: Node, states: &mut States, dfg: &mut Vec<Entry>) {
        let values = self.vars(Some(right));
        for (i1, c1) in self.vars(Some(left)) {
            dfg.push(Entry {
                code: c1.clone(),
                idx: i1,
                rel: Relation::ComputedFrom,
                parents: values.iter().map(|v| v.1.clone()).collect(),
                parent_idx: values.iter().map(|v| v.0).collect(),
            });
            states.insert(c1, vec![i1]);
        }
    }

    fn python_sides<'t>(&self, n: Node<'t>) -> (Vec<Node<'t>>, Vec<Node<'t>>) {
        let left = n.child_by_field_name("left");
        let right = n.child_by_field_name("right");
        let split = |x: Option<Node<'t>>| -> Vec<Node<'t>> {
            x.map(|x| children(x).into_iter().filter(|c| c.kind() != ",").collect())
                .unwrap_or_default()
        };
        let mut l = split(left);
        let mut r = split(right);
        if l.len() != r.len() {
            l = left.into_iter().collect();
            r = right.into_iter().collect();
        }
        if l.is_empty() {
            l = left.into_iter().collect();
        }
        if r.is_empty() {
            r = right.into_iter().collect();
        }
        (l, r)
    }

    fn visit(&self, node: Node, mut states: States) -> (Vec<Entry>, States) {
        let kind = node.kind();
        if is_token(node) {
            let (idx, code) = self.lookup(node);
            if kind == code {
                return (vec![], states);
            }
            if let Some(prev) = states.get(&code) {
                let e = Entry {
                    code: code.clone(),
                    idx,
                    rel: Relation::ComesFrom,
                    parents: vec![code],
                    parent_idx: prev.clone(),
                };
                return (vec![e], states);
            }
            if kind == "identifier" {
                states.insert(code.clone(), vec![idx]);
            }
            let e = Entry {
                code,
                idx,
                rel: Relation::ComesFrom,
                parents: vec![],
                parent_idx: vec![],
            };
            return (vec![e], states);
        }
        match self.flavor {
            Flavor::Python => self.visit_python(node, kind, states),
            Flavor::Java | Flavor::CSharp => self.visit_c_like(node, kind, states),
        }
    }

    fn visit_children(&self, node: Node, mut states: States) -> (Vec<Entry>, States) {
        let mut dfg = Vec::new();
        let kids = children(node);
        let first = |k: &str| self.flavor == Flavor::Python && k == "for_in_clause";
        for c in kids.iter().filter(|c| first(c.kind())) {
            let (t, s) = self.visit(*c, states);
            states = s;
            dfg.extend(t);
        }
        for c in kids.iter().filter(|c| !first(c.kind())) {
            let (t, s) = self.visit(*c, states);
            states = s;
            dfg.extend(t);
        }
        (sort_by_idx(dfg), states)
    }

    fn visit_python(&self, node: Node, kind: &str, mut states: States) -> (Vec<Entry>, States) {
        match kind {
            "default_parameter" => self.definition(
                node.child_by_field_name("name"),
                node.child_by_field_name("value"),
                states,
            ),
            "assignment" | "augmented_assignment" | "for_in_clause" => {
                let (left, right) = if kind == "for_in_clause" {
                    let kids = children(node);
                    (
                        node.child_by_field_name("left").into_iter().collect::<Vec<_>>(),
                        kids.last().copied().into_iter().collect::<Vec<_>>(),
                    )
                } else {
                    if node.child_by_field_name("right").is_none() {
                        return (vec![], states);
                    }
                    self.python_sides(node)
                };
                let mut dfg = Vec::new();
                for r in &right {
                    let (t, s) = self.visit(*r, states);
                    states = s;
                    dfg.extend(t);
                }
                for (l, r) in left.iter().zip(&right) {
                    self.grouped_computed(*l, *r, &mut states, &mut dfg);
                }
                (sort_by_idx(dfg), states)
            }
            "if_statement" => {
                let mut dfg = Vec::new();
                let mut current = states.clone();
                let mut others = Vec::new();
                let mut tag = false;
                for c in children(node) {
                    if c.kind().contains("else") {
                        tag = true;
                    }
                    if !matches!(c.kind(), "elif_clause" | "else_clause") {
                        let (t, s) = self.visit(c, current);
                        current = s;
                        dfg.extend(t);
                    } else {
                        let (t, s) = self.visit(c, states.clone());
                        dfg.extend(t);
                        others.push(s);
                    }
                }
                others.push(current);
                if !tag {
                    others.push(states);
                }
                (sort_by_idx(dfg), join_states(others))
            }
            "for_statement" => {
                let mut dfg = Vec::new();
                for _ in 0..2 {
                    let (left, right) = self.python_sides(node);
                    for r in &right {
                        let (t, s) = self.visit(*r, states);
                        states = s;
                        dfg.extend(t);
                    }
                    for (l, r) in left.iter().zip(&right) {
                        self.grouped_computed(*l, *r, &mut states, &mut dfg);
                    }
                    if let Some(last) = children(node).last().filter(|l| l.kind() == "block") {
                        let (t, s) = self.visit(*last, states);
                        states = s;
                        dfg.extend(t);
                    }
                }
                (merge_loop_entries(dfg), states)
            }
            "while_statement" => self.twice_over_children(node, states),
            _ => self.visit_children(node, states),
        }
    }

    fn twice_over_children(&self, node: Node, mut states: States) -> (Vec<Entry>, States) {
        let mut dfg = Vec::new();
        for _ in 0..2 {
            for c in children(node) {
                let (t, s) = self.visit(c, states);
                states = s;
                dfg.extend(t);
            }
        }
        (merge_loop_entries(dfg), states)
    }

    fn visit_c_like(&self, node: Node, kind: &str, mut states: States) -> (Vec<Entry>, States) {
        let java = self.flavor == Flavor::Java;
        let increment = if java { "update_expression" } else { "postfix_unary_expression" };
        let enhanced_for = if java { "enhanced_for_statement" } else { "for_each_statement" };
        if kind == "variable_declarator" {
            let (name, value) = if java {
                (node.child_by_field_name("name"), node.child_by_field_name("value"))
            } else {
                let kids = children(node);
                (kids.first().copied(), if kids.len() == 2 { Some(kids[1]) } else { None })
            };
            return self.definition(name, value, states);
        }
        if kind == "assignment_expression" {
            let left = node.child_by_field_name("left");
            let right = node.child_by_field_name("right");
            let (mut dfg, s) = self.visit_opt(right, states);
            states = s;
            self.pairwise_computed(left, right, &mut states, &mut dfg);
            return (sort_by_idx(dfg), states);
        }
        if kind == increment {
            let mut dfg = Vec::new();
            self.pairwise_computed(Some(node), Some(node), &mut states, &mut dfg);
            return (sort_by_idx(dfg), states);
        }
        if kind == "if_statement" || kind == "else" {
            let mut dfg = Vec::new();
            let mut current = states.clone();
            let mut others = Vec::new();
            let mut flag = false;
            let mut tag = kind.contains("else");
            for c in children(node) {
                let ck = c.kind();
                if ck.contains("else") {
                    tag = true;
                }
                if !matches!(ck, "if_statement" | "else") && !flag {
                    let (t, s) = self.visit(c, current);
                    current = s;
                    dfg.extend(t);
                } else {
                    flag = true;
                    let (t, s) = self.visit(c, states.clone());
                    dfg.extend(t);
                    others.push(s);
                }
            }
            others.push(current);
            if !tag {
                others.push(states);
            }
            return (sort_by_idx(dfg), join_states(others));
        }
        if kind == "for_statement" {
            let mut dfg = Vec::new();
            let kids = children(node);
            for c in &kids {
                let (t, s) = self.visit(*c, states);
                states = s;
                dfg.extend(t);
            }
            let mut flag = false;
            for c in &kids {
                if flag {
                    let (t, s) = self.visit(*c, states);
                    states = s;
                    dfg.extend(t);
                } else if c.kind() == "local_variable_declaration" {
                    flag = true;
                }
            }
            return (merge_loop_entries(dfg), states);
        }
        if kind == enhanced_for {
            let (name, value) = if java {
                (node.child_by_field_name("name"), node.child_by_field_name("value"))
            } else {
                (node.child_by_field_name("left"), node.child_by_field_name("right"))
            };
            let body = node.child_by_field_name("body");
            let mut dfg = Vec::new();
            for _ in 0..2 {
                let (t, s) = self.visit_opt(value, states);
                states = s;
                dfg.extend(t);
                self.pairwise_computed(name, value, &mut states, &mut dfg);
                let (t, s) = self.visit_opt(body, states);
                states = s;
                dfg.extend(t);
            }
            return (merge_loop_entries(dfg), states);
        }
        if kind == "while_statement" {
            return self.twice_over_children(node, states);
        }
        self.visit_children(node, states)
    }
}

/// One normalized dataflow fact: `(variable, relation, parents)` with names
/// replaced by `var_N` in order of first appearance.
pub type NormalizedFlow = (String, &'static str, Vec<String>);

/// Dataflow facts of `code` as the reference extracts them, before
/// normalization: `(name, relation, parent names)`.
fn raw_dataflow(lang: LanguageId, code: &str) -> Vec<Entry> {
    let Ok(tree) = parse_raw(lang, code) else {
        return Vec::new();
    };
    let root = tree.root_node();
    let mut leaves = Vec::new();
    token_spans(root, &mut leaves);
    let lines: Vec<Vec<char>> = code.split('\n').map(|l| l.chars().collect()).collect();
    let mut index_to_code = HashMap::new();
    for (idx, leaf) in leaves.iter().enumerate() {
        let text = text_between(&lines, leaf.start_position(), leaf.end_position());
        index_to_code.insert(key(*leaf), (idx, text));
    }
    let ex = Extractor {
        flavor: Flavor::of(lang),
        index_to_code,
    };
    let (dfg, _) = ex.visit(root, States::new());
    let dfg = sort_by_idx(dfg);

    let mut referenced = HashSet::new();
    for d in &dfg {
        if !d.parent_idx.is_empty() {
            referenced.insert(d.idx);
        }
        referenced.extend(d.parent_idx.iter().copied());
    }
    let mut order = Vec::new();
    let mut by_idx: HashMap<usize, Entry> = HashMap::new();
    for d in dfg.into_iter().filter(|d| referenced.contains(&d.idx)) {
        match by_idx.get_mut(&d.idx) {
            None => {
                order.push(d.idx);
                by_idx.insert(d.idx, d);
            }
            Some(m) => {
                let mut names = Vec::new();
                push_unique(&mut names, &m.parents);
                push_unique(&mut names, &d.parents);
                let mut idxs = Vec::new();
                push_unique(&mut idxs, &m.parent_idx);
                push_unique(&mut idxs, &d.parent_idx);
                *m = Entry {
                    code: d.code,
                    idx: d.idx,
                    rel: d.rel,
                    parents: names,
                    parent_idx: idxs,
                };
            }
        }
    }
    order.into_iter().map(|i| by_idx.remove(&i).unwrap()).collect()
}

pub fn normalized_dataflow(lang: LanguageId, code: &str) -> Vec<NormalizedFlow> {
    let mut names: HashMap<String, String> = HashMap::new();
    let mut name_of = |n: &str| -> String {
        let next = names.len();
        names.entry(n.to_string()).or_insert_with(|| format!("var_{next}")).clone()
    };
    raw_dataflow(lang, code)
        .into_iter()
        .map(|e| {
            let parents: Vec<String> = e.parents.iter().map(|p| name_of(p)).collect();
            let var = name_of(&e.code);
            let rel = match e.rel {
                Relation::ComesFrom => "comesFrom",
                Relation::ComputedFrom => "computedFrom",
            };
            (var, rel, parents)
        })
        .collect()
}

/// `(matched, total)` reference dataflow facts for one pair, plus whether
/// the hypothesis produced any facts.
pub fn dataflow_match_counts(lang: LanguageId, reference: &str, hypothesis: &str) -> (usize, usize, bool) {
    let r = normalized_dataflow(lang, reference);
    let mut h = normalized_dataflow(lang, hypothesis);
    let hyp_has = !h.is_empty();
    let mut matched = 0;
    for f in &r {
        if let Some(pos) = h.iter().position(|x| x == f) {
            matched += 1;
            h.remove(pos);
        }
    }
    (matched, r.len(), hyp_has)
}

/// All four components plus the weighted combination, over a corpus of
/// single-reference pairs.
pub fn codebleu(refs: &[&str], hyps: &[&str], lang: LanguageId, weights: CodeBleuWeights) -> CodeBleuScores {
    let refs: Vec<&str> = refs.iter().map(|s| s.trim()).collect();
    let hyps: Vec<&str> = hyps.iter().map(|s| s.trim()).collect();
    let split = |v: &[&str]| -> Vec<Vec<String>> {
        v.iter()
            .map(|s| s.split_whitespace().map(str::to_string).collect())
            .collect()
    };
    let ref_tokens = split(&refs);
    let hyp_tokens = split(&hyps);
    let ngram = ngram_match(&ref_tokens, &hyp_tokens);
    let weighted_ngram = weighted_ngram_match(&ref_tokens, &hyp_tokens, keywords(lang));

    use rayon::prelude::*;
    let per_pair: Vec<((usize, usize), (usize, usize, bool))> = refs
        .par_iter()
        .zip(hyps.par_iter())
        .map(|(r, h)| {
            let r = remove_comments(lang, r);
            let h = remove_comments(lang, h);
            (syntax_match_counts(lang, &r, &h), dataflow_match_counts(lang, &r, &h))
        })
        .collect();
    let (mut sm, mut st, mut dm, mut dt, mut hyp_flows) = (0, 0, 0, 0, false);
    for ((a, b), (c, d, e)) in per_pair {
        sm += a;
        st += b;
        dm += c;
        dt += d;
        hyp_flows |= e;
    }
    let syntax_match = if st == 0 { 0.0 } else { sm as f64 / st as f64 };
    let dataflow_match = if dt > 0 {
        dm as f64 / dt as f64
    } else if hyp_flows {
        0.0
    } else {
        1.0
    };
    let combined = weights.ngram * ngram
        + weights.weighted_ngram * weighted_ngram
        + weights.syntax * syntax_match
        + weights.dataflow * dataflow_match;
    CodeBleuScores {
        ngram,
        weighted_ngram,
        syntax_match,
        dataflow_match,
        combined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_corpus_scores_one() {
        let code = "def f(a, b):\n    c = a + b\n    return c\n";
        let s = codebleu(&[code], &[code], LanguageId::Python, CodeBleuWeights::default());
        assert!((s.combined - 1.0).abs() < 1e-12, "{s:?}");
        assert!((s.dataflow_match - 1.0).abs() < 1e-12);
    }

    #[test]
    fn python_docstrings_and_comments_removed() {
        let src = "\"\"\"module\"\"\"\ndef f():\n    \"\"\"doc\"\"\"\n    x = 'keep'  # note\n    return x\n";
        assert_eq!(
            remove_comments(LanguageId::Python, src),
            "def f():\n    x = 'keep'  \n    return x"
        );
    }

    #[test]
    fn c_like_comments_become_spaces() {
        let src = "int a; // one\n/* two\nlines */\nchar *s = \"//no\";\n";
        assert_eq!(
            remove_comments(LanguageId::Cpp, src),
            "int a;  \nchar *s = \"//no\";"
        );
    }

    #[test]
    fn degenerate_dataflow() {
        let w = CodeBleuWeights::default();
        let s = codebleu(&["pass"], &["pass"], LanguageId::Python, w);
        assert_eq!(s.dataflow_match, 1.0);
        let s = codebleu(&["pass"], &["x = y"], LanguageId::Python, w);
        assert_eq!(s.dataflow_match, 0.0);
    }

    #[test]
    fn renamed_variables_keep_dataflow() {
        let a = "x = 1\ny = x + 2\n";
        let b = "p = 1\nq = p + 2\n";
        let (m, t, _) = dataflow_match_counts(LanguageId::Python, a, b);
        assert!(t > 0);
        assert_eq!(m, t);
    }
}
