//! Token-exact syntax trees for C++, Java and Python, and the leaf-only
//! simplified AST that the graph encoder consumes.
//!
//! Trees are produced by tree-sitter and copied into an owned arena
//! ([`SyntaxTree`]) whose node indices follow preorder. The simplified AST
//! renumbers the same nodes level by level, which is the numbering the
//! graph-text encoding uses.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::ops::Range;
use std::sync::{LazyLock, Mutex};

use serde::{Deserialize, Serialize};

use crate::lang::{LanguageId, UnsupportedLanguage};

#[derive(Debug, thiserror::Error)]
pub enum SyntaxError {
    #[error(transparent)]
    UnsupportedLanguage(#[from] UnsupportedLanguage),
    #[error("source is not valid UTF-8: {0}")]
    Encoding(#[from] std::str::Utf8Error),
    #[error("source unit is empty")]
    EmptySource,
    #[error("parser failed to produce a tree")]
    ParserFailed,
}

/// A complete program (or function) in one language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceUnit {
    pub language: LanguageId,
    text: String,
    pub origin: String,
}

impl SourceUnit {
    pub fn new(
        language: LanguageId,
        text: impl Into<String>,
        origin: impl Into<String>,
    ) -> Result<Self, SyntaxError> {
        let text = text.into();
        if text.is_empty() {
            return Err(SyntaxError::EmptySource);
        }
        Ok(SourceUnit {
            language,
            text,
            origin: origin.into(),
        })
    }

    pub fn from_bytes(
        language: LanguageId,
        bytes: &[u8],
        origin: impl Into<String>,
    ) -> Result<Self, SyntaxError> {
        let text = std::str::from_utf8(bytes)?;
        Self::new(language, text, origin)
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyntaxNode {
    pub kind: &'static str,
    pub named: bool,
    /// Field name under which the parent holds this node, if any.
    pub field: Option<&'static str>,
    pub span: Range<usize>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub token: Option<Token>,
}

impl SyntaxNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Owned parse tree. `nodes[0]` is the root and indices follow preorder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyntaxTree {
    pub language: LanguageId,
    pub nodes: Vec<SyntaxNode>,
    pub root: usize,
    pub had_errors: bool,
    source: String,
}

impl SyntaxTree {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn node(&self, id: usize) -> &SyntaxNode {
        &self.nodes[id]
    }

    pub fn kind(&self, id: usize) -> &'static str {
        self.nodes[id].kind
    }

    pub fn text(&self, id: usize) -> &str {
        &self.source[self.nodes[id].span.clone()]
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.nodes[id].children
    }

    pub fn named_children(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .filter(|&c| self.nodes[c].named)
    }

    pub fn child_by_field(&self, id: usize, field: &str) -> Option<usize> {
        self.children_by_field(id, field).next()
    }

    pub fn children_by_field<'a>(
        &'a self,
        id: usize,
        field: &'a str,
    ) -> impl Iterator<Item = usize> + 'a {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .filter(move |&c| self.nodes[c].field == Some(field))
    }

    /// Leaves under `id`, in source order.
    pub fn leaves_under(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.is_leaf() {
                if node.token.is_some() {
                    out.push(n);
                }
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        out
    }
}

fn is_blank(text: &str) -> bool {
    text.chars().all(char::is_whitespace)
}

/// Parse a source unit with the grammar of its declared language.
///
/// Trees containing grammar error nodes are still returned with
/// `had_errors` set. Zero-width nodes (inserted "missing" tokens) are dropped
/// so that every leaf carries a non-empty token.
pub fn parse(source: &SourceUnit) -> Result<SyntaxTree, SyntaxError> {
    let text = source.text();
    if is_blank(text) {
        return Ok(SyntaxTree {
            language: source.language,
            nodes: vec![SyntaxNode {
                kind: "",
                named: true,
                field: None,
                span: 0..text.len(),
                parent: None,
                children: Vec::new(),
                token: None,
            }],
            root: 0,
            had_errors: true,
            source: text.to_string(),
        });
    }
    let ts_tree = parse_raw(source.language, text)?;
    let root = ts_tree.root_node();

    let mut nodes: Vec<SyntaxNode> = Vec::new();
    let mut stack: Vec<(tree_sitter::Node, Option<usize>, Option<&'static str>)> =
        vec![(root, None, None)];
    while let Some((n, parent, field)) = stack.pop() {
        if parent.is_some() && n.start_byte() == n.end_byte() {
            continue;
        }
        let idx = nodes.len();
        nodes.push(SyntaxNode {
            kind: intern(n.kind()),
            named: n.is_named(),
            field,
            span: n.start_byte()..n.end_byte(),
            parent,
            children: Vec::new(),
            token: None,
        });
        if let Some(p) = parent {
            nodes[p].children.push(idx);
        }
        let mut cursor = n.walk();
        let mut kids = Vec::new();
        if cursor.goto_first_child() {
            loop {
                kids.push((cursor.node(), Some(idx), cursor.field_name().map(intern)));
                if !cursor.goto_next_sibling() {
                    break;
                }
            }
        }
        stack.extend(kids.into_iter().rev());
    }
    for node in nodes.iter_mut() {
        if node.children.is_empty() && !node.span.is_empty() {
            node.token = Some(Token {
                text: text[node.span.clone()].to_string(),
                span: node.span.clone(),
            });
        }
    }
    Ok(SyntaxTree {
        language: source.language,
        nodes,
        root: 0,
        had_errors: root.has_error(),
        source: text.to_string(),
    })
}

/// Grammar node kinds and field names form a small closed set, so leaking
/// one copy of each gives the arena `'static` labels.
fn intern(name: &str) -> &'static str {
    static NAMES: LazyLock<Mutex<HashSet<&'static str>>> = LazyLock::new(Default::default);
    let mut names = NAMES.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(&known) = names.get(name) {
        return known;
    }
    let leaked: &'static str = Box::leak(name.to_string().into_boxed_str());
    names.insert(leaked);
    leaked
}

pub(crate) fn parse_raw(lang: LanguageId, text: &str) -> Result<tree_sitter::Tree, SyntaxError> {
    let mut parser = tree_sitter::Parser::new();
    parser
        .set_language(&lang.grammar())
        .map_err(|_| SyntaxError::UnsupportedLanguage(UnsupportedLanguage(lang.to_string())))?;
    parser.parse(text, None).ok_or(SyntaxError::ParserFailed)
}

/// Leaf tokens in source order.
pub fn leaf_tokens(tree: &SyntaxTree) -> Vec<Token> {
    tree.leaves_under(tree.root)
        .into_iter()
        .filter_map(|i| tree.nodes[i].token.clone())
        .collect()
}

/// Token texts of `text` under the grammar of `lang`.
pub fn tokenize(lang: LanguageId, text: &str) -> Result<Vec<String>, SyntaxError> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let tree = parse(&SourceUnit::new(lang, text, "")?)?;
    Ok(leaf_tokens(&tree).into_iter().map(|t| t.text).collect())
}

/// Leaf-only view of a syntax tree with level-order node indices.
///
/// Interior nodes keep only their child lists, leaves keep only their token
/// text. The root is 0 and every parent index is smaller than its children's.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimplifiedAst {
    pub count: usize,
    pub leaves: BTreeMap<usize, String>,
    pub edges: BTreeMap<usize, Vec<usize>>,
}

impl SimplifiedAst {
    /// Leaf texts in tree order (depth-first from the root), which is the
    /// source token order.
    pub fn leaves_in_tree_order(&self) -> Vec<&str> {
        let mut out = Vec::new();
        if self.count == 0 {
            return out;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            if let Some(text) = self.leaves.get(&n) {
                out.push(text.as_str());
            }
            if let Some(children) = self.edges.get(&n) {
                stack.extend(children.iter().rev());
            }
        }
        out
    }
}

pub fn simplify(tree: &SyntaxTree) -> SimplifiedAst {
    let mut level_index = vec![usize::MAX; tree.nodes.len()];
    let mut order = Vec::with_capacity(tree.nodes.len());
    let mut queue = VecDeque::from([tree.root]);
    while let Some(n) = queue.pop_front() {
        level_index[n] = order.len();
        order.push(n);
        queue.extend(tree.nodes[n].children.iter().copied());
    }
    let mut ast = SimplifiedAst {
        count: order.len(),
        ..Default::default()
    };
    for (i, &n) in order.iter().enumerate() {
        let node = &tree.nodes[n];
        if let Some(token) = &node.token {
            ast.leaves.insert(i, token.text.clone());
        } else if !node.children.is_empty() {
            ast.edges
                .insert(i, node.children.iter().map(|&c| level_index[c]).collect());
        }
    }
    ast
}

fn is_comment(kind: &str) -> bool {
    matches!(kind, "comment" | "line_comment" | "block_comment")
}

/// Source text with comments (and Python docstring statements) blanked out
/// by spaces. Newlines are kept so positions of the remaining code are stable.
pub fn strip_comments(source: &SourceUnit) -> Result<String, SyntaxError> {
    let tree = parse(source)?;
    let mut bytes = source.text().as_bytes().to_vec();
    let mut blank = |span: Range<usize>| {
        for b in &mut bytes[span] {
            if *b != b'\n' {
                *b = b' ';
            }
        }
    };
    for node in &tree.nodes {
        if is_comment(node.kind) {
            blank(node.span.clone());
        } else if tree.language == LanguageId::Python && node.kind == "expression_statement" {
            if let Some(&first) = node.children.first() {
                if tree.kind(first) == "string" && tree.nodes[first].span.start == node.span.start
                {
                    blank(tree.nodes[first].span.clone());
                }
            }
        }
    }
    // Blanked spans cover whole tokens, so every byte of a multibyte
    // character is replaced and the buffer stays valid UTF-8.
    Ok(String::from_utf8(bytes).expect("blanking preserves UTF-8"))
}

/// S-expressions of every interior node of the parse of `source`, in the
/// stack order the reference syntax-match metric uses.
pub fn interior_subtree_sexps(source: &SourceUnit) -> Result<Vec<String>, SyntaxError> {
    subtree_sexps(source.language, source.text())
}

pub(crate) fn subtree_sexps(lang: LanguageId, text: &str) -> Result<Vec<String>, SyntaxError> {
    let tree = parse_raw(lang, text)?;
    let mut out = Vec::new();
    let mut stack = vec![tree.root_node()];
    while let Some(n) = stack.pop() {
        out.push(n.to_sexp());
        let mut cursor = n.walk();
        for child in n.children(&mut cursor) {
            if child.child_count() != 0 {
                stack.push(child);
            }
        }
    }
    Ok(out)
}
