//! Variable-dependency ("comes-from") graphs over identifier and literal
//! occurrences.
//!
//! Every edge points from an occurrence to an occurrence its value may come
//! from: a use points at the definitions that reach it, and a definition
//! points at the occurrences on its right-hand side. The analysis is
//! name-based and deliberately conservative:
//!
//! * joins after `if`/`else` keep the definitions that were live before the
//!   branch as well as those made inside every branch;
//! * loop bodies run twice, so uses early in a body also see definitions made
//!   later in it;
//! * a callee without a visible definition (`print`, `range`, methods) gets a
//!   self-edge, and a call to a locally defined function points at the
//!   defining occurrence.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::lang::LanguageId;
use crate::syntax::SyntaxTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DfgRole {
    Definition,
    Use,
    Call,
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfgNode {
    pub index: usize,
    pub text: String,
    pub span: Range<usize>,
    pub role: DfgRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DfgEdge {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DataFlowGraph {
    pub nodes: Vec<DfgNode>,
    pub edges: BTreeSet<DfgEdge>,
}

impl DataFlowGraph {
    /// Targets of each node that has out-edges, ascending.
    pub fn adjacency(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(e.from).or_default().push(e.to);
        }
        adj
    }

    pub fn targets(&self, from: usize) -> Vec<usize> {
        self.edges
            .range(DfgEdge { from, to: 0 }..=DfgEdge { from, to: usize::MAX })
            .map(|e| e.to)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DfgOptions {
    /// Emit literal occurrences (`0`, `"abc"`, `true`) as nodes.
    pub include_literals: bool,
    /// Drop occurrences that end up with no incident edge.
    pub prune_isolated: bool,
}

impl Default for DfgOptions {
    fn default() -> Self {
        DfgOptions {
            include_literals: true,
            prune_isolated: true,
        }
    }
}

type Env = BTreeMap<String, BTreeSet<usize>>;

fn merge(into: &mut Env, other: &Env) {
    for (name, defs) in other {
        into.entry(name.clone()).or_default().extend(defs);
    }
}

const LOOP_PASSES: usize = 2;

/// Extract the data-flow graph of a parsed source unit.
pub fn extract_dfg(tree: &SyntaxTree, options: &DfgOptions) -> DataFlowGraph {
    let mut walker = Walker {
        tree,
        lang: tree.language,
        opts: *options,
        roles: BTreeMap::new(),
        edges: BTreeSet::new(),
    };
    let mut env = Env::new();
    let mut sink = Vec::new();
    walker.visit(tree.root, &mut env, &mut sink);
    walker.finish()
}

struct Walker<'t> {
    tree: &'t SyntaxTree,
    lang: LanguageId,
    opts: DfgOptions,
    roles: BTreeMap<usize, DfgRole>,
    edges: BTreeSet<(usize, usize)>,
}

impl<'t> Walker<'t> {
    fn finish(self) -> DataFlowGraph {
        let mut ids: Vec<usize> = if self.opts.prune_isolated {
            let mut touched = BTreeSet::new();
            for &(a, b) in &self.edges {
                touched.insert(a);
                touched.insert(b);
            }
            touched.into_iter().collect()
        } else {
            self.roles.keys().copied().collect()
        };
        ids.sort_by_key(|&id| (self.tree.node(id).span.start, id));
        let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let nodes = ids
            .iter()
            .enumerate()
            .map(|(i, &id)| DfgNode {
                index: i,
                text: self.tree.text(id).to_string(),
                span: self.tree.node(id).span.clone(),
                role: self.roles[&id],
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|(a, b)| DfgEdge {
                from: index[a],
                to: index[b],
            })
            .collect();
        DataFlowGraph { nodes, edges }
    }

    fn kind(&self, id: usize) -> &'static str {
        self.tree.kind(id)
    }

    fn text(&self, id: usize) -> &'t str {
        self.tree.text(id)
    }

    fn field(&self, id: usize, name: &str) -> Option<usize> {
        self.tree.child_by_field(id, name)
    }

    fn named(&self, id: usize) -> Vec<usize> {
        self.tree.named_children(id).collect()
    }

    fn is_literal(&self, id: usize) -> bool {
        let kind = self.kind(id);
        match self.lang {
            LanguageId::Python => matches!(
                kind,
                "integer" | "float" | "string" | "true" | "false" | "none"
            ),
            LanguageId::Cpp => matches!(
                kind,
                "number_literal"
                    | "string_literal"
                    | "char_literal"
                    | "raw_string_literal"
                    | "user_defined_literal"
                    | "true"
                    | "false"
                    | "null"
                    | "nullptr"
            ),
            LanguageId::Java => matches!(
                kind,
                "decimal_integer_literal"
                    | "hex_integer_literal"
                    | "octal_integer_literal"
                    | "binary_integer_literal"
                    | "decimal_floating_point_literal"
                    | "hex_floating_point_literal"
                    | "string_literal"
                    | "character_literal"
                    | "text_block"
                    | "true"
                    | "false"
                    | "null_literal"
            ),
        }
    }

    fn is_skipped(&self, kind: &str) -> bool {
        matches!(
            kind,
            "comment"
                | "line_comment"
                | "block_comment"
                // python
                | "type"
                | "global_statement"
                | "nonlocal_statement"
                // cpp
                | "preproc_include"
                | "preproc_def"
                | "preproc_function_def"
                | "preproc_call"
                | "using_declaration"
                | "alias_declaration"
                | "type_definition"
                | "namespace_alias_definition"
                | "template_parameter_list"
                | "type_descriptor"
                | "primitive_type"
                // java
                | "import_declaration"
                | "package_declaration"
                | "annotation"
                | "marker_annotation"
                | "type_parameters"
                | "type_arguments"
                | "throws"
        )
    }

    fn mark(&mut self, id: usize, role: DfgRole) {
        self.roles.entry(id).or_insert(role);
    }

    fn edge(&mut self, from: usize, to: usize) {
        if from != to || self.roles.get(&from) == Some(&DfgRole::Call) {
            self.edges.insert((from, to));
        }
    }

    fn reaching(&self, id: usize, env: &Env) -> Vec<usize> {
        env.get(self.text(id))
            .map(|defs| defs.iter().copied().collect())
            .unwrap_or_default()
    }

    fn use_var(&mut self, id: usize, env: &Env, out: &mut Vec<usize>) {
        self.mark(id, DfgRole::Use);
        for d in self.reaching(id, env) {
            self.edge(id, d);
        }
        out.push(id);
    }

    fn literal(&mut self, id: usize, out: &mut Vec<usize>) {
        if self.opts.include_literals {
            self.mark(id, DfgRole::Literal);
            out.push(id);
        }
    }

    /// Plain definition: links to `sources` and replaces earlier definitions.
    fn define(&mut self, id: usize, sources: &[usize], env: &mut Env, kill: bool) {
        self.mark(id, DfgRole::Definition);
        for &s in sources {
            self.edge(id, s);
        }
        let name = self.text(id).to_string();
        if kill {
            env.insert(name, BTreeSet::from([id]));
        } else {
            env.entry(name).or_default().insert(id);
        }
    }

    /// Partial update of a variable (element or field store, `x++` through a
    /// subscript): the old value still flows into the new one.
    fn weak_define(&mut self, id: usize, sources: &[usize], env: &mut Env) {
        self.mark(id, DfgRole::Definition);
        for &s in sources {
            self.edge(id, s);
        }
        for d in self.reaching(id, env) {
            self.edge(id, d);
        }
        env.entry(self.text(id).to_string()).or_default().insert(id);
    }

    fn callee(&mut self, id: usize, env: &Env, out: &mut Vec<usize>) {
        self.mark(id, DfgRole::Call);
        let defs = self.reaching(id, env);
        if defs.is_empty() {
            self.edge(id, id);
        } else {
            for d in defs {
                self.edge(id, d);
            }
        }
        out.push(id);
    }

    /// Callee named through an object (`obj.method(...)`, `"...".format(...)`).
    fn method_callee(&mut self, id: usize, out: &mut Vec<usize>) {
        self.mark(id, DfgRole::Call);
        self.edge(id, id);
        out.push(id);
    }

    fn values(&mut self, id: usize, env: &mut Env) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(id, env, &mut out);
        out
    }

    fn visit_children(&mut self, id: usize, env: &mut Env, out: &mut Vec<usize>) {
        for c in self.tree.children(id).to_vec() {
            self.visit(c, env, out);
        }
    }

    fn visit_field(&mut self, id: usize, field: &str, env: &mut Env, out: &mut Vec<usize>) {
        for c in self.tree.children_by_field(id, field).collect::<Vec<_>>() {
            self.visit(c, env, out);
        }
    }

    fn visit(&mut self, id: usize, env: &mut Env, out: &mut Vec<usize>) {
        if self.is_literal(id) {
            self.literal(id, out);
            return;
        }
        let kind = self.kind(id);
        if kind == "identifier" {
            self.use_var(id, env, out);
            return;
        }
        if self.tree.node(id).is_leaf() || self.is_skipped(kind) {
            return;
        }
        match (self.lang, kind) {
            (LanguageId::Python, "function_definition") => self.py_function(id, env),
            (LanguageId::Cpp, "function_definition") => self.cpp_function(id, env),
            (LanguageId::Java, "method_declaration" | "constructor_declaration") => {
                self.java_method(id, env)
            }
            (LanguageId::Python, "lambda") | (_, "lambda_expression") => self.lambda(id, env, out),
            (LanguageId::Python, "class_definition") => self.py_class(id, env),
            (
                LanguageId::Java,
                "class_declaration" | "interface_declaration" | "enum_declaration"
                | "record_declaration",
            ) => self.java_class(id, env),
            (_, "if_statement") => self.if_statement(id, env),
            (LanguageId::Python, "for_statement") => self.py_for(id, env),
            (_, "for_statement") => self.c_for(id, env),
            (_, "for_range_loop") => self.each_loop(id, "declarator", "right", env),
            (_, "enhanced_for_statement") => self.each_loop(id, "name", "value", env),
            (_, "while_statement") => self.while_loop(id, env),
            (_, "do_statement") => self.do_loop(id, env),
            (LanguageId::Python, "assignment" | "augmented_assignment") => {
                self.py_assignment(id, env, out)
            }
            (_, "assignment_expression") => self.assignment_expression(id, env, out),
            (LanguageId::Python, "named_expression") => {
                let sources = self.values_of_field(id, "value", env);
                if let Some(name) = self.field(id, "name") {
                    self.define(name, &sources, env, true);
                    out.push(name);
                }
            }
            (LanguageId::Cpp, "declaration") => self.cpp_declaration(id, env),
            (LanguageId::Java, "variable_declarator") => {
                let sources = self.values_of_field(id, "value", env);
                if let Some(name) = self.field(id, "name") {
                    self.define_target(name, &sources, env, out);
                }
            }
            (_, "update_expression") => self.update(id, env, out),
            (LanguageId::Python, "call") | (LanguageId::Cpp, "call_expression") => {
                self.call(id, env, out)
            }
            (LanguageId::Java, "method_invocation") => self.java_invocation(id, env, out),
            (LanguageId::Python, "attribute") => self.visit_field(id, "object", env, out),
            (LanguageId::Java, "field_access") => self.visit_field(id, "object", env, out),
            (LanguageId::Cpp, "field_expression") => self.visit_field(id, "argument", env, out),
            (LanguageId::Python, "keyword_argument") => self.visit_field(id, "value", env, out),
            (
                LanguageId::Python,
                "list_comprehension" | "set_comprehension" | "dictionary_comprehension"
                | "generator_expression",
            ) => self.comprehension(id, env, out),
            (LanguageId::Python, "as_pattern") => self.as_pattern(id, env, out),
            (LanguageId::Python, "except_clause") => {
                self.visit_field(id, "value", env, out);
                if let Some(alias) = self.field(id, "alias") {
                    self.define_target(alias, &[], env, &mut Vec::new());
                }
                for c in self.tree.children(id).to_vec() {
                    let f = self.tree.node(c).field;
                    if f != Some("value") && f != Some("alias") {
                        self.visit(c, env, out);
                    }
                }
            }
            (LanguageId::Python, "import_statement" | "import_from_statement") => {
                self.py_import(id, env)
            }
            (LanguageId::Python, "future_import_statement") => {}
            (LanguageId::Cpp, "catch_clause") => {
                let mut inner = env.clone();
                if let Some(params) = self.field(id, "parameters") {
                    self.params(params, env, &mut inner);
                }
                self.visit_field(id, "body", &mut inner, out);
            }
            (LanguageId::Java, "catch_formal_parameter") => {
                if let Some(name) = self.field(id, "name") {
                    self.define(name, &[], env, true);
                }
            }
            (LanguageId::Java, "resource") => {
                let sources = self.values_of_field(id, "value", env);
                match self.field(id, "name") {
                    Some(name) => self.define(name, &sources, env, true),
                    None => self.visit_children(id, env, out),
                }
            }
            _ => self.visit_children(id, env, out),
        }
    }

    fn values_of_field(&mut self, id: usize, field: &str, env: &mut Env) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit_field(id, field, env, &mut out);
        out
    }

    /// Bind every name in an assignment target. Stores through subscripts
    /// and attributes become partial definitions of the base variable.
    fn define_target(&mut self, id: usize, sources: &[usize], env: &mut Env, out: &mut Vec<usize>) {
        let kind = self.kind(id);
        if kind == "identifier" {
            self.define(id, sources, env, true);
            out.push(id);
            return;
        }
        match kind {
            "pattern_list" | "tuple_pattern" | "list_pattern" | "tuple" | "list"
            | "expression_list" | "parenthesized_expression" | "list_splat_pattern"
            | "dictionary_splat_pattern" | "as_pattern_target" | "structured_binding_declarator"
            | "reference_declarator" | "pointer_declarator" | "variadic_declarator"
            | "parenthesized_declarator" | "init_declarator" => {
                if kind == "init_declarator" {
                    return self.cpp_init_declarator(id, env, out);
                }
                for c in self.named(id) {
                    self.define_target(c, sources, env, out);
                }
            }
            "array_declarator" => {
                self.visit_field(id, "size", env, &mut Vec::new());
                if let Some(d) = self.field(id, "declarator") {
                    self.define_target(d, sources, env, out);
                }
            }
            "subscript" | "attribute" | "subscript_expression" | "field_expression"
            | "array_access" | "field_access" | "pointer_expression" => {
                self.partial_store(id, sources, env, out)
            }
            _ => {
                self.visit(id, env, &mut Vec::new());
            }
        }
    }

    fn partial_store(&mut self, id: usize, sources: &[usize], env: &mut Env, out: &mut Vec<usize>) {
        let kind = self.kind(id);
        if kind == "identifier" {
            self.weak_define(id, sources, env);
            out.push(id);
            return;
        }
        let (base_field, rest): (&str, &[&str]) = match kind {
            "subscript" => ("value", &["subscript"]),
            "attribute" => ("object", &[]),
            "subscript_expression" => ("argument", &["indices"]),
            "field_expression" | "pointer_expression" => ("argument", &[]),
            "array_access" => ("array", &["index"]),
            "field_access" => ("object", &[]),
            "parenthesized_expression" => {
                if let Some(&inner) = self.named(id).first() {
                    self.partial_store(inner, sources, env, out);
                }
                return;
            }
            _ => {
                self.visit(id, env, &mut Vec::new());
                return;
            }
        };
        for f in rest {
            self.visit_field(id, f, env, &mut Vec::new());
        }
        match self.field(id, base_field) {
            Some(base) if kind == "field_access" && self.kind(base) == "this" => {
                if let Some(field) = self.field(id, "field") {
                    if self.kind(field) == "identifier" {
                        self.weak_define(field, sources, env);
                        out.push(field);
                    }
                }
            }
            Some(base) => self.partial_store(base, sources, env, out),
            None => {}
        }
    }

    fn py_function(&mut self, id: usize, env: &mut Env) {
        if let Some(name) = self.field(id, "name") {
            self.define(name, &[], env, true);
        }
        let mut inner = env.clone();
        if let Some(params) = self.field(id, "parameters") {
            self.params(params, env, &mut inner);
        }
        self.visit_field(id, "body", &mut inner, &mut Vec::new());
    }

    fn py_class(&mut self, id: usize, env: &mut Env) {
        if let Some(name) = self.field(id, "name") {
            self.define(name, &[], env, true);
        }
        self.visit_field(id, "superclasses", env, &mut Vec::new());
        let mut inner = env.clone();
        self.visit_field(id, "body", &mut inner, &mut Vec::new());
    }

    fn cpp_function(&mut self, id: usize, env: &mut Env) {
        let mut inner = env.clone();
        if let Some(decl) = self.field(id, "declarator").and_then(|d| self.function_declarator(d)) {
            if let Some(name) = self.field(decl, "declarator") {
                if self.kind(name) == "identifier" {
                    self.define(name, &[], env, false);
                    inner = env.clone();
                }
            }
            if let Some(params) = self.field(decl, "parameters") {
                self.params(params, env, &mut inner);
            }
        }
        for c in self.tree.children(id).to_vec() {
            let f = self.tree.node(c).field;
            if f != Some("declarator") && f != Some("type") {
                self.visit(c, &mut inner, &mut Vec::new());
            }
        }
    }

    fn function_declarator(&self, mut id: usize) -> Option<usize> {
        loop {
            match self.kind(id) {
                "function_declarator" => return Some(id),
                "pointer_declarator" | "reference_declarator" | "parenthesized_declarator" => {
                    id = self
                        .field(id, "declarator")
                        .or_else(|| self.tree.named_children(id).last())?;
                }
                _ => return None,
            }
        }
    }

    fn java_method(&mut self, id: usize, env: &mut Env) {
        let mut inner = env.clone();
        if let Some(params) = self.field(id, "parameters") {
            self.params(params, env, &mut inner);
        }
        self.visit_field(id, "body", &mut inner, &mut Vec::new());
    }

    fn java_class(&mut self, id: usize, env: &mut Env) {
        if let Some(name) = self.field(id, "name") {
            self.define(name, &[], env, false);
        }
        let mut inner = env.clone();
        if let Some(body) = self.field(id, "body") {
            let mut members = self.named(body);
            // enum constants and members live one level down
            if let Some(&decls) = members
                .iter()
                .find(|&&m| self.kind(m) == "enum_body_declarations")
            {
                members.extend(self.named(decls));
            }
            for m in members {
                if self.kind(m) == "method_declaration" {
                    if let Some(name) = self.field(m, "name") {
                        self.define(name, &[], &mut inner, false);
                    }
                }
            }
            self.visit(body, &mut inner, &mut Vec::new());
        }
    }

    /// Bind parameters into `inner`; default values are evaluated in `outer`.
    fn params(&mut self, id: usize, outer: &mut Env, inner: &mut Env) {
        for p in self.named(id) {
            match self.kind(p) {
                "identifier" => self.define(p, &[], inner, true),
                "default_parameter" | "typed_default_parameter" => {
                    let sources = self.values_of_field(p, "value", outer);
                    if let Some(name) = self.field(p, "name") {
                        self.define_target(name, &sources, inner, &mut Vec::new());
                    }
                }
                "typed_parameter" => {
                    for c in self.named(p) {
                        if self.tree.node(c).field != Some("type") {
                            self.define_target(c, &[], inner, &mut Vec::new());
                        }
                    }
                }
                "list_splat_pattern" | "dictionary_splat_pattern" | "tuple_pattern" => {
                    self.define_target(p, &[], inner, &mut Vec::new())
                }
                "parameter_declaration" | "optional_parameter_declaration"
                | "variadic_parameter_declaration" => {
                    let sources = self.values_of_field(p, "default_value", outer);
                    if let Some(d) = self.field(p, "declarator") {
                        self.define_target(d, &sources, inner, &mut Vec::new());
                    }
                }
                "formal_parameter" | "catch_formal_parameter" => {
                    if let Some(name) = self.field(p, "name") {
                        self.define(name, &[], inner, true);
                    }
                }
                "spread_parameter" => {
                    for c in self.named(p) {
                        if self.kind(c) == "variable_declarator" {
                            if let Some(name) = self.field(c, "name") {
                                self.define(name, &[], inner, true);
                            }
                        }
                    }
                }
                "inferred_parameters" | "formal_parameters" | "lambda_parameters" => {
                    self.params(p, outer, inner)
                }
                _ => {}
            }
        }
    }

    fn lambda(&mut self, id: usize, env: &mut Env, out: &mut Vec<usize>) {
        let mut inner = env.clone();
        match self.lang {
            LanguageId::Cpp => {
                self.visit_field(id, "captures", env, &mut Vec::new());
                if let Some(params) = self
                    .field(id, "declarator")
                    .and_then(|d| self.field(d, "parameters"))
                {
                    self.params(params, env, &mut inner);
                }
            }
            _ => {
                if let Some(params) = self.field(id, "parameters") {
                    if self.kind(params) == "identifier" {
                        self.define(params, &[], &mut inner, true);
                    } else {
                        self.params(params, env, &mut inner);
                    }
                }
            }
        }
        self.visit_field(id, "body", &mut inner, out);
    }

    fn comprehension(&mut self, id: usize, env: &mut Env, out: &mut Vec<usize>) {
        let mut inner = env.clone();
        for c in self.named(id) {
            match self.kind(c) {
                "for_in_clause" => {
                    let sources = self.values_of_field(c, "right", &mut inner);
                    out.extend(&sources);
                    if let Some(left) = self.field(c, "left") {
                        self.define_target(left, &sources, &mut inner, &mut Vec::new());
                    }
                }
                "if_clause" => self.visit(c, &mut inner, out),
                _ => {}
            }
        }
        self.visit_field(id, "body", &mut inner, out);
    }

    fn as_pattern(&mut self, id: usize, env: &mut Env, out: &mut Vec<usize>) {
        let mut sources = Vec::new();
        for c in self.tree.children(id).to_vec() {
            if self.tree.node(c).field != Some("alias") {
                self.visit(c, env, &mut sources);
            }
        }
        out.extend(&sources);
        if let Some(alias) = self.field(id, "alias") {
            self.define_target(alias, &sources, env, out);
        }
    }

    fn py_import(&mut self, id: usize, env: &mut Env) {
        for c in self.tree.children_by_field(id, "name").collect::<Vec<_>>() {
            let bound = match self.kind(c) {
                "aliased_import" => self.field(c, "alias"),
                "dotted_name" => {
                    let parts = self.named(c);
                    if self.kind(id) == "import_statement" {
                        parts.first().copied()
                    } else {
                        parts.last().copied()
                    }
                }
                _ => None,
            };
            if let Some(name) = bound {
                self.define(name, &[], env, true);
            }
        }
    }

    fn if_statement(&mut self, id: usize, env: &mut Env) {
        self.visit_field(id, "condition", env, &mut Vec::new());
        let pre = env.clone();
        let mut branches = Vec::new();
        let mut taken = pre.clone();
        self.visit_field(id, "consequence", &mut taken, &mut Vec::new());
        branches.push(taken);
        for alt in self.tree.children_by_field(id, "alternative").collect::<Vec<_>>() {
            let mut taken = pre.clone();
            match self.kind(alt) {
                "elif_clause" => {
                    self.visit_field(alt, "condition", &mut taken, &mut Vec::new());
                    self.visit_field(alt, "consequence", &mut taken, &mut Vec::new());
                }
                _ => self.visit(alt, &mut taken, &mut Vec::new()),
            }
            branches.push(taken);
        }
        for b in &branches {
            merge(env, b);
        }
    }

    fn loop_passes(&mut self, env: &mut Env, mut pass: impl FnMut(&mut Self, &mut Env)) {
        let pre = env.clone();
        for i in 0..LOOP_PASSES {
            if i > 0 {
                merge(env, &pre);
            }
            pass(self, env);
        }
        merge(env, &pre);
    }

    fn while_loop(&mut self, id: usize, env: &mut Env) {
        self.loop_passes(env, |w, env| {
            w.visit_field(id, "condition", env, &mut Vec::new());
            w.visit_field(id, "body", env, &mut Vec::new());
        });
        self.visit_field(id, "alternative", env, &mut Vec::new());
    }

    fn do_loop(&mut self, id: usize, env: &mut Env) {
        self.loop_passes(env, |w, env| {
            w.visit_field(id, "body", env, &mut Vec::new());
            w.visit_field(id, "condition", env, &mut Vec::new());
        });
    }

    fn py_for(&mut self, id: usize, env: &mut Env) {
        let sources = self.values_of_field(id, "right", env);
        let left = self.field(id, "left");
        self.loop_passes(env, |w, env| {
            if let Some(left) = left {
                w.define_target(left, &sources, env, &mut Vec::new());
            }
            w.visit_field(id, "body", env, &mut Vec::new());
        });
        self.visit_field(id, "alternative", env, &mut Vec::new());
    }

    fn c_for(&mut self, id: usize, env: &mut Env) {
        let init = if self.lang == LanguageId::Java { "init" } else { "initializer" };
        self.visit_field(id, init, env, &mut Vec::new());
        self.loop_passes(env, |w, env| {
            w.visit_field(id, "condition", env, &mut Vec::new());
            w.visit_field(id, "body", env, &mut Vec::new());
            w.visit_field(id, "update", env, &mut Vec::new());
        });
    }

    fn each_loop(&mut self, id: usize, target: &str, iterable: &str, env: &mut Env) {
        let sources = self.values_of_field(id, iterable, env);
        let target = self.field(id, target);
        self.loop_passes(env, |w, env| {
            if let Some(t) = target {
                w.define_target(t, &sources, env, &mut Vec::new());
            }
            w.visit_field(id, "body", env, &mut Vec::new());
        });
    }

    fn py_assignment(&mut self, id: usize, env: &mut Env, out: &mut Vec<usize>) {
        let (Some(left), Some(right)) = (self.field(id, "left"), self.field(id, "right")) else {
            return;
        };
        let sequence = |k: &str| {
            matches!(
                k,
                "pattern_list" | "tuple_pattern" | "list_pattern" | "expression_list" | "tuple"
                    | "list"
            )
        };
        if self.kind(id) == "assignment" && sequence(self.kind(left)) && sequence(self.kind(right))
        {
            let targets = self.named(left);
            let values = self.named(right);
            if targets.len() == values.len() {
                let per_value: Vec<Vec<usize>> =
                    values.iter().map(|&v| self.values(v, env)).collect();
                for (t, sources) in targets.into_iter().zip(per_value) {
                    self.define_target(t, &sources, env, out);
                }
                return;
            }
        }
        let sources = self.values(right, env);
        self.define_target(left, &sources, env, out);
    }

    fn assignment_expression(&mut self, id: usize, env: &mut Env, out: &mut Vec<usize>) {
        let sources = self.values_of_field(id, "right", env);
        if let Some(left) = self.field(id, "left") {
            self.define_target(left, &sources, env, out);
        }
    }

    fn cpp_declaration(&mut self, id: usize, env: &mut Env) {
        for d in self.tree.children_by_field(id, "declarator").collect::<Vec<_>>() {
            match self.kind(d) {
                "init_declarator" => self.cpp_init_declarator(d, env, &mut Vec::new()),
                "function_declarator" => {
                    if let Some(name) = self.field(d, "declarator") {
                        if self.kind(name) == "identifier" {
                            self.define(name, &[], env, false);
                        }
                    }
                }
                _ => {
                    let sources = self.values_of_field(id, "value", env);
                    self.define_target(d, &sources, env, &mut Vec::new());
                }
            }
        }
    }

    fn cpp_init_declarator(&mut self, id: usize, env: &mut Env, out: &mut Vec<usize>) {
        let sources = self.values_of_field(id, "value", env);
        if let Some(d) = self.field(id, "declarator") {
            self.define_target(d, &sources, env, out);
        }
    }

    fn update(&mut self, id: usize, env: &mut Env, out: &mut Vec<usize>) {
        let arg = self
            .field(id, "argument")
            .or_else(|| self.tree.named_children(id).next());
        let Some(arg) = arg else { return };
        if self.kind(arg) == "identifier" {
            self.mark(arg, DfgRole::Definition);
            for d in self.reaching(arg, env) {
                self.edge(arg, d);
            }
            env.insert(self.text(arg).to_string(), BTreeSet::from([arg]));
            out.push(arg);
        } else {
            self.partial_store(arg, &[], env, out);
        }
    }

    fn call(&mut self, id: usize, env: &mut Env, out: &mut Vec<usize>) {
        if let Some(f) = self.field(id, "function") {
            self.callee_expression(f, env, out);
        }
        self.visit_field(id, "arguments", env, out);
    }

    fn callee_expression(&mut self, f: usize, env: &mut Env, out: &mut Vec<usize>) {
        match self.kind(f) {
            "identifier" => self.callee(f, env, out),
            "attribute" => {
                self.visit_field(f, "object", env, out);
                if let Some(name) = self.field(f, "attribute") {
                    self.method_callee(name, out);
                }
            }
            "field_expression" => {
                self.visit_field(f, "argument", env, out);
                if let Some(name) = self.field(f, "field") {
                    self.method_callee(name, out);
                }
            }
            "qualified_identifier" | "template_function" => match self.field(f, "name") {
                Some(name) if self.kind(name) == "identifier" => self.callee(name, env, out),
                Some(name) if self.kind(name) == "template_function" => {
                    self.callee_expression(name, env, out)
                }
                _ => self.visit(f, env, out),
            },
            _ => self.visit(f, env, out),
        }
    }

    fn java_invocation(&mut self, id: usize, env: &mut Env, out: &mut Vec<usize>) {
        let object = self.field(id, "object");
        if let Some(obj) = object {
            self.visit(obj, env, out);
        }
        if let Some(name) = self.field(id, "name") {
            if object.is_some() {
                self.method_callee(name, out);
            } else {
                self.callee(name, env, out);
            }
        }
        self.visit_field(id, "arguments", env, out);
    }
}
