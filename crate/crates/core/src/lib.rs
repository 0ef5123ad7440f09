pub mod codebleu;
pub mod dataflow;
pub mod dataset;
pub mod dedup;
pub mod encoding;
pub mod gateway;
pub mod harness;
pub mod lang;
pub mod metrics;
pub mod syntax;

pub use dataflow::{extract_dfg, DataFlowGraph, DfgEdge, DfgNode, DfgOptions, DfgRole};
pub use lang::{LanguageId, UnsupportedLanguage};
pub use syntax::{leaf_tokens, parse, simplify, SimplifiedAst, SourceUnit, SyntaxError, SyntaxTree, Token};
