//! Match-based translation metrics: token-level exact match, corpus BLEU and
//! CodeBLEU, plus per-direction report rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codebleu::{self, precision_counts, CodeBleuScores, CodeBleuWeights};
use crate::lang::LanguageId;
use crate::syntax::tokenize;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("corpus length mismatch: {refs} references, {hyps} hypotheses")]
    LengthMismatch { refs: usize, hyps: usize },
}

fn tokens(lang: LanguageId, code: &str) -> Vec<String> {
    tokenize(lang, code).unwrap_or_else(|_| code.split_whitespace().map(str::to_string).collect())
}

/// True iff both texts have the same token sequence under the grammar of
/// `lang`, so whitespace and layout do not matter.
pub fn exact_match(lang: LanguageId, reference: &str, hypothesis: &str) -> bool {
    tokens(lang, reference) == tokens(lang, hypothesis)
}

pub fn corpus_exact_match(lang: LanguageId, refs: &[&str], hyps: &[&str]) -> Result<f64, MetricsError> {
    check(refs.len(), hyps.len())?;
    let hits = refs
        .iter()
        .zip(hyps)
        .filter(|(r, h)| exact_match(lang, r, h))
        .count();
    Ok(hits as f64 / refs.len() as f64)
}

fn check(refs: usize, hyps: usize) -> Result<(), MetricsError> {
    if refs != hyps {
        return Err(MetricsError::LengthMismatch { refs, hyps });
    }
    if refs == 0 {
        return Err(MetricsError::EmptyCorpus);
    }
    Ok(())
}

/// Corpus BLEU-4 on a 0-100 scale. Higher orders with no matching n-gram
/// are smoothed to 1 / (count + 1); with no unigram match the score is 0.
pub fn bleu(refs: &[Vec<String>], hyps: &[Vec<String>]) -> Result<f64, MetricsError> {
    check(refs.len(), hyps.len())?;
    let (num, den, ref_len, hyp_len) = precision_counts(refs, hyps);
    if num[0] == 0.0 {
        return Ok(0.0);
    }
    let log_p: f64 = (0..4)
        .map(|i| {
            let (n, d) = if num[i] == 0.0 { (1.0, den[i] + 1.0) } else { (num[i], den[i]) };
            0.25 * (n / d).ln()
        })
        .sum();
    let bp = if hyp_len > ref_len {
        1.0
    } else if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    Ok(100.0 * bp * log_p.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub samples: usize,
    /// Exact match over token sequences.
    pub em: f64,
    pub bleu: f64,
    pub codebleu: CodeBleuScores,
}

/// All metrics for one corpus whose hypotheses are in `lang`.
pub fn evaluate(lang: LanguageId, refs: &[&str], hyps: &[&str]) -> Result<MetricReport, MetricsError> {
    check(refs.len(), hyps.len())?;
    let rt: Vec<Vec<String>> = refs.iter().map(|r| tokens(lang, r)).collect();
    let ht: Vec<Vec<String>> = hyps.iter().map(|h| tokens(lang, h)).collect();
    let em = rt.iter().zip(&ht).filter(|(a, b)| a == b).count() as f64 / refs.len() as f64;
    Ok(MetricReport {
        samples: refs.len(),
        em,
        bleu: bleu(&rt, &ht)?,
        codebleu: codebleu::codebleu(refs, hyps, lang, CodeBleuWeights::default()),
    })
}

/// One scored translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub sample_id: String,
    pub src_lang: LanguageId,
    pub tgt_lang: LanguageId,
    pub reference: String,
    pub hypothesis: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub label: String,
    pub report: MetricReport,
}

fn mean_report(rows: &[&MetricReport]) -> MetricReport {
    let n = rows.len() as f64;
    let avg = |f: &dyn Fn(&MetricReport) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
    MetricReport {
        samples: rows.iter().map(|r| r.samples).sum(),
        em: avg(&|r| r.em),
        bleu: avg(&|r| r.bleu),
        codebleu: CodeBleuScores {
            ngram: avg(&|r| r.codebleu.ngram),
            weighted_ngram: avg(&|r| r.codebleu.weighted_ngram),
            syntax_match: avg(&|r| r.codebleu.syntax_match),
            dataflow_match: avg(&|r| r.codebleu.dataflow_match),
            combined: avg(&|r| r.codebleu.combined),
        },
    }
}

/// Rows "A -> B" per direction, then "From X" / "To X" (means over the
/// directions leaving or entering X), then "Average" over directions.
pub fn metric_rows(pairs: &[ScoredPair]) -> Result<Vec<MetricRow>, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut groups: BTreeMap<(LanguageId, LanguageId), Vec<&ScoredPair>> = BTreeMap::new();
    for p in pairs {
        groups.entry((p.src_lang, p.tgt_lang)).or_default().push(p);
    }
    let mut per_dir = BTreeMap::new();
    for (&(s, t), ps) in &groups {
        let refs: Vec<&str> = ps.iter().map(|p| p.reference.as_str()).collect();
        let hyps: Vec<&str> = ps.iter().map(|p| p.hypothesis.as_str()).collect();
        per_dir.insert((s, t), evaluate(t, &refs, &hyps)?);
    }
    let mut rows: Vec<MetricRow> = per_dir
        .iter()
        .map(|(&(s, t), r)| MetricRow {
            label: format!("{} -> {}", s.display_name(), t.display_name()),
            report: *r,
        })
        .collect();
    for lang in LanguageId::ALL {
        let from: Vec<&MetricReport> = per_dir.iter().filter(|(k, _)| k.0 == lang).map(|(_, v)| v).collect();
        if !from.is_empty() {
            rows.push(MetricRow {
                label: format!("From {}", lang.display_name()),
                report: mean_report(&from),
            });
        }
        let to: Vec<&MetricReport> = per_dir.iter().filter(|(k, _)| k.1 == lang).map(|(_, v)| v).collect();
        if !to.is_empty() {
            rows.push(MetricRow {
                label: format!("To {}", lang.display_name()),
                report: mean_report(&to),
            });
        }
    }
    let all: Vec<&MetricReport> = per_dir.values().collect();
    rows.push(MetricRow {
        label: "Average".into(),
        report: mean_report(&all),
    });
    Ok(rows)
}
