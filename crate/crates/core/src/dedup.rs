//! Near-duplicate removal over token 5-gram shingle sets.
//!
//! MinHash signatures banded into an LSH table propose candidates; every
//! candidate is confirmed with the exact Jaccard similarity of the shingle
//! sets. Banding alone misses some pairs just above the threshold (a pair at
//! 0.86 collides in a 16x16 table only about 78% of the time), so by default a
//! prefix-filter index over the retained sets completes the search exactly.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::dataset::ParallelPair;
use crate::lang::LanguageId;
use crate::syntax::tokenize;

pub const SIGNATURE_LEN: usize = 256;
pub const SHINGLE_LEN: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DedupConfig {
    /// A record is dropped when its Jaccard similarity with an earlier
    /// retained record is strictly greater than this.
    pub threshold: f64,
    pub bands: usize,
    pub rows: usize,
    /// Follow up LSH misses with an exact prefix-filter search.
    pub exact_completion: bool,
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            threshold: 0.85,
            bands: 16,
            rows: 16,
            exact_completion: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropEntry {
    pub dropped: String,
    pub survivor: String,
    pub jaccard: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DropReport {
    pub threshold: f64,
    pub examined: usize,
    pub entries: Vec<DropEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DedupOutcome {
    /// Indices of retained documents, ascending.
    pub retained: Vec<usize>,
    /// `(dropped, survivor)` index pairs.
    pub dropped: Vec<(usize, usize)>,
}

fn fnv1a(bytes: &[u8], mut h: u64) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Hashed token 5-grams. Sequences shorter than five tokens give a single
/// shingle covering all of them; an empty sequence gives the empty set.
pub fn shingles<S: AsRef<str>>(tokens: &[S]) -> HashSet<u64> {
    let hash_window = |w: &[S]| {
        w.iter().fold(FNV_OFFSET, |h, t| fnv1a(&[0xff], fnv1a(t.as_ref().as_bytes(), h)))
    };
    if tokens.is_empty() {
        return HashSet::new();
    }
    if tokens.len() < SHINGLE_LEN {
        return HashSet::from([hash_window(tokens)]);
    }
    tokens.windows(SHINGLE_LEN).map(hash_window).collect()
}

/// Exact Jaccard similarity. Two empty sets count as identical.
pub fn jaccard(a: &HashSet<u64>, b: &HashSet<u64>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.iter().filter(|x| large.contains(x)).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinHashSignature(pub Vec<u64>);

/// Signature under 256 fixed, seed-derived hash functions.
pub fn signature(set: &HashSet<u64>) -> MinHashSignature {
    let mut values = vec![u64::MAX; SIGNATURE_LEN];
    for &s in set {
        for (i, v) in values.iter_mut().enumerate() {
            let h = splitmix64(s ^ splitmix64(i as u64 + 1));
            if h < *v {
                *v = h;
            }
        }
    }
    MinHashSignature(values)
}

fn band_keys(sig: &MinHashSignature, bands: usize, rows: usize) -> Vec<(usize, u64)> {
    (0..bands)
        .map(|b| {
            let start = (b * rows).min(sig.0.len());
            let end = ((b + 1) * rows).min(sig.0.len());
            let key = sig.0[start..end]
                .iter()
                .fold(FNV_OFFSET, |h, v| fnv1a(&v.to_le_bytes(), h));
            (b, key)
        })
        .collect()
}

/// Number of leading elements (in a fixed global order) two sets must share
/// at least one of if their Jaccard similarity is at least `t`.
fn prefix_len(size: usize, t: f64) -> usize {
    if size == 0 {
        return 0;
    }
    let need = ((t - 1e-9) * size as f64).ceil().max(0.0) as usize;
    (size + 1).saturating_sub(need).clamp(1, size)
}

/// Deduplicate documents given as shingle sets. Earlier documents win.
pub fn dedup_sets(sets: &[HashSet<u64>], cfg: &DedupConfig) -> DedupOutcome {
    let mut lsh: HashMap<(usize, u64), Vec<usize>> = HashMap::new();
    let mut prefix_index: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut empty_retained: Option<usize> = None;
    let mut retained = Vec::new();
    let mut dropped = Vec::new();

    for (i, set) in sets.iter().enumerate() {
        let keys = band_keys(&signature(set), cfg.bands, cfg.rows);
        let mut candidates: Vec<usize> = keys
            .iter()
            .filter_map(|k| lsh.get(k))
            .flatten()
            .copied()
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        candidates.sort_unstable();
        let mut survivor = candidates
            .into_iter()
            .find(|&j| jaccard(set, &sets[j]) > cfg.threshold);

        let mut sorted: Vec<u64> = set.iter().copied().collect();
        sorted.sort_unstable();
        let prefix = &sorted[..prefix_len(sorted.len(), cfg.threshold)];
        if survivor.is_none() && cfg.exact_completion {
            if set.is_empty() {
                survivor = empty_retained;
            } else {
                let mut cands: Vec<usize> = prefix
                    .iter()
                    .filter_map(|s| prefix_index.get(s))
                    .flatten()
                    .copied()
                    .collect::<HashSet<_>>()
                    .into_iter()
                    .collect();
                cands.sort_unstable();
                survivor = cands
                    .into_iter()
                    .find(|&j| jaccard(set, &sets[j]) > cfg.threshold);
            }
        }

        match survivor {
            Some(j) => dropped.push((i, j)),
            None => {
                for k in keys {
                    lsh.entry(k).or_default().push(i);
                }
                for &s in prefix {
                    prefix_index.entry(s).or_default().push(i);
                }
                if set.is_empty() && empty_retained.is_none() {
                    empty_retained = Some(i);
                }
                retained.push(i);
            }
        }
    }
    DedupOutcome { retained, dropped }
}

/// Shingle set of a source text, tokenized with its grammar (whitespace
/// splitting if the text cannot be parsed).
pub fn source_shingles(lang: LanguageId, text: &str) -> HashSet<u64> {
    match tokenize(lang, text) {
        Ok(tokens) => shingles(&tokens),
        Err(_) => shingles(&text.split_whitespace().collect::<Vec<_>>()),
    }
}

/// Deduplicate pairs on their source code, separately per translation
/// direction. All stage variants of a dropped pair go with it.
pub fn dedup_pairs(pairs: Vec<ParallelPair>, cfg: &DedupConfig) -> (Vec<ParallelPair>, DropReport) {
    let mut groups: HashMap<(LanguageId, LanguageId), Vec<usize>> = HashMap::new();
    for (i, p) in pairs.iter().enumerate() {
        groups.entry((p.src_lang, p.tgt_lang)).or_default().push(i);
    }
    let sets: Vec<HashSet<u64>> = {
        use rayon::prelude::*;
        pairs
            .par_iter()
            .map(|p| source_shingles(p.src_lang, &p.src_code))
            .collect()
    };
    let mut keep = vec![false; pairs.len()];
    let mut entries = Vec::new();
    let mut dirs: Vec<_> = groups.into_iter().collect();
    dirs.sort_by_key(|(k, _)| (k.0.name(), k.1.name()));
    for (_, members) in dirs {
        let group_sets: Vec<HashSet<u64>> = members.iter().map(|&i| sets[i].clone()).collect();
        let outcome = dedup_sets(&group_sets, cfg);
        for r in outcome.retained {
            keep[members[r]] = true;
        }
        for (d, s) in outcome.dropped {
            let (d, s) = (members[d], members[s]);
            entries.push((
                d,
                DropEntry {
                    dropped: pairs[d].pair_id.clone(),
                    survivor: pairs[s].pair_id.clone(),
                    jaccard: jaccard(&sets[d], &sets[s]),
                },
            ));
        }
    }
    entries.sort_by_key(|(d, _)| *d);
    let report = DropReport {
        threshold: cfg.threshold,
        examined: pairs.len(),
        entries: entries.into_iter().map(|(_, e)| e).collect(),
    };
    let kept = pairs
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();
    (kept, report)
}
