//! Exhaustive verification that every gamma-sequence is covered by one of
//! the candidate subsets: 5^9 = 1,953,125 sequences against 77 packed
//! membership masks.

use std::collections::BTreeMap;

use serde::Serialize;

use super::families::CandidateSubset;
use super::graph::PATHS;

pub const SEQUENCE_COUNT: u64 = 1_953_125; // 5^9

#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub sequences: u64,
    pub covered: u64,
    /// Uncovered sequences as gamma tuples; empty on success.
    pub uncovered: Vec<[u8; PATHS]>,
    /// First-hit counts per family, keyed by the family display name.
    #[serde(rename = "familyHits")]
    pub family_hits: BTreeMap<String, u64>,
}

impl CoverReport {
    pub fn all_covered(&self) -> bool {
        self.covered == self.sequences && self.uncovered.is_empty()
    }
}

fn sequence_mask(index: u64) -> (u64, [u8; PATHS]) {
    let mut rest = index;
    let mut mask = 0u64;
    let mut gammas = [0u8; PATHS];
    for (i, slot) in gammas.iter_mut().enumerate() {
        let g = (rest % 5) as u8;
        rest /= 5;
        *slot = g;
        mask |= 1u64 << (5 * i + g as usize);
    }
    (mask, gammas)
}

fn scan_range(families: &[u64], start: u64, end: u64) -> (u64, Vec<[u8; PATHS]>, Vec<u64>) {
    let mut covered = 0u64;
    let mut uncovered = Vec::new();
    let mut hits = vec![0u64; families.len()];
    for index in start..end {
        let (mask, gammas) = sequence_mask(index);
        match families.iter().position(|f| mask & f == mask) {
            Some(first) => {
                covered += 1;
                hits[first] += 1;
            }
            None => {
                if uncovered.len() < 32 {
                    uncovered.push(gammas);
                }
            }
        }
    }
    (covered, uncovered, hits)
}

/// Run the search over all sequences with a fixed deterministic partition
/// into `workers` contiguous ranges; the merge is associative, so the
/// result is independent of the partitioning.
pub fn cover_search(families: &[CandidateSubset], workers: usize) -> CoverReport {
    let masks: Vec<u64> = families.iter().map(|f| f.mask45()).collect();
    let workers = workers.max(1).min(SEQUENCE_COUNT as usize);
    let chunk = SEQUENCE_COUNT.div_ceil(workers as u64);
    let results: Vec<(u64, Vec<[u8; PATHS]>, Vec<u64>)> = if workers == 1 {
        vec![scan_range(&masks, 0, SEQUENCE_COUNT)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers as u64)
                .map(|w| {
                    let masks = &masks;
                    let start = w * chunk;
                    let end = ((w + 1) * chunk).min(SEQUENCE_COUNT);
                    scope.spawn(move || scan_range(masks, start, end))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };
    let mut covered = 0;
    let mut uncovered = Vec::new();
    let mut hits = vec![0u64; families.len()];
    for (c, u, h) in results {
        covered += c;
        for seq in u {
            if uncovered.len() < 32 {
                uncovered.push(seq);
            }
        }
        for (acc, x) in hits.iter_mut().zip(h) {
            *acc += x;
        }
    }
    CoverReport {
        sequences: SEQUENCE_COUNT,
        covered,
        uncovered,
        family_hits: families
            .iter()
            .zip(hits)
            .map(|(f, h)| (f.tag.to_string(), h))
            .collect(),
    }
}
