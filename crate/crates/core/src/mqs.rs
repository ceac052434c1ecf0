//! Multiple selection on arrays with pass counting.
//!
//! Each call partitions its segment around the FIRST element with an
//! order-preserving (stable) partition: elements smaller than the pivot keep
//! their relative order, likewise the larger ones. With a uniformly random
//! input this reproduces the random search-tree shape exactly, so on every
//! single instance the number of passes equals the node count of the subtree
//! spanning the tree root and the requested ranks. An in-place swapping
//! partition would preserve the distribution but break that per-instance
//! identity, which is why it is not used here.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::treesim::build_bst;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MqsError {
    #[error("input keys are not distinct")]
    DuplicateKeys,
    #[error("rank {rank} out of range 1..={n}")]
    RankOutOfRange { rank: usize, n: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

/// Result of one multiple-selection run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MqsResult<T> {
    /// rank -> key value (the rank-th smallest input element)
    pub found: BTreeMap<usize, T>,
    /// number of partitioning passes performed
    pub passes: usize,
}

/// Find the elements of `data` at the given 1-based `ranks`, counting
/// partitioning passes. Segments whose rank set is empty cost nothing.
pub fn multiple_quickselect<T: Ord + Copy>(
    data: &[T],
    ranks: &[usize],
) -> Result<MqsResult<T>, MqsError> {
    let n = data.len();
    for &r in ranks {
        if r == 0 || r > n {
            return Err(MqsError::RankOutOfRange { rank: r, n });
        }
    }
    let mut sorted_ranks: Vec<usize> = ranks.to_vec();
    sorted_ranks.sort_unstable();
    sorted_ranks.dedup();

    {
        let mut keys: Vec<T> = data.to_vec();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(MqsError::DuplicateKeys);
        }
    }

    let mut result = MqsResult {
        found: BTreeMap::new(),
        passes: 0,
    };
    select_segment(data.to_vec(), 0, &sorted_ranks, &mut result);
    Ok(result)
}

/// Recurse on one segment. `offset` is the number of input elements strictly
/// smaller than everything in `seg`; `ranks` are absolute 1-based ranks that
/// all fall inside the segment.
fn select_segment<T: Ord + Copy>(
    seg: Vec<T>,
    offset: usize,
    ranks: &[usize],
    out: &mut MqsResult<T>,
) {
    if ranks.is_empty() || seg.is_empty() {
        return;
    }
    out.passes += 1;
    let pivot = seg[0];
    let mut smaller = Vec::new();
    let mut larger = Vec::new();
    for &v in &seg[1..] {
        if v < pivot {
            smaller.push(v);
        } else {
            larger.push(v);
        }
    }
    let pivot_rank = offset + smaller.len() + 1;
    let split = ranks.partition_point(|&r| r < pivot_rank);
    let (low, rest) = ranks.split_at(split);
    let high = if rest.first() == Some(&pivot_rank) {
        out.found.insert(pivot_rank, pivot);
        &rest[1..]
    } else {
        rest
    };
    select_segment(smaller, offset, low, out);
    select_segment(larger, pivot_rank, high, out);
}

/// Check the per-instance identity between the pass count and the size of the
/// subtree spanning the tree root and the rank set (nonempty ranks only).
pub fn passes_equal_tree(perm: &[usize], ranks: &[usize]) -> Result<bool, MqsError> {
    if ranks.is_empty() {
        return Err(MqsError::InvalidParameters(
            "ranks must be nonempty for the tree comparison".into(),
        ));
    }
    let result = multiple_quickselect(perm, ranks)?;
    let bst = build_bst(perm).map_err(|e| MqsError::InvalidParameters(e.to_string()))?;
    let span = bst
        .span_with_root_size(ranks)
        .map_err(|e| MqsError::InvalidParameters(e.to_string()))?;
    Ok(result.passes == span)
}

#[derive(Debug, Clone, Copy, Serialize)]
struct HistBin {
    m: usize,
    count: u64,
}

fn ser_hist<S>(h: &BTreeMap<usize, u64>, s: S) -> Result<S::Ok, S::Error>
where
    S: serde::Serializer,
{
    s.collect_seq(h.iter().map(|(&m, &count)| HistBin { m, count }))
}

/// Batch summary for repeated selection runs on shuffled inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MqsBatchSummary {
    pub n: usize,
    /// fixed rank set, or None when ranks are redrawn uniformly per trial
    pub ranks: Option<Vec<usize>>,
    pub p: usize,
    pub trials: u64,
    pub seed: u64,
    #[serde(serialize_with = "ser_hist")]
    pub hist_passes: BTreeMap<usize, u64>,
    /// whether every run returned the true order statistics
    pub found_verified: bool,
    pub sample_mean_passes: f64,
}

impl MqsBatchSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,count\n");
        for (m, c) in &self.hist_passes {
            out.push_str(&format!("{m},{c}\n"));
        }
        out
    }
}

/// Run `trials` selections on fresh uniform permutations of 1..=n.
/// `ranks`: either a fixed set, or None to draw a uniform p-subset per trial.
/// Deterministic per (seed, trial index) stream, independent of thread count.
pub fn run_mqs_batch(
    n: usize,
    ranks: Option<&[usize]>,
    p: usize,
    trials: u64,
    seed: u64,
) -> Result<MqsBatchSummary, MqsError> {
    if n == 0 || trials == 0 {
        return Err(MqsError::InvalidParameters(
            "need n >= 1 and trials >= 1".into(),
        ));
    }
    let fixed: Option<Vec<usize>> = match ranks {
        Some(r) => {
            if r.is_empty() {
                return Err(MqsError::InvalidParameters("rank set is empty".into()));
            }
            for &x in r {
                if x == 0 || x > n {
                    return Err(MqsError::RankOutOfRange { rank: x, n });
                }
            }
            let mut v = r.to_vec();
            v.sort_unstable();
            v.dedup();
            Some(v)
        }
        None => {
            if p == 0 || p > n {
                return Err(MqsError::InvalidParameters(format!(
                    "need 1 <= p <= n, got p = {p}, n = {n}"
                )));
            }
            None
        }
    };
    let p_eff = fixed.as_ref().map(|v| v.len()).unwrap_or(p);

    const CHUNK: u64 = 2048;
    let items = trials.div_ceil(CHUNK);
    let (hist, ok) = (0..items)
        .into_par_iter()
        .map(|b| {
            let lo = b * CHUNK;
            let hi = (lo + CHUNK).min(trials);
            let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
            let mut ok = true;
            let mut perm: Vec<usize> = (1..=n).collect();
            for t in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t);
                for (i, slot) in perm.iter_mut().enumerate() {
                    *slot = i + 1;
                }
                perm.shuffle(&mut rng);
                let ranks_buf;
                let ranks: &[usize] = match &fixed {
                    Some(v) => v,
                    None => {
                        let mut draw = Vec::with_capacity(p_eff);
                        for j in (n - p_eff + 1)..=n {
                            let t = rng.random_range(1..=j);
                            if draw.contains(&t) {
                                draw.push(j);
                            } else {
                                draw.push(t);
                            }
                        }
                        draw.sort_unstable();
                        ranks_buf = draw;
                        &ranks_buf
                    }
                };
                let res = multiple_quickselect(&perm, ranks).expect("valid inputs");
                // keys are 1..=n, so the r-th smallest is r itself
                ok &= ranks.iter().all(|&r| res.found.get(&r) == Some(&r));
                *hist.entry(res.passes).or_insert(0) += 1;
            }
            (hist, ok)
        })
        .reduce(
            || (BTreeMap::new(), true),
            |(mut ha, oa), (hb, ob)| {
                for (m, c) in hb {
                    *ha.entry(m).or_insert(0) += c;
                }
                (ha, oa && ob)
            },
        );

    let mean = hist
        .iter()
        .map(|(&m, &c)| m as f64 * c as f64)
        .sum::<f64>()
        / trials as f64;
    Ok(MqsBatchSummary {
        n,
        ranks: fixed,
        p: p_eff,
        trials,
        seed,
        hist_passes: hist,
        found_verified: ok,
        sample_mean_passes: mean,
    })
}
