//! Binary search trees built from permutations, per-instance spanning-tree
//! statistics, and deterministic Monte-Carlo batch drivers.
//!
//! Node identity is the key rank 1..=n, so a tree built from a permutation
//! lines up one-to-one with the rank set handed to multiple selection.
//! "Spanning tree size" counts NODES, not edges: the subtree spanning a
//! single node has size 1, and the edge distance between two nodes is the
//! size of their spanning subtree minus 1.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeSimError {
    #[error("input is not a permutation of 1..=n: {0}")]
    NotAPermutation(String),
    #[error("selection set is empty")]
    EmptySelection,
    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

/// Array-encoded binary search tree over keys 1..=n. Index 0 is a sentinel;
/// `parent[root] == 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BstInstance {
    n: usize,
    parent: Vec<usize>,
    left: Vec<usize>,
    right: Vec<usize>,
    depth: Vec<usize>,
    root: usize,
}

/// Reusable epoch-stamped mark buffer for the path-marking walks.
#[derive(Debug, Default)]
pub struct MarkScratch {
    stamp: Vec<u64>,
    epoch: u64,
}

impl MarkScratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn begin(&mut self, n: usize) -> u64 {
        if self.stamp.len() < n + 1 {
            self.stamp.resize(n + 1, 0);
        }
        self.epoch += 1;
        self.epoch
    }
}

/// Build a binary search tree by inserting the keys of `perm` in order;
/// the first element becomes the root.
pub fn build_bst(perm: &[usize]) -> Result<BstInstance, TreeSimError> {
    let n = perm.len();
    if n == 0 {
        return Err(TreeSimError::NotAPermutation("empty input".into()));
    }
    let mut seen = vec![false; n + 1];
    for &k in perm {
        if k == 0 || k > n {
            return Err(TreeSimError::NotAPermutation(format!(
                "key {k} outside 1..={n}"
            )));
        }
        if seen[k] {
            return Err(TreeSimError::NotAPermutation(format!("duplicate key {k}")));
        }
        seen[k] = true;
    }

    let mut bst = BstInstance {
        n,
        parent: vec![0; n + 1],
        left: vec![0; n + 1],
        right: vec![0; n + 1],
        depth: vec![0; n + 1],
        root: perm[0],
    };
    for &k in &perm[1..] {
        let mut cur = bst.root;
        loop {
            let slot = if k < cur {
                &mut bst.left[cur]
            } else {
                &mut bst.right[cur]
            };
            if *slot == 0 {
                *slot = k;
                bst.parent[k] = cur;
                bst.depth[k] = bst.depth[cur] + 1;
                break;
            }
            cur = *slot;
        }
    }
    Ok(bst)
}

impl BstInstance {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn depth(&self, node: usize) -> Result<usize, TreeSimError> {
        self.check_node(node)?;
        Ok(self.depth[node])
    }

    pub fn parent(&self, node: usize) -> Result<Option<usize>, TreeSimError> {
        self.check_node(node)?;
        Ok((self.parent[node] != 0).then_some(self.parent[node]))
    }

    fn check_node(&self, node: usize) -> Result<(), TreeSimError> {
        if node == 0 || node > self.n {
            return Err(TreeSimError::NodeOutOfRange { node, n: self.n });
        }
        Ok(())
    }

    fn check_selection(&self, sel: &[usize]) -> Result<(), TreeSimError> {
        if sel.is_empty() {
            return Err(TreeSimError::EmptySelection);
        }
        for &s in sel {
            self.check_node(s)?;
        }
        Ok(())
    }

    /// Node count of the subtree spanning the root and all of `sel`:
    /// the union of root paths, collected by upward marking with early stop
    /// at already-marked ancestors.
    pub fn span_with_root_size(&self, sel: &[usize]) -> Result<usize, TreeSimError> {
        self.span_with_root_size_scratch(sel, &mut MarkScratch::new())
    }

    pub fn span_with_root_size_scratch(
        &self,
        sel: &[usize],
        scratch: &mut MarkScratch,
    ) -> Result<usize, TreeSimError> {
        self.check_selection(sel)?;
        let epoch = scratch.begin(self.n);
        let mut count = 0usize;
        for &s in sel {
            let mut cur = s;
            while scratch.stamp[cur] != epoch {
                scratch.stamp[cur] = epoch;
                count += 1;
                if cur == self.root {
                    break;
                }
                cur = self.parent[cur];
            }
        }
        Ok(count)
    }

    fn lca2(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b];
        }
        while a != b {
            a = self.parent[a];
            b = self.parent[b];
        }
        a
    }

    /// Deepest node that is an ancestor of (or equal to) every member of `sel`.
    pub fn lca(&self, sel: &[usize]) -> Result<usize, TreeSimError> {
        self.check_selection(sel)?;
        let mut l = sel[0];
        for &s in &sel[1..] {
            l = self.lca2(l, s);
        }
        Ok(l)
    }

    /// Depth of the common ancestor of all of `sel` (root depth 0).
    pub fn lca_depth(&self, sel: &[usize]) -> Result<usize, TreeSimError> {
        Ok(self.depth[self.lca(sel)?])
    }

    /// Node count of the minimal subtree spanning `sel`: the union of the
    /// paths from each selected node up to the common ancestor, computed by
    /// direct marking (independently of `span_with_root_size`).
    pub fn span_size(&self, sel: &[usize]) -> Result<usize, TreeSimError> {
        self.span_size_scratch(sel, &mut MarkScratch::new())
    }

    pub fn span_size_scratch(
        &self,
        sel: &[usize],
        scratch: &mut MarkScratch,
    ) -> Result<usize, TreeSimError> {
        let top = self.lca(sel)?;
        let epoch = scratch.begin(self.n);
        let mut count = 0usize;
        for &s in sel {
            let mut cur = s;
            while scratch.stamp[cur] != epoch {
                scratch.stamp[cur] = epoch;
                count += 1;
                if cur == top {
                    break;
                }
                cur = self.parent[cur];
            }
        }
        Ok(count)
    }

    /// Edge distance between two nodes; 0 when a == b.
    pub fn node_distance(&self, a: usize, b: usize) -> Result<usize, TreeSimError> {
        self.check_node(a)?;
        self.check_node(b)?;
        if a == b {
            return Ok(0);
        }
        Ok(self.span_size(&[a, b])? - 1)
    }
}

/// How a batch was sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMethod {
    /// Explicit permutation draw + tree construction per trial.
    Tree,
    /// Recursive subtree-split sampling; same joint (X, Y) law, O(X) per
    /// trial, usable at large n.
    Split,
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

/// Aggregate of one simulation batch: histograms of the pass count X, the
/// span size Y and their difference, plus sample moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub n: usize,
    pub p: usize,
    pub trials: u64,
    pub seed: u64,
    pub method: SimMethod,
    #[serde(serialize_with = "ser_hist")]
    pub hist_x: BTreeMap<usize, u64>,
    #[serde(serialize_with = "ser_hist")]
    pub hist_y: BTreeMap<usize, u64>,
    #[serde(serialize_with = "ser_hist")]
    pub hist_diff: BTreeMap<usize, u64>,
    pub sample_mean_x: f64,
    pub sample_var_x: f64,
    pub sample_mean_y: f64,
    pub sample_var_y: f64,
}

impl SimSummary {
    /// Empirical pmf of one histogram (counts / trials).
    pub fn empirical_pmf(hist: &BTreeMap<usize, u64>, trials: u64) -> BTreeMap<usize, f64> {
        hist.iter()
            .map(|(&m, &c)| (m, c as f64 / trials as f64))
            .collect()
    }

    /// CSV rows `kind,m,count` for the three histograms.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,m,count\n");
        for (name, hist) in [
            ("x", &self.hist_x),
            ("y", &self.hist_y),
            ("diff", &self.hist_diff),
        ] {
            for (m, c) in hist {
                out.push_str(&format!("{name},{m},{c}\n"));
            }
        }
        out
    }
}

#[derive(Default, Clone)]
struct Partial {
    hist_x: BTreeMap<usize, u64>,
    hist_y: BTreeMap<usize, u64>,
    hist_diff: BTreeMap<usize, u64>,
}

impl Partial {
    fn record(&mut self, x: usize, y: usize) {
        *self.hist_x.entry(x).or_insert(0) += 1;
        *self.hist_y.entry(y).or_insert(0) += 1;
        *self.hist_diff.entry(x - y).or_insert(0) += 1;
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (m, c) in other.hist_x {
            *self.hist_x.entry(m).or_insert(0) += c;
        }
        for (m, c) in other.hist_y {
            *self.hist_y.entry(m).or_insert(0) += c;
        }
        for (m, c) in other.hist_diff {
            *self.hist_diff.entry(m).or_insert(0) += c;
        }
        self
    }
}

fn hist_moments(hist: &BTreeMap<usize, u64>, trials: u64) -> (f64, f64) {
    let t = trials as f64;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for (&m, &c) in hist {
        sum += m as f64 * c as f64;
        sum2 += (m as f64) * (m as f64) * c as f64;
    }
    let mean = sum / t;
    // unbiased sample variance
    let var = if trials > 1 {
        (sum2 - t * mean * mean) / (t - 1.0)
    } else {
        0.0
    };
    (mean, var.max(0.0))
}

const TRIALS_PER_RAYON_ITEM: u64 = 4096;

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Uniform p-subset of 1..=n by Floyd's algorithm; `out` is cleared first.
fn sample_subset<R: Rng>(rng: &mut R, n: usize, p: usize, out: &mut Vec<usize>) {
    out.clear();
    for j in (n - p + 1)..=n {
        let t = rng.random_range(1..=j);
        if out.contains(&t) {
            out.push(j);
        } else {
            out.push(t);
        }
    }
}

fn validate_batch_args(n: usize, p: usize, trials: u64) -> Result<(), TreeSimError> {
    if n == 0 || p == 0 || p > n {
        return Err(TreeSimError::InvalidParameters(format!(
            "need 1 <= p <= n, got n = {n}, p = {p}"
        )));
    }
    if trials == 0 {
        return Err(TreeSimError::InvalidParameters("trials must be >= 1".into()));
    }
    Ok(())
}

fn run_batch_generic<F>(
    n: usize,
    p: usize,
    trials: u64,
    seed: u64,
    method: SimMethod,
    per_item: F,
) -> SimSummary
where
    F: Fn(u64, u64) -> Partial + Sync,
{
    let items = trials.div_ceil(TRIALS_PER_RAYON_ITEM);
    let merged = (0..items)
        .into_par_iter()
        .map(|b| {
            let lo = b * TRIALS_PER_RAYON_ITEM;
            let hi = (lo + TRIALS_PER_RAYON_ITEM).min(trials);
            per_item(lo, hi)
        })
        .reduce(Partial::default, Partial::merge);
    let (sample_mean_x, sample_var_x) = hist_moments(&merged.hist_x, trials);
    let (sample_mean_y, sample_var_y) = hist_moments(&merged.hist_y, trials);
    SimSummary {
        n,
        p,
        trials,
        seed,
        method,
        hist_x: merged.hist_x,
        hist_y: merged.hist_y,
        hist_diff: merged.hist_diff,
        sample_mean_x,
        sample_var_x,
        sample_mean_y,
        sample_var_y,
    }
}

/// Monte-Carlo batch over the explicit model: per trial, shuffle 1..=n
/// (Fisher-Yates), build the search tree, draw a uniform p-subset, and record
/// X (span including root), Y (span of the selection) and X - Y.
///
/// Deterministic for a fixed (seed, n, p, trials) regardless of thread count:
/// each trial owns the ChaCha stream indexed by its trial number, and the
/// partial histograms merge commutatively.
pub fn run_batch(n: usize, p: usize, trials: u64, seed: u64) -> Result<SimSummary, TreeSimError> {
    validate_batch_args(n, p, trials)?;
    Ok(run_batch_generic(n, p, trials, seed, SimMethod::Tree, |lo, hi| {
        let mut part = Partial::default();
        let mut perm: Vec<usize> = (1..=n).collect();
        let mut subset: Vec<usize> = Vec::with_capacity(p);
        let mut scratch = MarkScratch::new();
        for t in lo..hi {
            let mut rng = trial_rng(seed, t);
            for (i, slot) in perm.iter_mut().enumerate() {
                *slot = i + 1;
            }
            perm.shuffle(&mut rng);
            let bst = build_bst(&perm).expect("perm is a permutation");
            sample_subset(&mut rng, n, p, &mut subset);
            let x = bst
                .span_with_root_size_scratch(&subset, &mut scratch)
                .expect("subset valid");
            let y = bst
                .span_size_scratch(&subset, &mut scratch)
                .expect("subset valid");
            part.record(x, y);
        }
        part
    }))
}

/// Pass-count subproblem of the split sampler: size of the subtree spanning
/// the root and `sel` selected nodes in a subtree of `size` nodes, sampled by
/// recursive decomposition (uniform root rank, hypergeometric selection
/// split).
fn sample_x_split<R: Rng>(
    rng: &mut R,
    size: usize,
    sel: usize,
    stack: &mut Vec<(usize, usize)>,
    subset: &mut Vec<usize>,
) -> usize {
    let mut total = 0usize;
    stack.clear();
    stack.push((size, sel));
    while let Some((size, sel)) = stack.pop() {
        if size == 0 || sel == 0 {
            continue;
        }
        total += 1;
        let r = rng.random_range(1..=size);
        sample_subset(rng, size, sel, subset);
        let below = subset.iter().filter(|&&s| s < r).count();
        let at = subset.iter().filter(|&&s| s == r).count();
        let above = sel - below - at;
        stack.push((r - 1, below));
        stack.push((size - r, above));
    }
    total
}

/// One (X, Y) draw by recursive subtree splitting. Descends while the whole
/// selection sits in one child subtree (each step adds one level to the
/// ancestor path, i.e. to X - Y); once the selection straddles the local root
/// or contains it, the remainder is a pair of pass-count subproblems.
fn sample_xy_split<R: Rng>(
    rng: &mut R,
    n: usize,
    p: usize,
    stack: &mut Vec<(usize, usize)>,
    subset: &mut Vec<usize>,
) -> (usize, usize) {
    let mut ancestor_depth = 0usize;
    let mut size = n;
    loop {
        let r = rng.random_range(1..=size);
        sample_subset(rng, size, p, subset);
        let below = subset.iter().filter(|&&s| s < r).count();
        let at = subset.iter().filter(|&&s| s == r).count();
        let above = p - below - at;
        if at == 1 || (below >= 1 && above >= 1) {
            let y = 1
                + sample_x_split(rng, r - 1, below, stack, subset)
                + sample_x_split(rng, size - r, above, stack, subset);
            return (y + ancestor_depth, y);
        }
        ancestor_depth += 1;
        size = if below == p { r - 1 } else { size - r };
    }
}

/// Monte-Carlo batch with the same joint (X, Y) law as [`run_batch`] but
/// O(X) work per trial; use this at large n. Deterministic under the same
/// per-trial stream contract.
pub fn run_batch_split(
    n: usize,
    p: usize,
    trials: u64,
    seed: u64,
) -> Result<SimSummary, TreeSimError> {
    validate_batch_args(n, p, trials)?;
    Ok(run_batch_generic(n, p, trials, seed, SimMethod::Split, |lo, hi| {
        let mut part = Partial::default();
        let mut stack = Vec::new();
        let mut subset = Vec::with_capacity(p);
        for t in lo..hi {
            let mut rng = trial_rng(seed, t);
            let (x, y) = sample_xy_split(&mut rng, n, p, &mut stack, &mut subset);
            part.record(x, y);
        }
        part
    }))
}
