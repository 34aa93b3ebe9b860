//! Histogram CART regression trees, random forests and gradient boosting.

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encoding::{Features, N_FEATURES};

/// Features pre-sorted into at most `max_bins` ordinal bins.
///
/// Bin `b` of feature `f` holds values in `(edges[f][b-1], edges[f][b]]`, so
/// "bin ≤ b" is the same test as "value ≤ edges[f][b]".
pub struct Binned {
    pub rows: Vec<Features>,
    cols: Vec<Vec<u8>>,
    edges: Vec<Vec<f64>>,
}

impl Binned {
    pub fn new(rows: Vec<Features>, max_bins: usize) -> Self {
        let max_bins = max_bins.clamp(2, 256);
        let mut cols = Vec::with_capacity(N_FEATURES);
        let mut edges = Vec::with_capacity(N_FEATURES);
        for f in 0..N_FEATURES {
            let mut v: Vec<f64> = rows.iter().map(|r| r[f]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            let e: Vec<f64> = if v.len() <= max_bins {
                v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
            } else {
                let mut e: Vec<f64> = (1..max_bins)
                    .map(|q| {
                        let i = q * (v.len() - 1) / max_bins;
                        0.5 * (v[i] + v[i + 1])
                    })
                    .collect();
                e.dedup();
                e
            };
            cols.push(rows.iter().map(|r| e.partition_point(|&x| x < r[f]) as u8).collect());
            edges.push(e);
        }
        Binned { rows, cols, edges }
    }

    fn n_bins(&self, f: usize) -> usize {
        self.edges[f].len() + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features tried per split.
    pub max_features: usize,
}

const LEAF: u16 = u16::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct Node {
    threshold: f64,
    value: f64,
    left: u32,
    right: u32,
    feature: u16,
}

/// A regression tree; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut n = &self.nodes[0];
        loop {
            if n.feature == LEAF {
                return n.value;
            }
            let next = if x[n.feature as usize] <= n.threshold { n.left } else { n.right };
            n = &self.nodes[next as usize];
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, n: usize) -> usize {
            let node = &t.nodes[n];
            if node.feature == LEAF {
                0
            } else {
                1 + go(t, node.left as usize).max(go(t, node.right as usize))
            }
        }
        go(self, 0)
    }

    fn push(&mut self, value: f64) -> usize {
        self.nodes.push(Node {
            threshold: 0.0,
            value,
            left: 0,
            right: 0,
            feature: LEAF,
        });
        self.nodes.len() - 1
    }

    /// Grows a tree on `idx` (indices into `b`, repeats allowed) fitting `y`
    /// (indexed like `b`). Leaf values are the mean times `scale`.
    pub fn fit(b: &Binned, y: &[f64], idx: &mut [u32], p: &TreeParams, scale: f64, rng: &mut ChaCha8Rng) -> Tree {
        let mut t = Tree { nodes: Vec::new() };
        let mut hist_n = [0u32; 256];
        let mut hist_s = [0.0f64; 256];
        t.grow(b, y, idx, p, scale, 0, rng, &mut hist_n, &mut hist_s);
        t
    }

    #[allow(clippy::too_many_arguments)]
    fn grow(
        &mut self,
        b: &Binned,
        y: &[f64],
        idx: &mut [u32],
        p: &TreeParams,
        scale: f64,
        depth: usize,
        rng: &mut ChaCha8Rng,
        hist_n: &mut [u32; 256],
        hist_s: &mut [f64; 256],
    ) -> usize {
        let n = idx.len();
        let sum: f64 = idx.iter().map(|&i| y[i as usize]).sum();
        let node = self.push(if n > 0 { scale * sum / n as f64 } else { 0.0 });
        let min_leaf = p.min_samples_leaf.max(1);
        if depth >= p.max_depth || n < 2 * min_leaf {
            return node;
        }
        let parent = sum * sum / n as f64;
        let mf = p.max_features.clamp(1, N_FEATURES);
        let feats = sample(rng, N_FEATURES, mf).into_vec();
        let mut best: Option<(f64, usize, usize)> = None;
        for &f in &feats {
            let nb = b.n_bins(f);
            if nb < 2 {
                continue;
            }
            hist_n[..nb].fill(0);
            hist_s[..nb].fill(0.0);
            let col = &b.cols[f];
            for &i in idx.iter() {
                let k = col[i as usize] as usize;
                hist_n[k] += 1;
                hist_s[k] += y[i as usize];
            }
            let (mut nl, mut sl) = (0usize, 0.0);
            for k in 0..nb - 1 {
                nl += hist_n[k] as usize;
                sl += hist_s[k];
                let nr = n - nl;
                if nl < min_leaf {
                    continue;
                }
                if nr < min_leaf {
                    break;
                }
                let sr = sum - sl;
                let gain = sl * sl / nl as f64 + sr * sr / nr as f64 - parent;
                if gain > 1e-12 * parent.abs().max(1e-300) && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, k));
                }
            }
        }
        let Some((_, f, k)) = best else {
            return node;
        };
        let col = &b.cols[f];
        let mut mid = 0;
        for j in 0..n {
            if col[idx[j] as usize] as usize <= k {
                idx.swap(j, mid);
                mid += 1;
            }
        }
        let (l, r) = idx.split_at_mut(mid);
        let left = self.grow(b, y, l, p, scale, depth + 1, rng, hist_n, hist_s);
        let right = self.grow(b, y, r, p, scale, depth + 1, rng, hist_n, hist_s);
        let n = &mut self.nodes[node];
        n.feature = f as u16;
        n.threshold = b.edges[f][k];
        n.left = left as u32;
        n.right = right as u32;
        node
    }
}

fn tree_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Fraction of features tried per split.
    pub max_features: f64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 200,
            max_depth: 14,
            min_samples_leaf: 3,
            max_features: 0.5,
        }
    }
}

/// Bootstrap-aggregated trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
}

impl RandomForest {
    pub fn fit(b: &Binned, y: &[f64], rows: &[u32], cfg: &ForestConfig, seed: u64) -> Self {
        let params = TreeParams {
            max_depth: cfg.max_depth,
            min_samples_leaf: cfg.min_samples_leaf,
            max_features: ((cfg.max_features * N_FEATURES as f64).round() as usize).max(1),
        };
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = tree_rng(seed, t as u64);
                let mut idx: Vec<u32> = (0..rows.len()).map(|_| rows[rng.random_range(0..rows.len())]).collect();
                Tree::fit(b, y, &mut idx, &params, 1.0, &mut rng)
            })
            .collect();
        RandomForest { trees }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostingConfig {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    /// Row fraction drawn without replacement each round.
    pub subsample: f64,
}

impl Default for BoostingConfig {
    fn default() -> Self {
        BoostingConfig {
            n_rounds: 300,
            max_depth: 6,
            learning_rate: 0.05,
            min_samples_leaf: 5,
            subsample: 0.8,
        }
    }
}

/// Squared-loss gradient boosting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub base: f64,
    pub trees: Vec<Tree>,
}

impl GradientBoosting {
    pub fn fit(b: &Binned, y: &[f64], rows: &[u32], cfg: &BoostingConfig, seed: u64) -> Self {
        let base = if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(|&i| y[i as usize]).sum::<f64>() / rows.len() as f64
        };
        let params = TreeParams {
            max_depth: cfg.max_depth,
            min_samples_leaf: cfg.min_samples_leaf,
            max_features: N_FEATURES,
        };
        let mut resid = vec![0.0; y.len()];
        for &i in rows {
            resid[i as usize] = y[i as usize] - base;
        }
        let take = ((cfg.subsample.clamp(0.0, 1.0) * rows.len() as f64).round() as usize).clamp(1.min(rows.len()), rows.len());
        let mut rng = tree_rng(seed, u64::MAX);
        let mut trees = Vec::with_capacity(cfg.n_rounds);
        for _ in 0..cfg.n_rounds {
            let mut idx: Vec<u32> = if take == rows.len() {
                rows.to_vec()
            } else {
                sample(&mut rng, rows.len(), take).into_iter().map(|k| rows[k]).collect()
            };
            let t = Tree::fit(b, &resid, &mut idx, &params, cfg.learning_rate, &mut rng);
            for &i in rows {
                resid[i as usize] -= t.predict(&b.rows[i as usize]);
            }
            trees.push(t);
        }
        GradientBoosting { base, trees }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.base + self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}
