//! CART regression trees grown by greedy variance reduction.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    /// `None` grows until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_split_improvement: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            min_split_improvement: 0.0,
        }
    }
}

/// A tree node; serializes as `{feature, threshold, left, right}` or
/// `{leaf_value}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        leaf_value: f64,
    },
}

impl Node {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { leaf_value } => return *leaf_value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Largest feature index referenced by any split.
    pub(crate) fn max_feature(&self) -> Option<usize> {
        match self {
            Node::Leaf { .. } => None,
            Node::Split { feature, left, right, .. } => {
                Some((*feature).max(left.max_feature().unwrap_or(0)).max(right.max_feature().unwrap_or(0)))
            }
        }
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    improvement: f64,
}

/// Grows trees over a fixed training set. `features_per_split < n_features`
/// draws a fresh feature subset at every node from `rng`.
pub(crate) struct TreeBuilder<'a> {
    pub rows: &'a [Vec<f64>],
    pub y: &'a [f64],
    pub params: &'a TreeParams,
    pub n_features: usize,
    pub features_per_split: usize,
}

impl TreeBuilder<'_> {
    pub fn grow(&self, samples: &mut [usize], rng: &mut ChaCha8Rng) -> Node {
        let mut scratch = Vec::with_capacity(samples.len());
        self.grow_node(samples, 0, rng, &mut scratch)
    }

    fn grow_node(&self, samples: &mut [usize], depth: usize, rng: &mut ChaCha8Rng, scratch: &mut Vec<(f64, f64)>) -> Node {
        let n = samples.len();
        let mean = samples.iter().map(|&i| self.y[i]).sum::<f64>() / n as f64;
        let leaf = Node::Leaf { leaf_value: mean };
        let min_leaf = self.params.min_samples_leaf.max(1);
        if self.params.max_depth.is_some_and(|d| depth >= d) || n < 2 * min_leaf || self.features_per_split == 0 {
            return leaf;
        }
        let sse: f64 = samples.iter().map(|&i| (self.y[i] - mean).powi(2)).sum();
        if sse <= 0.0 {
            return leaf;
        }
        let Some(best) = self.best_split(samples, mean, sse, rng, scratch) else {
            return leaf;
        };
        let (rows, f, t) = (self.rows, best.feature, best.threshold);
        let mut split = 0;
        for k in 0..n {
            if rows[samples[k]][f] <= t {
                samples.swap(k, split);
                split += 1;
            }
        }
        let (l, r) = samples.split_at_mut(split);
        Node::Split {
            feature: f,
            threshold: t,
            left: Box::new(self.grow_node(l, depth + 1, rng, scratch)),
            right: Box::new(self.grow_node(r, depth + 1, rng, scratch)),
        }
    }

    fn candidate_features(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        if self.features_per_split >= self.n_features {
            (0..self.n_features).collect()
        } else {
            let mut f = index::sample(rng, self.n_features, self.features_per_split).into_vec();
            f.sort_unstable();
            f
        }
    }

    fn best_split(
        &self,
        samples: &[usize],
        mean: f64,
        sse: f64,
        rng: &mut ChaCha8Rng,
        scratch: &mut Vec<(f64, f64)>,
    ) -> Option<BestSplit> {
        let n = samples.len();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<BestSplit> = None;
        for f in self.candidate_features(rng) {
            scratch.clear();
            scratch.extend(samples.iter().map(|&i| (self.rows[i][f], self.y[i] - mean)));
            scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            if scratch[0].0 == scratch[n - 1].0 {
                continue;
            }
            let total: f64 = scratch.iter().map(|p| p.1).sum();
            let (mut s_left, mut q_left) = (0.0, 0.0);
            for k in 0..n - 1 {
                let (x, r) = scratch[k];
                s_left += r;
                q_left += r * r;
                let n_left = k + 1;
                if scratch[k + 1].0 == x || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let s_right = total - s_left;
                let q_right = sse - q_left;
                let child = (q_left - s_left * s_left / n_left as f64) + (q_right - s_right * s_right / (n - n_left) as f64);
                let improvement = (sse - child) / n as f64;
                if improvement > 0.0
                    && improvement >= self.params.min_split_improvement
                    && best.as_ref().is_none_or(|b| improvement > b.improvement)
                {
                    let next = scratch[k + 1].0;
                    let mut threshold = 0.5 * (x + next);
                    if threshold >= next {
                        threshold = x;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        improvement,
                    });
                }
            }
        }
        best
    }
}
