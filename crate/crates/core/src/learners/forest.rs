//! Bootstrap-aggregated CART trees with per-node feature subsampling.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub max_features: usize,
}

impl ForestParams {
    fn check(&self) -> Result<(), LearnError> {
        if self.max_depth == 0 {
            return Err(LearnError::BadDepth(self.max_depth));
        }
        if self.max_features == 0 {
            return Err(LearnError::BadMaxFeatures(self.max_features));
        }
        if self.n_trees == 0 {
            return Err(LearnError::BadTreeCount);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Class distribution (classification) or a single mean (regression).
    Leaf { value: Vec<f64> },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Number of features examined when choosing this split.
        candidates: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    fn leaf(&self, row: ArrayView1<f64>) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForestTask {
    Classification { n_classes: usize },
    Regression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub params: ForestParams,
    pub task: ForestTask,
    pub n_features: usize,
    pub seed: u64,
    pub trees: Vec<Tree>,
}

struct Builder<'a> {
    x: ArrayView2<'a, f64>,
    task: ForestTask,
    /// Class index or regression target per row.
    target: Vec<f64>,
    max_depth: usize,
    max_features: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn leaf_value(&self, rows: &[(usize, f64)]) -> Vec<f64> {
        let total: f64 = rows.iter().map(|r| r.1).sum();
        match self.task {
            ForestTask::Classification { n_classes } => {
                let mut dist = vec![0.0; n_classes];
                for &(i, w) in rows {
                    dist[self.target[i] as usize] += w;
                }
                dist.iter_mut().for_each(|d| *d /= total);
                dist
            }
            ForestTask::Regression => {
                vec![rows.iter().map(|&(i, w)| w * self.target[i]).sum::<f64>() / total]
            }
        }
    }

    /// Weighted impurity times total weight: Gini·W or SSE.
    fn impurity(&self, stats: &Stats) -> f64 {
        match stats {
            Stats::Classes { counts, total } => {
                if *total <= 0.0 {
                    return 0.0;
                }
                total - counts.iter().map(|c| c * c).sum::<f64>() / total
            }
            Stats::Moments { total, sum, sum_sq } => {
                if *total <= 0.0 {
                    return 0.0;
                }
                (sum_sq - sum * sum / total).max(0.0)
            }
        }
    }

    fn empty_stats(&self) -> Stats {
        match self.task {
            ForestTask::Classification { n_classes } => Stats::Classes {
                counts: vec![0.0; n_classes],
                total: 0.0,
            },
            ForestTask::Regression => Stats::Moments {
                total: 0.0,
                sum: 0.0,
                sum_sq: 0.0,
            },
        }
    }

    fn build(&mut self, rows: Vec<(usize, f64)>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: self.leaf_value(&rows),
        });
        if depth >= self.max_depth || rows.len() < 2 {
            return id;
        }
        let mut parent = self.empty_stats();
        for &(i, w) in &rows {
            parent.add(self.target[i], w);
        }
        let parent_impurity = self.impurity(&parent);
        if parent_impurity <= 1e-12 * parent.total().max(1.0) {
            return id;
        }

        let p = self.x.ncols();
        let k = self.max_features.min(p);
        let candidates = sample(rng, p, k).into_vec();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = rows.clone();
        for &f in &candidates {
            order.sort_by(|a, b| self.x[[a.0, f]].total_cmp(&self.x[[b.0, f]]));
            let mut left = self.empty_stats();
            let mut right = parent.clone();
            for s in 0..order.len() - 1 {
                let (i, w) = order[s];
                left.add(self.target[i], w);
                right.add(self.target[i], -w);
                let here = self.x[[i, f]];
                let next = self.x[[order[s + 1].0, f]];
                if here == next {
                    continue;
                }
                let child = self.impurity(&left) + self.impurity(&right);
                let gain = parent_impurity - child;
                if gain > 1e-12 && best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, f, here + (next - here) / 2.0));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return id;
        };
        let (l, r): (Vec<_>, Vec<_>) = rows.into_iter().partition(|&(i, _)| self.x[[i, feature]] <= threshold);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
            candidates: candidates.len(),
        };
        id
    }
}

#[derive(Clone)]
enum Stats {
    Classes { counts: Vec<f64>, total: f64 },
    Moments { total: f64, sum: f64, sum_sq: f64 },
}

impl Stats {
    fn add(&mut self, target: f64, w: f64) {
        match self {
            Stats::Classes { counts, total } => {
                counts[target as usize] += w;
                *total += w;
            }
            Stats::Moments { total, sum, sum_sq } => {
                *total += w;
                *sum += w * target;
                *sum_sq += w * target * target;
            }
        }
    }

    fn total(&self) -> f64 {
        match self {
            Stats::Classes { total, .. } | Stats::Moments { total, .. } => *total,
        }
    }
}

/// Fits a forest. `target` holds class indices (as `f64`) for
/// classification or real values for regression; `sample_weight` carries
/// class weights and multiplies the bootstrap counts.
pub fn fit_random_forest(
    x: ArrayView2<f64>,
    target: &[f64],
    task: ForestTask,
    params: ForestParams,
    seed: u64,
    sample_weight: &[f64],
) -> Result<RandomForestModel, LearnError> {
    params.check()?;
    let n = x.nrows();
    if n == 0 {
        return Err(LearnError::NoRows);
    }
    if target.len() != n || sample_weight.len() != n {
        return Err(LearnError::ShapeMismatch {
            expected: n,
            got: target.len().min(sample_weight.len()),
        });
    }
    if x.iter().chain(target).any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite);
    }
    if let ForestTask::Classification { n_classes } = task {
        if target.iter().any(|&t| t < 0.0 || t as usize >= n_classes || t.fract() != 0.0) {
            return Err(LearnError::ShapeMismatch {
                expected: n_classes,
                got: target.iter().map(|&t| t as usize + 1).max().unwrap_or(0),
            });
        }
    }
    let trees = (0..params.n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[t as u64]));
            let mut counts = vec![0u32; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1;
            }
            let rows: Vec<(usize, f64)> = counts
                .iter()
                .enumerate()
                .filter(|(i, &c)| c > 0 && sample_weight[*i] > 0.0)
                .map(|(i, &c)| (i, c as f64 * sample_weight[i]))
                .collect();
            let mut b = Builder {
                x,
                task,
                target: target.to_vec(),
                max_depth: params.max_depth,
                max_features: params.max_features,
                nodes: Vec::new(),
            };
            if rows.is_empty() {
                // every drawn row had zero weight: fall back to all rows
                let all = (0..n).map(|i| (i, 1.0)).collect();
                b.build(all, 0, &mut rng);
            } else {
                b.build(rows, 0, &mut rng);
            }
            Tree { nodes: b.nodes }
        })
        .collect();
    Ok(RandomForestModel {
        params,
        task,
        n_features: x.ncols(),
        seed,
        trees,
    })
}

impl RandomForestModel {
    fn check_shape(&self, x: ArrayView2<f64>) -> Result<(), LearnError> {
        if x.ncols() != self.n_features {
            return Err(LearnError::ShapeMismatch {
                expected: self.n_features,
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// Tree-averaged class distributions.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, LearnError> {
        self.check_shape(x)?;
        let ForestTask::Classification { n_classes } = self.task else {
            return Err(LearnError::WrongTask);
        };
        let mut out = Array2::zeros((x.nrows(), n_classes));
        for (i, row) in x.rows().into_iter().enumerate() {
            for tree in &self.trees {
                for (k, v) in tree.leaf(row).iter().enumerate() {
                    out[[i, k]] += v;
                }
            }
        }
        out.mapv_inplace(|v| v / self.trees.len() as f64);
        Ok(out)
    }

    pub fn predict_values(&self, x: ArrayView2<f64>) -> Result<Vec<f64>, LearnError> {
        self.check_shape(x)?;
        if self.task != ForestTask::Regression {
            return Err(LearnError::WrongTask);
        }
        Ok(x.rows()
            .into_iter()
            .map(|row| self.trees.iter().map(|t| t.leaf(row)[0]).sum::<f64>() / self.trees.len() as f64)
            .collect())
    }
}
