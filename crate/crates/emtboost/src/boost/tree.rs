//! Regression trees grown best-first to a fixed number of terminal nodes.
//!
//! Split search is exhaustive over (feature, threshold) pairs with a
//! weighted least-squares criterion. Thresholds sit at midpoints of
//! adjacent distinct feature values; ties in gain are broken toward the
//! lowest feature index, then the lowest threshold, and across leaves
//! toward the earlier-created leaf. Missing feature values route to the
//! child that received more training weight.

use crate::portfolio::{Matrix, Portfolio};

/// Terminal-node values are clamped to this magnitude; `exp(19)` is about
/// 1.8e8, far beyond any sane premium scale.
pub const ETA_CLAMP: f64 = 19.0;

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        missing_left: bool,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A fitted tree stored as an arena of nodes with the root at index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub(crate) fn from_nodes(nodes: Vec<Node>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Arena index of the leaf the row routes to.
    pub fn route(&self, x: &Matrix, row: usize) -> usize {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { .. } => return idx,
                Node::Split {
                    feature,
                    threshold,
                    missing_left,
                    left,
                    right,
                } => {
                    let v = x.get(row, *feature);
                    let go_left = if v.is_nan() { *missing_left } else { v < *threshold };
                    idx = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn predict_row(&self, x: &Matrix, row: usize) -> f64 {
        match &self.nodes[self.route(x, row)] {
            Node::Leaf { value } => *value,
            Node::Split { .. } => unreachable!("route returns a leaf"),
        }
    }

    fn set_leaf_value(&mut self, idx: usize, v: f64) {
        match &mut self.nodes[idx] {
            Node::Leaf { value } => *value = v,
            Node::Split { .. } => panic!("node {idx} is not a leaf"),
        }
    }

    /// Rewrites the arena in canonical order: splits in breadth-first
    /// visit order, then leaves in breadth-first visit order. This is the
    /// layout the serialized form uses, so trees compare equal across a
    /// save/load round trip.
    fn canonicalize(&mut self) {
        let old = std::mem::take(&mut self.nodes);
        let mut splits = Vec::new();
        let mut leaves = Vec::new();
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(idx) = queue.pop_front() {
            match &old[idx] {
                Node::Split { left, right, .. } => {
                    splits.push(idx);
                    queue.push_back(*left);
                    queue.push_back(*right);
                }
                Node::Leaf { .. } => leaves.push(idx),
            }
        }
        let mut remap = vec![usize::MAX; old.len()];
        for (new_idx, &old_idx) in splits.iter().chain(leaves.iter()).enumerate() {
            remap[old_idx] = new_idx;
        }
        let mut nodes = Vec::with_capacity(old.len());
        for &old_idx in splits.iter().chain(leaves.iter()) {
            nodes.push(match &old[old_idx] {
                Node::Split {
                    feature,
                    threshold,
                    missing_left,
                    left,
                    right,
                } => Node::Split {
                    feature: *feature,
                    threshold: *threshold,
                    missing_left: *missing_left,
                    left: remap[*left],
                    right: remap[*right],
                },
                Node::Leaf { value } => Node::Leaf { value: *value },
            });
        }
        self.nodes = nodes;
    }
}

struct SplitCandidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    missing_left: bool,
}

/// Best admissible split of `rows`, or `None` when the node is pure or no
/// split leaves both children with at least `min_node_obs` observations.
fn best_split(
    x: &Matrix,
    targets: &[f64],
    weights: &[f64],
    rows: &[usize],
    min_node_obs: usize,
) -> Option<SplitCandidate> {
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    for &i in rows {
        t_min = t_min.min(targets[i]);
        t_max = t_max.max(targets[i]);
    }
    if !(t_min < t_max) {
        return None;
    }

    let mut best: Option<SplitCandidate> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    for j in 0..x.n_cols() {
        sorted.clear();
        for &i in rows {
            let v = x.get(i, j);
            if !v.is_nan() {
                sorted.push((v, i));
            }
        }
        if sorted.len() < 2 {
            continue;
        }
        sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut w_total = 0.0;
        let mut wg_total = 0.0;
        for &(_, i) in &sorted {
            w_total += weights[i];
            wg_total += weights[i] * targets[i];
        }

        let mut w_left = 0.0;
        let mut wg_left = 0.0;
        for k in 0..sorted.len() - 1 {
            let i = sorted[k].1;
            w_left += weights[i];
            wg_left += weights[i] * targets[i];
            if sorted[k].0 == sorted[k + 1].0 {
                continue;
            }
            let n_left = k + 1;
            let n_right = sorted.len() - n_left;
            if n_left < min_node_obs || n_right < min_node_obs {
                continue;
            }
            let w_right = w_total - w_left;
            if w_left <= 0.0 || w_right <= 0.0 {
                continue;
            }
            let diff = wg_left / w_left - (wg_total - wg_left) / w_right;
            let gain = w_left * w_right / (w_left + w_right) * diff * diff;
            if gain <= 0.0 {
                continue;
            }
            if best.as_ref().map_or(true, |b| gain > b.gain) {
                let lo = sorted[k].0;
                let hi = sorted[k + 1].0;
                let mid = 0.5 * (lo + hi);
                let threshold = if mid > lo { mid } else { hi };
                best = Some(SplitCandidate {
                    gain,
                    feature: j,
                    threshold,
                    missing_left: w_left >= w_right,
                });
            }
        }
    }
    best
}

struct PendingLeaf {
    node: usize,
    rows: Vec<usize>,
    candidate: Option<SplitCandidate>,
    seq: u64,
}

/// Grows a tree on `targets` with per-observation `weights` until it has
/// `leaves` terminal nodes or no admissible split remains. Leaf values are
/// left as NaN; [`terminal_values`] fills them in.
pub fn fit_tree(
    x: &Matrix,
    targets: &[f64],
    weights: &[f64],
    leaves: usize,
    min_node_obs: usize,
) -> RegressionTree {
    assert_eq!(x.n_rows(), targets.len(), "one target per row");
    assert_eq!(x.n_rows(), weights.len(), "one weight per row");

    let mut tree = RegressionTree {
        nodes: vec![Node::Leaf { value: f64::NAN }],
    };
    let all_rows: Vec<usize> = (0..x.n_rows()).collect();
    let mut pending = vec![PendingLeaf {
        node: 0,
        candidate: best_split(x, targets, weights, &all_rows, min_node_obs),
        rows: all_rows,
        seq: 0,
    }];
    let mut next_seq = 1u64;
    let mut n_leaves = 1;

    while n_leaves < leaves {
        // leaf with the largest gain; ties to the earliest-created leaf
        let mut chosen: Option<usize> = None;
        for (k, leaf) in pending.iter().enumerate() {
            let Some(cand) = &leaf.candidate else { continue };
            let better = match chosen {
                None => true,
                Some(c) => {
                    let cur = pending[c].candidate.as_ref().expect("chosen has candidate");
                    cand.gain > cur.gain || (cand.gain == cur.gain && leaf.seq < pending[c].seq)
                }
            };
            if better {
                chosen = Some(k);
            }
        }
        let Some(k) = chosen else { break };
        let leaf = pending.swap_remove(k);
        let cand = leaf.candidate.expect("chosen leaf has a candidate");

        let mut left_rows = Vec::new();
        let mut right_rows = Vec::new();
        for &i in &leaf.rows {
            let v = x.get(i, cand.feature);
            let go_left = if v.is_nan() { cand.missing_left } else { v < cand.threshold };
            if go_left {
                left_rows.push(i);
            } else {
                right_rows.push(i);
            }
        }

        let left = tree.nodes.len();
        tree.nodes.push(Node::Leaf { value: f64::NAN });
        let right = tree.nodes.len();
        tree.nodes.push(Node::Leaf { value: f64::NAN });
        tree.nodes[leaf.node] = Node::Split {
            feature: cand.feature,
            threshold: cand.threshold,
            missing_left: cand.missing_left,
            left,
            right,
        };
        n_leaves += 1;

        for (node, rows) in [(left, left_rows), (right, right_rows)] {
            let candidate = best_split(x, targets, weights, &rows, min_node_obs);
            pending.push(PendingLeaf {
                node,
                rows,
                candidate,
                seq: next_seq,
            });
            next_seq += 1;
        }
    }
    tree.canonicalize();
    tree
}

/// Fills in the optimal terminal-node values for the Tweedie objective.
///
/// For region `R`: `eta = log(sum delta*omega*y*exp((1-rho)F) /
/// sum delta*omega*exp((2-rho)F))`, clamped to `[-19, 19]`; an all-zero
/// region (numerator 0) gets -19.
pub fn terminal_values(
    tree: &mut RegressionTree,
    portfolio: &Portfolio,
    f_prev: &[f64],
    rho: f64,
    delta1: &[f64],
) {
    assert_eq!(f_prev.len(), portfolio.len(), "one F value per observation");
    assert_eq!(delta1.len(), portfolio.len(), "one weight per observation");

    let mut num = vec![0.0; tree.nodes.len()];
    let mut den = vec![0.0; tree.nodes.len()];
    for i in 0..portfolio.len() {
        let leaf = tree.route(portfolio.x(), i);
        let dw = delta1[i] * portfolio.omega()[i];
        num[leaf] += dw * portfolio.y()[i] * ((1.0 - rho) * f_prev[i]).exp();
        den[leaf] += dw * ((2.0 - rho) * f_prev[i]).exp();
    }
    for idx in 0..tree.nodes.len() {
        if matches!(tree.nodes[idx], Node::Leaf { .. }) {
            let value = if num[idx] <= 0.0 {
                -ETA_CLAMP
            } else {
                (num[idx] / den[idx]).ln().clamp(-ETA_CLAMP, ETA_CLAMP)
            };
            tree.set_leaf_value(idx, value);
        }
    }
}

/// Total weighted squared error of the fitted leaf means; used by the
/// split-search tests.
#[cfg(test)]
pub(crate) fn tree_weighted_sse(
    tree: &RegressionTree,
    x: &Matrix,
    targets: &[f64],
    weights: &[f64],
) -> f64 {
    use crate::num::pairwise_sum;

    let mut w_sum = vec![0.0; tree.nodes.len()];
    let mut wg_sum = vec![0.0; tree.nodes.len()];
    for i in 0..x.n_rows() {
        let leaf = tree.route(x, i);
        w_sum[leaf] += weights[i];
        wg_sum[leaf] += weights[i] * targets[i];
    }
    let mut terms = Vec::with_capacity(x.n_rows());
    for i in 0..x.n_rows() {
        let leaf = tree.route(x, i);
        if w_sum[leaf] > 0.0 {
            let mean = wg_sum[leaf] / w_sum[leaf];
            terms.push(weights[i] * (targets[i] - mean) * (targets[i] - mean));
        }
    }
    pairwise_sum(&terms)
}
