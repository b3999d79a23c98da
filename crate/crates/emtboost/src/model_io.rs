//! JSON persistence for ensembles and fitted models.
//!
//! The ensemble file carries `{f0, shrinkage, rho, num_features, trees}`
//! where each tree is `{splits, leaves}`: `splits` holds the internal
//! nodes and `leaves` the terminal values indexed by region id. Child
//! references are signed: a nonnegative value indexes `splits`, a negative
//! value `-(id+1)` indexes `leaves`. The model file extends the ensemble
//! with `{phi, q, penalty_kind, penalty_r, trace, converged,
//! phi_at_boundary}`.
//!
//! Numbers are written in the shortest decimal form that parses back to
//! the same double, so a round trip is value-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boost::{BoostedEnsemble, Node, RegressionTree};
use crate::em::{PenaltyKind, ZifModel};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SplitRecord {
    feature: usize,
    threshold: f64,
    missing_left: bool,
    left: i64,
    right: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TreeRecord {
    splits: Vec<SplitRecord>,
    leaves: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct EnsembleRecord {
    f0: f64,
    shrinkage: f64,
    rho: f64,
    num_features: usize,
    trees: Vec<TreeRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ModelRecord {
    #[serde(flatten)]
    ensemble: EnsembleRecord,
    phi: f64,
    q: f64,
    penalty_kind: String,
    penalty_r: f64,
    trace: Vec<f64>,
    converged: bool,
    phi_at_boundary: bool,
}

fn tree_to_record(tree: &RegressionTree) -> TreeRecord {
    // arena indices -> (split index | leaf id)
    let nodes = tree.nodes();
    let mut split_index = vec![usize::MAX; nodes.len()];
    let mut leaf_index = vec![usize::MAX; nodes.len()];
    let mut splits = Vec::new();
    let mut leaves = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        match node {
            Node::Split { .. } => {
                split_index[i] = splits.len();
                splits.push(SplitRecord {
                    feature: 0,
                    threshold: 0.0,
                    missing_left: false,
                    left: 0,
                    right: 0,
                });
            }
            Node::Leaf { value } => {
                leaf_index[i] = leaves.len();
                leaves.push(*value);
            }
        }
    }
    let encode = |child: usize| -> i64 {
        if split_index[child] != usize::MAX {
            split_index[child] as i64
        } else {
            -(leaf_index[child] as i64) - 1
        }
    };
    for (i, node) in nodes.iter().enumerate() {
        if let Node::Split {
            feature,
            threshold,
            missing_left,
            left,
            right,
        } = node
        {
            splits[split_index[i]] = SplitRecord {
                feature: *feature,
                threshold: *threshold,
                missing_left: *missing_left,
                left: encode(*left),
                right: encode(*right),
            };
        }
    }
    TreeRecord { splits, leaves }
}

fn tree_from_record(record: &TreeRecord) -> Result<RegressionTree> {
    let n_splits = record.splits.len();
    let n_leaves = record.leaves.len();
    if n_leaves == 0 {
        return Err(Error::Data("tree record has no leaves".into()));
    }
    // arena: splits first, then leaves
    let decode = |child: i64| -> Result<usize> {
        if child >= 0 {
            let idx = child as usize;
            if idx >= n_splits {
                return Err(Error::Data(format!("split child {child} out of range")));
            }
            Ok(idx)
        } else {
            let idx = (-child - 1) as usize;
            if idx >= n_leaves {
                return Err(Error::Data(format!("leaf child {child} out of range")));
            }
            Ok(n_splits + idx)
        }
    };
    let mut nodes = Vec::with_capacity(n_splits + n_leaves);
    for split in &record.splits {
        nodes.push(Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            missing_left: split.missing_left,
            left: decode(split.left)?,
            right: decode(split.right)?,
        });
    }
    for &value in &record.leaves {
        nodes.push(Node::Leaf { value });
    }
    Ok(RegressionTree::from_nodes(nodes))
}

fn ensemble_to_record(ensemble: &BoostedEnsemble) -> EnsembleRecord {
    EnsembleRecord {
        f0: ensemble.f0,
        shrinkage: ensemble.shrinkage,
        rho: ensemble.rho,
        num_features: ensemble.num_features,
        trees: ensemble.trees.iter().map(tree_to_record).collect(),
    }
}

fn ensemble_from_record(record: &EnsembleRecord) -> Result<BoostedEnsemble> {
    Ok(BoostedEnsemble {
        f0: record.f0,
        shrinkage: record.shrinkage,
        rho: record.rho,
        num_features: record.num_features,
        trees: record
            .trees
            .iter()
            .map(tree_from_record)
            .collect::<Result<_>>()?,
    })
}

fn penalty_to_str(kind: PenaltyKind) -> &'static str {
    match kind {
        PenaltyKind::None => "none",
        PenaltyKind::ShrinkToZero => "shrink_to_zero",
        PenaltyKind::SoftThreshold => "soft_threshold",
    }
}

fn penalty_from_str(s: &str) -> Result<PenaltyKind> {
    match s {
        "none" => Ok(PenaltyKind::None),
        "shrink_to_zero" => Ok(PenaltyKind::ShrinkToZero),
        "soft_threshold" => Ok(PenaltyKind::SoftThreshold),
        other => Err(Error::Data(format!("unknown penalty kind {other:?}"))),
    }
}

pub fn ensemble_to_json(ensemble: &BoostedEnsemble) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ensemble_to_record(ensemble))?)
}

pub fn ensemble_from_json(json: &str) -> Result<BoostedEnsemble> {
    ensemble_from_record(&serde_json::from_str(json)?)
}

pub fn model_to_json(model: &ZifModel) -> Result<String> {
    let record = ModelRecord {
        ensemble: ensemble_to_record(&model.ensemble),
        phi: model.phi,
        q: model.q,
        penalty_kind: penalty_to_str(model.penalty_kind).to_string(),
        penalty_r: model.penalty_r,
        trace: model.fit_trace.clone(),
        converged: model.converged,
        phi_at_boundary: model.phi_at_boundary,
    };
    Ok(serde_json::to_string_pretty(&record)?)
}

pub fn model_from_json(json: &str) -> Result<ZifModel> {
    let record: ModelRecord = serde_json::from_str(json)?;
    Ok(ZifModel {
        ensemble: ensemble_from_record(&record.ensemble)?,
        phi: record.phi,
        q: record.q,
        rho: record.ensemble.rho,
        penalty_kind: penalty_from_str(&record.penalty_kind)?,
        penalty_r: record.penalty_r,
        fit_trace: record.trace,
        converged: record.converged,
        phi_at_boundary: record.phi_at_boundary,
    })
}

pub fn save_model<P: AsRef<Path>>(model: &ZifModel, path: P) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model<P: AsRef<Path>>(path: P) -> Result<ZifModel> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Data(format!("{}: {e}", path.as_ref().display())))?;
    model_from_json(&text)
}
