//! Gradient tree boosting for the Tweedie log-likelihood, weighted by the
//! posterior probabilities of the Tweedie mixture component.
//!
//! Each round fits an L-terminal-node regression tree to the negative
//! gradient of the weighted objective, replaces the leaf values by the
//! per-region argmax of that objective, and takes a shrunken step. With all
//! posterior weights equal to one this is plain Tweedie boosting (TDboost);
//! the weighted form is the mean-update block of the EM fitter.

mod tree;

pub use tree::{fit_tree, terminal_values, Node, RegressionTree, ETA_CLAMP};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::pairwise_sum;
use crate::portfolio::{Matrix, Portfolio};

/// Guard against runaway configurations: `num_trees * leaves` may not
/// exceed this.
pub const MAX_TREE_CELLS: usize = 10_000_000;

/// Boosting hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    /// Ensemble size M (0 fits the intercept only).
    pub num_trees: usize,
    /// Terminal nodes per tree.
    pub leaves: usize,
    /// Shrinkage factor applied to every update step.
    pub shrinkage: f64,
    /// Minimum observations in each child of a split.
    pub min_node_obs: usize,
    /// Folds used by [`cross_validate`].
    pub cv_folds: usize,
    /// Seed for fold assignment (boosting itself is deterministic).
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            num_trees: 1000,
            leaves: 6,
            shrinkage: 0.001,
            min_node_obs: 10,
            cv_folds: 5,
            seed: 42,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.leaves < 2 {
            return Err(Error::Config(format!(
                "leaves must be at least 2, got {}",
                self.leaves
            )));
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(Error::Config(format!(
                "shrinkage must lie in (0, 1], got {}",
                self.shrinkage
            )));
        }
        if self.min_node_obs == 0 {
            return Err(Error::Config("min_node_obs must be positive".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config(format!(
                "cv_folds must be at least 2, got {}",
                self.cv_folds
            )));
        }
        if self.num_trees.saturating_mul(self.leaves) > MAX_TREE_CELLS {
            return Err(Error::Config(format!(
                "num_trees * leaves = {} exceeds the budget of {MAX_TREE_CELLS}",
                self.num_trees * self.leaves
            )));
        }
        Ok(())
    }
}

/// An intercept plus shrunken regression trees; prediction is
/// `f0 + shrinkage * sum of leaf values`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoostedEnsemble {
    pub f0: f64,
    pub shrinkage: f64,
    pub rho: f64,
    pub num_features: usize,
    pub trees: Vec<RegressionTree>,
}

impl BoostedEnsemble {
    pub fn predict_row(&self, x: &Matrix, row: usize) -> f64 {
        let mut f = self.f0;
        for tree in &self.trees {
            f += self.shrinkage * tree.predict_row(x, row);
        }
        f
    }

    /// Per-row log-mean predictions.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.num_features {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} features, data has {}",
                self.num_features,
                x.n_cols()
            )));
        }
        Ok((0..x.n_rows()).map(|i| self.predict_row(x, i)).collect())
    }
}

/// The per-observation Tweedie log-likelihood kernel (dispersion factored
/// out): `omega * (y e^{(1-rho)f}/(1-rho) - e^{(2-rho)f}/(2-rho))`.
#[inline]
pub fn psi(y: f64, f: f64, omega: f64, rho: f64) -> f64 {
    omega * (y * ((1.0 - rho) * f).exp() / (1.0 - rho) - ((2.0 - rho) * f).exp() / (2.0 - rho))
}

/// Posterior-weighted objective `sum_i delta1_i * psi_i`; the quantity the
/// boosting loop drives uphill.
pub fn weighted_psi_sum(portfolio: &Portfolio, f: &[f64], rho: f64, delta1: &[f64]) -> f64 {
    assert_eq!(f.len(), portfolio.len(), "one F value per observation");
    let terms: Vec<f64> = (0..portfolio.len())
        .map(|i| delta1[i] * psi(portfolio.y()[i], f[i], portfolio.omega()[i], rho))
        .collect();
    pairwise_sum(&terms)
}

/// Negative gradient of the weighted objective with respect to F:
/// `g_i = delta1_i * omega_i * (-y_i e^{(1-rho)F_i} + e^{(2-rho)F_i})`.
pub fn negative_gradient(portfolio: &Portfolio, f: &[f64], rho: f64, delta1: &[f64]) -> Vec<f64> {
    assert_eq!(f.len(), portfolio.len(), "one F value per observation");
    assert_eq!(delta1.len(), portfolio.len(), "one weight per observation");
    (0..portfolio.len())
        .map(|i| {
            let fi = f[i];
            delta1[i]
                * portfolio.omega()[i]
                * (-portfolio.y()[i] * ((1.0 - rho) * fi).exp() + ((2.0 - rho) * fi).exp())
        })
        .collect()
}

/// Weighted intercept: argmax over constant F of the weighted objective,
/// `log(sum delta*omega*y / sum delta*omega)`, clamped like a leaf value.
fn weighted_intercept(portfolio: &Portfolio, delta1: &[f64]) -> f64 {
    let num: Vec<f64> = (0..portfolio.len())
        .map(|i| delta1[i] * portfolio.omega()[i] * portfolio.y()[i])
        .collect();
    let den: Vec<f64> = (0..portfolio.len())
        .map(|i| delta1[i] * portfolio.omega()[i])
        .collect();
    let num = pairwise_sum(&num);
    let den = pairwise_sum(&den);
    if num <= 0.0 || den <= 0.0 {
        -ETA_CLAMP
    } else {
        (num / den).ln().clamp(-ETA_CLAMP, ETA_CLAMP)
    }
}

/// Fits an ensemble by `config.num_trees` rounds of gradient boosting.
///
/// `delta1` holds the per-observation posterior weights; pass all ones for
/// the plain (unweighted) Tweedie boosting model.
pub fn boost(
    portfolio: &Portfolio,
    rho: f64,
    delta1: &[f64],
    config: &FitConfig,
) -> Result<BoostedEnsemble> {
    let (ensemble, _) = boost_with_monitor(portfolio, rho, delta1, config, None)?;
    Ok(ensemble)
}

/// Boosting loop that optionally scores a held-out set after every round.
///
/// Returns the ensemble and, when a monitor set is given, the held-out loss
/// `-sum delta*psi` for ensemble sizes `0..=num_trees`.
pub(crate) fn boost_with_monitor(
    portfolio: &Portfolio,
    rho: f64,
    delta1: &[f64],
    config: &FitConfig,
    monitor: Option<(&Portfolio, &[f64])>,
) -> Result<(BoostedEnsemble, Vec<f64>)> {
    config.validate()?;
    crate::tweedie::check_rho(rho)?;
    assert_eq!(delta1.len(), portfolio.len(), "one weight per observation");
    if portfolio.is_empty() {
        return Err(Error::Data("cannot fit an empty portfolio".into()));
    }

    let f0 = weighted_intercept(portfolio, delta1);
    let mut ensemble = BoostedEnsemble {
        f0,
        shrinkage: config.shrinkage,
        rho,
        num_features: portfolio.n_features(),
        trees: Vec::with_capacity(config.num_trees),
    };
    let mut f = vec![f0; portfolio.len()];

    let mut held_f;
    let mut losses = Vec::new();
    let mut held = match monitor {
        Some((hp, hd)) => {
            assert_eq!(hd.len(), hp.len(), "one weight per held-out observation");
            held_f = vec![f0; hp.len()];
            losses.push(-weighted_psi_sum(hp, &held_f, rho, hd));
            Some((hp, hd))
        }
        None => {
            held_f = Vec::new();
            None
        }
    };

    for _ in 0..config.num_trees {
        grow_round(portfolio, rho, delta1, config, &mut ensemble, &mut f);
        if let Some((hp, hd)) = held.take() {
            let tree = ensemble.trees.last().expect("round appended a tree");
            for (i, fh) in held_f.iter_mut().enumerate() {
                *fh += config.shrinkage * tree.predict_row(hp.x(), i);
            }
            losses.push(-weighted_psi_sum(hp, &held_f, rho, hd));
            held = Some((hp, hd));
        }
    }
    Ok((ensemble, losses))
}

/// One boosting round: gradient, tree, terminal values, shrunken update.
fn grow_round(
    portfolio: &Portfolio,
    rho: f64,
    delta1: &[f64],
    config: &FitConfig,
    ensemble: &mut BoostedEnsemble,
    f: &mut [f64],
) {
    let gradient = negative_gradient(portfolio, f, rho, delta1);
    let mut tree = fit_tree(
        portfolio.x(),
        &gradient,
        delta1,
        config.leaves,
        config.min_node_obs,
    );
    terminal_values(&mut tree, portfolio, f, rho, delta1);
    for (i, fi) in f.iter_mut().enumerate() {
        *fi += config.shrinkage * tree.predict_row(portfolio.x(), i);
    }
    ensemble.trees.push(tree);
}

/// Appends `extra` rounds to an existing ensemble (warm start for the EM
/// mean-update block). `f` must be the ensemble's predictions on the
/// training data.
pub(crate) fn continue_boost(
    portfolio: &Portfolio,
    rho: f64,
    delta1: &[f64],
    config: &FitConfig,
    ensemble: &mut BoostedEnsemble,
    f: &mut [f64],
    extra: usize,
) -> Result<()> {
    config.validate()?;
    if (ensemble.trees.len() + extra).saturating_mul(config.leaves) > MAX_TREE_CELLS {
        return Err(Error::Config(format!(
            "warm start would exceed the tree budget of {MAX_TREE_CELLS} cells"
        )));
    }
    for _ in 0..extra {
        grow_round(portfolio, rho, delta1, config, ensemble, f);
    }
    Ok(())
}

/// Grid searched by [`cross_validate`]: ensemble sizes along the boosting
/// path up to `max_trees`, crossed with explicit leaf counts.
#[derive(Clone, Debug)]
pub struct CvGrid {
    pub max_trees: usize,
    pub leaves: Vec<usize>,
}

impl Default for CvGrid {
    fn default() -> Self {
        Self {
            max_trees: 1000,
            leaves: vec![2, 4, 6, 8],
        }
    }
}

/// Fold assignment: a seeded shuffle of the zero-loss and positive-loss
/// indices separately, dealt round-robin so every fold sees both classes.
fn stratified_folds(portfolio: &Portfolio, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zeros: Vec<usize> = (0..portfolio.len())
        .filter(|&i| portfolio.y()[i] == 0.0)
        .collect();
    let mut positives: Vec<usize> = (0..portfolio.len())
        .filter(|&i| portfolio.y()[i] > 0.0)
        .collect();
    zeros.shuffle(&mut rng);
    positives.shuffle(&mut rng);
    let mut assignment = vec![0usize; portfolio.len()];
    for (k, &i) in zeros.iter().chain(positives.iter()).enumerate() {
        assignment[i] = k % folds;
    }
    assignment
}

/// Selects `(num_trees, leaves)` by K-fold cross-validation.
///
/// The CV loss is the held-out weighted deviance `-sum delta*psi`, summed
/// over folds; ensemble size is read off the boosting path (no refit per
/// M). Ties prefer the smaller leaf count, then the smaller ensemble.
pub fn cross_validate(
    portfolio: &Portfolio,
    rho: f64,
    delta1: &[f64],
    grid: &CvGrid,
    base: &FitConfig,
    folds: usize,
    seed: u64,
) -> Result<FitConfig> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if grid.leaves.is_empty() {
        return Err(Error::Config("empty leaf grid".into()));
    }
    if portfolio.len() < 2 * folds {
        return Err(Error::Data(format!(
            "{} observations cannot fill {folds} folds",
            portfolio.len()
        )));
    }
    let assignment = stratified_folds(portfolio, folds, seed);

    let tasks: Vec<(usize, usize)> = grid
        .leaves
        .iter()
        .flat_map(|&l| (0..folds).map(move |k| (l, k)))
        .collect();
    let losses: Vec<Vec<f64>> = tasks
        .par_iter()
        .map(|&(leaves, fold)| {
            let train_idx: Vec<usize> = (0..portfolio.len())
                .filter(|&i| assignment[i] != fold)
                .collect();
            let held_idx: Vec<usize> = (0..portfolio.len())
                .filter(|&i| assignment[i] == fold)
                .collect();
            let train = portfolio.subset(&train_idx);
            let held = portfolio.subset(&held_idx);
            let train_delta: Vec<f64> = train_idx.iter().map(|&i| delta1[i]).collect();
            let held_delta: Vec<f64> = held_idx.iter().map(|&i| delta1[i]).collect();
            let cfg = FitConfig {
                num_trees: grid.max_trees,
                leaves,
                ..base.clone()
            };
            boost_with_monitor(&train, rho, &train_delta, &cfg, Some((&held, &held_delta)))
                .map(|(_, losses)| losses)
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, usize, usize)> = None; // (loss, leaves, m)
    for (li, &leaves) in grid.leaves.iter().enumerate() {
        for m in 0..=grid.max_trees {
            let total: f64 = (0..folds).map(|k| losses[li * folds + k][m]).sum();
            if best.as_ref().map_or(true, |&(bl, _, _)| total < bl) {
                best = Some((total, leaves, m));
            }
        }
    }
    let (_, leaves, num_trees) = best.expect("nonempty grid");
    Ok(FitConfig {
        num_trees,
        leaves,
        ..base.clone()
    })
}
