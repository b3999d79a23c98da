//! EM fitting of the zero-inflated Tweedie boosting model.
//!
//! Each iteration alternates an E-step (posterior weights of the Tweedie
//! component) with a blockwise M-step: the log-mean ensemble by weighted
//! gradient boosting, the dispersion by bracketed univariate search, and
//! the mixture weight in closed form (plain, shrink-to-zero, or
//! soft-threshold penalized). Every block is safeguarded to never decrease
//! its section of the Q-function, so the recorded (penalized) observed
//! log-likelihood trace is non-decreasing up to floating-point noise.

use rayon::prelude::*;

use crate::boost::{self, BoostedEnsemble, CvGrid, FitConfig};
use crate::error::{Error, Result};
use crate::num::pairwise_sum;
use crate::optimize::brent_maximize;
use crate::portfolio::{Matrix, Portfolio};
use crate::tweedie;
use crate::zif::{self, PosteriorWeights};

/// Dispersion search bracket (covers the large-dispersion simulation case
/// with two orders of magnitude to spare).
pub const PHI_BRACKET: (f64, f64) = (1e-4, 1e4);
const PHI_LOG_TOL: f64 = 1e-7;

/// Penalty applied to the mixture weight update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PenaltyKind {
    /// No regularization; q is the mean posterior weight.
    None,
    /// `r log(1-q)`: pulls the update toward zero by the factor `r + 1`.
    ShrinkToZero,
    /// `r log(1 - |1 - 2q|)`: soft-thresholds the update toward 1/2.
    SoftThreshold,
}

/// EM driver configuration.
#[derive(Clone, Debug)]
pub struct EmConfig {
    /// Iteration cap T.
    pub max_iters: usize,
    /// Relative change of the (penalized) observed log-likelihood that
    /// counts as converged.
    pub ll_rel_tol: f64,
    pub penalty_kind: PenaltyKind,
    /// Regularization strength r; ignored under [`PenaltyKind::None`].
    pub penalty_r: f64,
    /// Candidate index parameters for [`profile_fit`].
    pub rho_grid: Vec<f64>,
    /// Boosting block configuration.
    pub boost: FitConfig,
    /// When set, cross-validate (num_trees, leaves) on the initial
    /// posterior weights before the EM loop.
    pub cv: Option<CvGrid>,
    /// Re-run cross-validation at every M-step with the current posterior
    /// weights instead of keeping the initial selection.
    pub cv_every_iteration: bool,
    /// Hold the mixture weight fixed (1.0 reproduces the plain Tweedie
    /// boosting baseline exactly).
    pub q_fixed: Option<f64>,
    /// Full ensemble refit per M-step when `None`; otherwise append this
    /// many trees per M-step after the first.
    pub warm_start: Option<usize>,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            ll_rel_tol: 1e-8,
            penalty_kind: PenaltyKind::None,
            penalty_r: 0.0,
            rho_grid: default_rho_grid(),
            boost: FitConfig::default(),
            cv: Some(CvGrid::default()),
            cv_every_iteration: false,
            q_fixed: None,
            warm_start: None,
        }
    }
}

/// Nine equally spaced candidates 1.1, 1.2, ..., 1.9.
pub fn default_rho_grid() -> Vec<f64> {
    (1..=9).map(|k| 1.0 + k as f64 / 10.0).collect()
}

impl EmConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.ll_rel_tol > 0.0) {
            return Err(Error::Config("ll_rel_tol must be positive".into()));
        }
        if self.penalty_r < 0.0 {
            return Err(Error::Config("penalty_r must be nonnegative".into()));
        }
        if let Some(q) = self.q_fixed {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::Config(format!("q_fixed must lie in [0, 1], got {q}")));
            }
        }
        Ok(())
    }

    fn validate_grid(&self) -> Result<()> {
        if self.rho_grid.is_empty() {
            return Err(Error::Config("rho grid must be nonempty".into()));
        }
        for w in self.rho_grid.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Config("rho grid must be strictly increasing".into()));
            }
        }
        for &r in &self.rho_grid {
            tweedie::check_rho(r)?;
        }
        Ok(())
    }
}

/// A fitted zero-inflated Tweedie boosting model.
#[derive(Clone, Debug)]
pub struct ZifModel {
    pub ensemble: BoostedEnsemble,
    pub phi: f64,
    pub q: f64,
    pub rho: f64,
    pub penalty_kind: PenaltyKind,
    pub penalty_r: f64,
    /// Penalized observed log-likelihood after each EM iteration.
    pub fit_trace: Vec<f64>,
    pub converged: bool,
    /// Set when the dispersion search stopped at its bracket boundary.
    pub phi_at_boundary: bool,
}

impl ZifModel {
    /// Final trace value: the model's (penalized) mean log-likelihood on
    /// its training data.
    pub fn log_likelihood(&self) -> f64 {
        *self.fit_trace.last().expect("fit records at least one iteration")
    }

    pub fn predict_f(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.ensemble.predict(x)
    }

    /// Expected pure premium `q * exp(F(x))`.
    pub fn predict_premium(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self
            .predict_f(x)?
            .into_iter()
            .map(|f| self.q * f.exp())
            .collect())
    }

    /// Premium under the complement convention `(1-q) * exp(F(x))`.
    ///
    /// Kept only for comparing against tables computed with the mixture
    /// weight attached to the zero mass instead of the Tweedie component.
    pub fn predict_premium_complement(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self
            .predict_f(x)?
            .into_iter()
            .map(|f| (1.0 - self.q) * f.exp())
            .collect())
    }
}

/// Data-driven starting point: all zeros are provisionally attributed to
/// the point mass.
#[derive(Clone, Debug)]
pub struct Initialization {
    /// Constant log-mean of the positive-loss records.
    pub f0: f64,
    /// Dispersion maximizing the zero-excluded constant-mean likelihood.
    pub phi0: f64,
    /// Fraction of nonzero losses.
    pub q0: f64,
    /// Posterior weights evaluated at (f0, phi0, q0).
    pub weights: PosteriorWeights,
}

/// Computes the starting values for the EM loop.
///
/// Errors when every loss is zero: the mixture degenerates to a pure point
/// mass and no Tweedie component can be identified.
pub fn initialize(portfolio: &Portfolio, rho: f64) -> Result<Initialization> {
    tweedie::check_rho(rho)?;
    let n = portfolio.len();
    if n == 0 {
        return Err(Error::Data("cannot initialize on an empty portfolio".into()));
    }
    let indicator: Vec<f64> = portfolio
        .y()
        .iter()
        .map(|&y| if y > 0.0 { 1.0 } else { 0.0 })
        .collect();
    let n_pos = indicator.iter().filter(|&&v| v > 0.0).count();
    if n_pos == 0 {
        return Err(Error::Initialization(
            "all losses are zero; the model degenerates to a pure point mass".into(),
        ));
    }

    let wy: Vec<f64> = (0..n)
        .map(|i| indicator[i] * portfolio.omega()[i] * portfolio.y()[i])
        .collect();
    let w: Vec<f64> = (0..n).map(|i| indicator[i] * portfolio.omega()[i]).collect();
    let f0 = (pairwise_sum(&wy) / pairwise_sum(&w)).ln();

    let f_vec = vec![f0; n];
    let phi0 = maximize_phi(portfolio, &f_vec, rho, &indicator)?.0;
    let q0 = n_pos as f64 / n as f64;
    let weights = zif::posterior_weights(portfolio, &f_vec, phi0, rho, q0);
    Ok(Initialization {
        f0,
        phi0,
        q0,
        weights,
    })
}

/// The dispersion block objective: posterior-weighted Tweedie
/// log-likelihood as a function of phi, with the mean path held fixed.
pub fn phi_objective(
    portfolio: &Portfolio,
    f: &[f64],
    rho: f64,
    delta1: &[f64],
    phi: f64,
) -> Result<f64> {
    assert_eq!(f.len(), portfolio.len(), "one F value per observation");
    assert_eq!(delta1.len(), portfolio.len(), "one weight per observation");
    let mut terms = Vec::with_capacity(portfolio.len());
    for i in 0..portfolio.len() {
        if delta1[i] == 0.0 {
            terms.push(0.0);
            continue;
        }
        let ld = tweedie::log_density_raw(
            portfolio.y()[i],
            f[i].exp(),
            phi,
            rho,
            portfolio.omega()[i],
        )?;
        terms.push(delta1[i] * ld);
    }
    Ok(pairwise_sum(&terms))
}

fn maximize_phi(
    portfolio: &Portfolio,
    f: &[f64],
    rho: f64,
    delta1: &[f64],
) -> Result<(f64, bool)> {
    let (lo, hi) = (PHI_BRACKET.0.ln(), PHI_BRACKET.1.ln());
    let objective = |t: f64| match phi_objective(portfolio, f, rho, delta1, t.exp()) {
        Ok(v) => v,
        Err(_) => f64::NAN,
    };
    let (t_hat, _) = brent_maximize(objective, lo, hi, PHI_LOG_TOL)?;
    let at_boundary = (t_hat - lo).abs() < 1e-3 || (t_hat - hi).abs() < 1e-3;
    Ok((t_hat.exp(), at_boundary))
}

/// Dispersion update result.
#[derive(Clone, Copy, Debug)]
pub struct PhiUpdate {
    pub phi: f64,
    /// The search stopped at the bracket boundary; recorded as a warning
    /// flag on the fitted model.
    pub at_boundary: bool,
}

/// M-step dispersion block: maximizes the posterior-weighted likelihood
/// over `phi` in [`PHI_BRACKET`] on the log scale.
pub fn update_phi(
    portfolio: &Portfolio,
    f: &[f64],
    rho: f64,
    weights: &PosteriorWeights,
) -> Result<PhiUpdate> {
    let (phi, at_boundary) = maximize_phi(portfolio, f, rho, weights.delta1())?;
    Ok(PhiUpdate { phi, at_boundary })
}

/// M-step mixture-weight block, in closed form.
///
/// - none: the mean posterior weight;
/// - shrink-to-zero: the mean divided by `r + 1`;
/// - soft-threshold: `1/2 - S_r(1 - 2 mean) / (2 (r + 1))` with
///   `S_r(x) = sign(x) (|x| - r)_+`.
pub fn update_q(weights: &PosteriorWeights, kind: PenaltyKind, r: f64) -> f64 {
    let mean = weights.mean_delta1();
    match kind {
        PenaltyKind::None => mean,
        PenaltyKind::ShrinkToZero => mean / (r + 1.0),
        PenaltyKind::SoftThreshold => {
            let x = 1.0 - 2.0 * mean;
            let soft = x.signum() * (x.abs() - r).max(0.0);
            0.5 - soft / (2.0 * (r + 1.0))
        }
    }
}

/// The regularization term added to the Q-function and to the observed
/// log-likelihood trace: `r log(1-q)` or `r log(1 - |1-2q|)`, with the
/// argument clamped like every other mixture log.
pub fn penalty_term(kind: PenaltyKind, r: f64, q: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    match kind {
        PenaltyKind::None => 0.0,
        PenaltyKind::ShrinkToZero => r * (1.0 - q).max(zif::Q_CLAMP).ln(),
        PenaltyKind::SoftThreshold => r * (1.0 - (1.0 - 2.0 * q).abs()).max(zif::Q_CLAMP).ln(),
    }
}

/// Fits the model at a fixed index parameter by EM.
pub fn em_fit(portfolio: &Portfolio, rho: f64, config: &EmConfig) -> Result<ZifModel> {
    config.validate()?;
    config.boost.validate()?;
    tweedie::check_rho(rho)?;

    let n = portfolio.len();
    let init = initialize(portfolio, rho)?;
    let mut q = config.q_fixed.unwrap_or(init.q0);
    let mut phi = init.phi0;
    let f_init = vec![init.f0; n];
    let mut weights = if config.q_fixed.is_some() {
        zif::posterior_weights(portfolio, &f_init, phi, rho, q)
    } else {
        init.weights
    };

    let select_complexity = |delta1: &[f64]| -> Result<FitConfig> {
        match &config.cv {
            Some(grid) => boost::cross_validate(
                portfolio,
                rho,
                delta1,
                grid,
                &config.boost,
                config.boost.cv_folds,
                config.boost.seed,
            ),
            None => Ok(config.boost.clone()),
        }
    };
    let mut boost_cfg = select_complexity(weights.delta1())?;

    let mut ensemble = BoostedEnsemble {
        f0: init.f0,
        shrinkage: boost_cfg.shrinkage,
        rho,
        num_features: portfolio.n_features(),
        trees: Vec::new(),
    };
    let mut f_cur = f_init;
    let r = if config.penalty_kind == PenaltyKind::None {
        0.0
    } else {
        config.penalty_r
    };

    let mut trace = Vec::new();
    let mut converged = false;
    let mut phi_at_boundary = false;
    let mut ll_prev: Option<f64> = None;

    for iter in 0..config.max_iters {
        // M-step, mean block: refit (or extend) the ensemble under the
        // current posterior weights; keep the old one if the fresh fit
        // scores worse (generalized EM safeguard).
        if config.cv_every_iteration && iter > 0 {
            boost_cfg = select_complexity(weights.delta1())?;
        }
        let obj_old = boost::weighted_psi_sum(portfolio, &f_cur, rho, weights.delta1());
        match config.warm_start {
            Some(extra) if iter > 0 => {
                boost::continue_boost(
                    portfolio,
                    rho,
                    weights.delta1(),
                    &boost_cfg,
                    &mut ensemble,
                    &mut f_cur,
                    extra,
                )?;
            }
            _ => {
                let candidate = boost::boost(portfolio, rho, weights.delta1(), &boost_cfg)?;
                let f_new = candidate.predict(portfolio.x())?;
                if boost::weighted_psi_sum(portfolio, &f_new, rho, weights.delta1()) >= obj_old {
                    ensemble = candidate;
                    f_cur = f_new;
                }
            }
        }

        // M-step, dispersion block (safeguarded against the previous phi).
        let pu = update_phi(portfolio, &f_cur, rho, &weights)?;
        let new_obj = phi_objective(portfolio, &f_cur, rho, weights.delta1(), pu.phi)?;
        let old_obj = phi_objective(portfolio, &f_cur, rho, weights.delta1(), phi)?;
        if new_obj >= old_obj {
            phi = pu.phi;
            phi_at_boundary = pu.at_boundary;
        }

        // M-step, mixture block (exact argmax of its Q-section).
        if config.q_fixed.is_none() {
            q = update_q(&weights, config.penalty_kind, r);
        }

        // E-step for the next iteration and the trace entry for this one.
        let weights_new = zif::posterior_weights(portfolio, &f_cur, phi, rho, q);
        let ll = zif::observed_log_likelihood(portfolio, &f_cur, phi, rho, q)?
            + penalty_term(config.penalty_kind, r, q);
        trace.push(ll);

        if let Some(prev) = ll_prev {
            if (ll - prev).abs() <= config.ll_rel_tol * prev.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        let weights_unchanged = weights_new.delta1() == weights.delta1();
        weights = weights_new;
        ll_prev = Some(ll);

        // identical posteriors make the next (cold-started) iteration a
        // replay of this one
        if weights_unchanged && config.warm_start.is_none() {
            converged = true;
            break;
        }
    }

    Ok(ZifModel {
        ensemble,
        phi,
        q,
        rho,
        penalty_kind: config.penalty_kind,
        penalty_r: r,
        fit_trace: trace,
        converged,
        phi_at_boundary,
    })
}

/// Profile likelihood over the index parameter: runs [`em_fit`] for every
/// grid point and keeps the model with the largest (penalized) observed
/// log-likelihood. Ties break toward the smaller index. Grid points run in
/// parallel; each gets the seed `boost.seed XOR grid-position`.
pub fn profile_fit(portfolio: &Portfolio, config: &EmConfig) -> Result<ZifModel> {
    config.validate_grid()?;
    let fits: Vec<Result<ZifModel>> = config
        .rho_grid
        .par_iter()
        .enumerate()
        .map(|(k, &rho)| {
            let mut cfg = config.clone();
            cfg.boost.seed = config.boost.seed ^ k as u64;
            em_fit(portfolio, rho, &cfg)
        })
        .collect();

    let mut best: Option<ZifModel> = None;
    for fit in fits {
        let model = fit?;
        let better = match &best {
            None => true,
            Some(b) => model.log_likelihood() > b.log_likelihood(),
        };
        if better {
            best = Some(model);
        }
    }
    Ok(best.expect("nonempty grid"))
}
