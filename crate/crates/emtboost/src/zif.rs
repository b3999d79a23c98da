//! Zero-inflated Tweedie mixture: density, posterior weights of the latent
//! component indicator, and the EM Q-function.
//!
//! The mixture puts probability `q` on a Tweedie draw and `1 - q` on an
//! exact zero. Whenever `log q` or `log(1 - q)` is taken the probability is
//! clamped to `[1e-10, 1 - 1e-10]`; the density itself is exact at the
//! endpoints `q = 0` and `q = 1`.

use crate::error::Result;
use crate::num::{log_sum_exp2, pairwise_sum, Real};
use crate::portfolio::Portfolio;
use crate::tweedie::{self, TweedieParams};

/// Clamp bound applied before taking `log q` or `log(1 - q)`.
pub const Q_CLAMP: f64 = 1e-10;

/// Parameters of one zero-inflated Tweedie observation: log-mean `f_value`,
/// dispersion, index, and Tweedie-portion probability `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZifParams<T> {
    f_value: T,
    phi: T,
    rho: T,
    q: T,
}

impl<T: Real> ZifParams<T> {
    pub fn new(f_value: T, phi: T, rho: T, q: T) -> Result<Self> {
        if !f_value.is_finite() {
            return Err(crate::error::Error::InvalidParameter(format!(
                "f_value must be finite, got {f_value}"
            )));
        }
        if !(q >= T::zero() && q <= T::one()) {
            return Err(crate::error::Error::InvalidParameter(format!(
                "q must lie in [0, 1], got {q}"
            )));
        }
        // mu/phi/rho range checks are shared with the Tweedie constructor
        TweedieParams::new(f_value.exp(), phi, rho)?;
        Ok(Self {
            f_value,
            phi,
            rho,
            q,
        })
    }

    pub fn f_value(&self) -> T {
        self.f_value
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn q(&self) -> T {
        self.q
    }
}

fn ln_q_clamped<T: Real>(q: T) -> T {
    q.max(T::of(Q_CLAMP)).min(T::one()).ln()
}

fn ln_one_minus_q_clamped<T: Real>(q: T) -> T {
    (T::one() - q).max(T::of(Q_CLAMP)).ln()
}

/// Log-density of the zero-inflated Tweedie mixture.
///
/// `y > 0` contributes `log q` plus the Tweedie log-density; `y = 0`
/// contributes `log(q * P(Z = 0) + (1 - q))` through a stable log-sum-exp.
/// Exact at the endpoints: `q = 1` reduces to the plain Tweedie density and
/// `q = 0` gives a pure point mass (0 at zero, `-inf` sentinel elsewhere).
pub fn zif_log_density<T: Real>(y: T, params: &ZifParams<T>, weight: T) -> Result<T> {
    if !(y >= T::zero()) || !y.is_finite() {
        return Err(crate::error::Error::Domain(format!(
            "zif_log_density requires y >= 0, got {y}"
        )));
    }
    zif_log_density_unchecked(
        y,
        params.f_value,
        params.phi,
        params.rho,
        params.q,
        weight,
    )
}

fn zif_log_density_unchecked<T: Real>(y: T, f: T, phi: T, rho: T, q: T, weight: T) -> Result<T> {
    let mu = f.exp();
    if y > T::zero() {
        if q == T::zero() {
            return Ok(T::neg_infinity());
        }
        let ld = tweedie::log_density_raw(y, mu, phi, rho, weight)?;
        return Ok(ln_q_clamped(q) + ld);
    }
    let ld0 = tweedie::log_density_raw(T::zero(), mu, phi, rho, weight)?;
    if q == T::one() {
        return Ok(ld0);
    }
    if q == T::zero() {
        return Ok(T::zero());
    }
    Ok(log_sum_exp2(
        ln_q_clamped(q) + ld0,
        ln_one_minus_q_clamped(q),
    ))
}

/// Per-observation posterior probabilities of the latent mixture indicator.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorWeights {
    delta1: Vec<f64>,
    delta0: Vec<f64>,
}

impl PosteriorWeights {
    pub fn new(delta1: Vec<f64>) -> Self {
        let delta0 = delta1.iter().map(|d| 1.0 - d).collect();
        Self { delta1, delta0 }
    }

    pub fn len(&self) -> usize {
        self.delta1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta1.is_empty()
    }

    pub fn delta1(&self) -> &[f64] {
        &self.delta1
    }

    pub fn delta0(&self) -> &[f64] {
        &self.delta0
    }

    pub fn mean_delta1(&self) -> f64 {
        pairwise_sum(&self.delta1) / self.delta1.len() as f64
    }
}

/// E-step: posterior weight of the Tweedie component for every observation.
///
/// Observations with `y > 0` get weight 1 exactly. For zeros the weight is
/// `q e / (q e + 1 - q)` with `e = exp(-(omega/phi) exp(F (2-rho)) / (2-rho))`.
///
/// Panics if `f` does not have one entry per observation.
pub fn posterior_weights(
    portfolio: &Portfolio,
    f: &[f64],
    phi: f64,
    rho: f64,
    q: f64,
) -> PosteriorWeights {
    assert_eq!(f.len(), portfolio.len(), "one F value per observation");
    let delta1 = portfolio
        .y()
        .iter()
        .zip(f)
        .zip(portfolio.omega())
        .map(|((&y, &fi), &w)| {
            if y > 0.0 || q >= 1.0 {
                1.0
            } else if q <= 0.0 {
                0.0
            } else {
                let log_e = -(w / phi) * (fi * (2.0 - rho)).exp() / (2.0 - rho);
                let qe = q * log_e.exp();
                qe / (qe + (1.0 - q))
            }
        })
        .collect();
    PosteriorWeights::new(delta1)
}

/// The EM Q-function: expected complete-data log-likelihood under the given
/// posterior weights, averaged over observations.
pub fn q_function(
    portfolio: &Portfolio,
    f: &[f64],
    phi: f64,
    rho: f64,
    q: f64,
    weights: &PosteriorWeights,
) -> Result<f64> {
    assert_eq!(f.len(), portfolio.len(), "one F value per observation");
    assert_eq!(weights.len(), portfolio.len(), "one weight per observation");
    let n = portfolio.len();
    let ln_q = ln_q_clamped(q);
    let ln_1mq = ln_one_minus_q_clamped(q);
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let y = portfolio.y()[i];
        let ld = tweedie::log_density_raw(y, f[i].exp(), phi, rho, portfolio.omega()[i])?;
        let mut t = weights.delta1()[i] * (ln_q + ld);
        if y == 0.0 {
            t += weights.delta0()[i] * ln_1mq;
        }
        terms.push(t);
    }
    Ok(pairwise_sum(&terms) / n as f64)
}

/// Mean zero-inflated log-likelihood of the portfolio.
pub fn observed_log_likelihood(
    portfolio: &Portfolio,
    f: &[f64],
    phi: f64,
    rho: f64,
    q: f64,
) -> Result<f64> {
    assert_eq!(f.len(), portfolio.len(), "one F value per observation");
    let n = portfolio.len();
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        terms.push(zif_log_density_unchecked(
            portfolio.y()[i],
            f[i],
            phi,
            rho,
            q,
            portfolio.omega()[i],
        )?);
    }
    Ok(pairwise_sum(&terms) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio::Matrix;

    fn tiny_portfolio(y: Vec<f64>) -> Portfolio {
        let x = Matrix::from_rows(&y.iter().map(|_| vec![0.0]).collect::<Vec<_>>()).unwrap();
        let omega = vec![1.0; y.len()];
        Portfolio::new(y, x, omega, None).unwrap()
    }

    #[test]
    fn q_one_reduces_to_plain_tweedie() {
        let params = ZifParams::new(0.3, 0.8, 1.4, 1.0).unwrap();
        let tw = TweedieParams::new(0.3f64.exp(), 0.8, 1.4).unwrap();
        for &y in &[0.0, 0.4, 1.7, 6.2] {
            let a = zif_log_density(y, &params, 1.3).unwrap();
            let b = tweedie::log_density(y, &tw, 1.3).unwrap();
            assert_eq!(a, b, "y = {y}");
        }
    }

    #[test]
    fn q_zero_is_pure_point_mass() {
        let params = ZifParams::new(0.0, 1.0, 1.5, 0.0).unwrap();
        assert_eq!(zif_log_density(0.0, &params, 1.0).unwrap(), 0.0);
        assert_eq!(
            zif_log_density(0.5, &params, 1.0).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn zero_probability_matches_closed_form() {
        for &q in &[0.15f64, 0.5, 0.93] {
            for &f in &[-0.5f64, 0.0, 1.2] {
                for &phi in &[0.5f64, 2.0] {
                    for &rho in &[1.3f64, 1.7] {
                        let params = ZifParams::new(f, phi, rho, q).unwrap();
                        let direct =
                            (q * (-(f * (2.0 - rho)).exp() / ((2.0 - rho) * phi)).exp() + (1.0 - q))
                                .ln();
                        let got = zif_log_density(0.0, &params, 1.0).unwrap();
                        assert!((got - direct).abs() < 1e-12, "q={q} f={f} phi={phi} rho={rho}");
                    }
                }
            }
        }
    }

    #[test]
    fn density_continuous_in_q_inside_clamp_bounds() {
        // |d/dq| is at most 1/q for y > 0 and 1/(1-q) for y = 0, so steps
        // are bounded by the log-increments of q and 1-q
        let grid: Vec<f64> = (1..1000).map(|k| k as f64 / 1000.0).collect();
        for &y in &[0.0, 1.1] {
            let mut prev: Option<(f64, f64)> = None;
            for &q in &grid {
                let params = ZifParams::new(0.2, 1.0, 1.6, q).unwrap();
                let v = zif_log_density(y, &params, 1.0).unwrap();
                assert!(v.is_finite());
                if let Some((pq, pv)) = prev {
                    let bound = (q / pq).ln().abs() + ((1.0 - q) / (1.0 - pq)).ln().abs() + 1e-12;
                    assert!((v - pv).abs() <= bound, "jump at q={q} for y={y}");
                }
                prev = Some((q, v));
            }
        }
    }

    #[test]
    fn posterior_is_one_for_positive_losses() {
        let p = tiny_portfolio(vec![0.0, 0.3, 2.0, 0.0]);
        let f = vec![0.1; 4];
        let w = posterior_weights(&p, &f, 1.0, 1.5, 0.4);
        assert_eq!(w.delta1()[1], 1.0);
        assert_eq!(w.delta1()[2], 1.0);
        assert!(w.delta1()[0] < 1.0 && w.delta1()[0] > 0.0);
        for i in 0..4 {
            assert_eq!(w.delta1()[i] + w.delta0()[i], 1.0);
        }
    }

    #[test]
    fn posterior_with_q_one_is_all_ones() {
        let p = tiny_portfolio(vec![0.0, 0.0, 1.0]);
        let w = posterior_weights(&p, &[0.0; 3], 1.0, 1.5, 1.0);
        assert_eq!(w.delta1(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn posterior_hand_value() {
        // y = 0, q = 0.5, F = 0, phi = 1, rho = 1.5, omega = 1:
        // e = exp(-2), delta1 = e / (e + 1)
        let p = tiny_portfolio(vec![0.0]);
        let w = posterior_weights(&p, &[0.0], 1.0, 1.5, 0.5);
        let e = (-2.0f64).exp();
        assert!((w.delta1()[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((w.delta1()[0] - 0.11920).abs() < 5e-6);
    }

    #[test]
    fn posterior_increasing_in_q_at_zero() {
        let p = tiny_portfolio(vec![0.0]);
        let mut prev = -1.0;
        for k in 0..=100 {
            let q = k as f64 / 100.0;
            let w = posterior_weights(&p, &[0.4], 0.7, 1.4, q);
            assert!(w.delta1()[0] >= prev);
            prev = w.delta1()[0];
        }
        assert_eq!(prev, 1.0);
    }

    #[test]
    fn q_function_reduces_to_mean_tweedie_loglik() {
        let p = tiny_portfolio(vec![0.7, 1.3, 0.2]);
        let f = vec![-0.1, 0.4, 0.0];
        let w = posterior_weights(&p, &f, 0.9, 1.45, 1.0);
        let qf = q_function(&p, &f, 0.9, 1.45, 1.0, &w).unwrap();
        let tw: f64 = (0..3)
            .map(|i| {
                let params = TweedieParams::new(f[i].exp(), 0.9, 1.45).unwrap();
                tweedie::log_density(p.y()[i], &params, 1.0).unwrap()
            })
            .sum::<f64>()
            / 3.0;
        assert!((qf - tw).abs() < 1e-14);
        // equals the observed mixture log-likelihood in the degenerate case
        let oll = observed_log_likelihood(&p, &f, 0.9, 1.45, 1.0).unwrap();
        assert!((qf - oll).abs() < 1e-14);
    }
}
