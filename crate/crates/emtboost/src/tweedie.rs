//! Tweedie compound Poisson-Gamma density kernel.
//!
//! For an index parameter `rho` in (1, 2) the Tweedie distribution is a
//! Poisson sum of Gamma claims: it places positive mass at zero and has a
//! continuous density on (0, inf) whose normalizer `a(z, phi, rho)` is an
//! infinite series. Everything here is evaluated in log space; the series
//! is summed outward from its peak term until terms fall
//! [`Real::SERIES_TAIL_NATS`] below the peak.

use crate::error::{Error, Result};
use crate::num::Real;

/// Largest series index the evaluator will walk to before reporting a
/// capacity error.
const MAX_SERIES_INDEX: f64 = 1.0e7;

/// Mean/dispersion/index parameters of one Tweedie observation model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TweedieParams<T> {
    mu: T,
    phi: T,
    rho: T,
}

/// Poisson rate and Gamma shape/scale of the equivalent compound process.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompoundPoissonParams<T> {
    lambda: T,
    alpha: T,
    gamma: T,
}

pub(crate) fn check_rho<T: Real>(rho: T) -> Result<()> {
    if !(rho > T::one() && rho < T::of(2.0)) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rho must lie in the open interval (1, 2), got {rho}"
        )));
    }
    Ok(())
}

fn check_positive<T: Real>(value: T, name: &str) -> Result<()> {
    if !(value > T::zero()) || !value.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

impl<T: Real> TweedieParams<T> {
    pub fn new(mu: T, phi: T, rho: T) -> Result<Self> {
        check_positive(mu, "mu")?;
        check_positive(phi, "phi")?;
        check_rho(rho)?;
        Ok(Self { mu, phi, rho })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// Gamma shape implied by the index parameter: `(2 - rho) / (rho - 1)`.
    pub fn alpha(&self) -> T {
        (T::of(2.0) - self.rho) / (self.rho - T::one())
    }

    pub fn to_compound_poisson(&self) -> CompoundPoissonParams<T> {
        let two = T::of(2.0);
        let lambda = self.mu.powf(two - self.rho) / (self.phi * (two - self.rho));
        let gamma = self.phi * (self.rho - T::one()) * self.mu.powf(self.rho - T::one());
        CompoundPoissonParams {
            lambda,
            alpha: self.alpha(),
            gamma,
        }
    }
}

impl<T: Real> CompoundPoissonParams<T> {
    pub fn new(lambda: T, alpha: T, gamma: T) -> Result<Self> {
        check_positive(lambda, "lambda")?;
        check_positive(alpha, "alpha")?;
        check_positive(gamma, "gamma")?;
        Ok(Self {
            lambda,
            alpha,
            gamma,
        })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn to_tweedie(&self) -> TweedieParams<T> {
        let one = T::one();
        let rho = (self.alpha + T::of(2.0)) / (self.alpha + one);
        let mu = self.lambda * self.alpha * self.gamma;
        let phi = self.gamma / ((rho - one) * mu.powf(rho - one));
        TweedieParams { mu, phi, rho }
    }
}

/// `log a(z, phi, rho)` where `a` is the series normalizer of the Tweedie
/// density for `z > 0`.
///
/// The peak index is located from the closed form `z^(2-rho)/((2-rho)*phi)`
/// followed by integer hill climbing (the log-terms are concave in the
/// index), then terms are accumulated outward until they fall
/// [`Real::SERIES_TAIL_NATS`] below the peak.
///
/// By convention `a(0, ., .) = 1`; callers handle `z = 0` themselves and
/// this function rejects it.
pub fn log_series_a<T: Real>(z: T, phi: T, rho: T) -> Result<T> {
    if !(z > T::zero()) || !z.is_finite() {
        return Err(Error::Domain(format!("series requires z > 0, got {z}")));
    }
    check_positive(phi, "phi")?;
    check_rho(rho)?;

    let one = T::one();
    let two = T::of(2.0);
    let alpha = (two - rho) / (rho - one);
    let ln_z = z.ln();
    let ln_rho_m1 = (rho - one).ln();
    let ln_two_m_rho = (two - rho).ln();
    let ln_phi = phi.ln();

    // log W_t for a (real-valued) index t >= 1.
    let log_term = |t: T| -> T {
        t * alpha * ln_z
            - t * alpha * ln_rho_m1
            - t * ln_two_m_rho
            - (t * alpha).ln_gamma()
            - t * (one + alpha) * ln_phi
            - (t + one).ln_gamma()
    };

    let cap = T::of(MAX_SERIES_INDEX);
    let capacity_err = || {
        Err(Error::SeriesCapacity(format!(
            "series peak beyond index {MAX_SERIES_INDEX:.0} for z={z}, phi={phi}, rho={rho}"
        )))
    };

    let mut t_peak = (z.powf(two - rho) / ((two - rho) * phi)).round().max(one);
    if t_peak > cap {
        return capacity_err();
    }
    while log_term(t_peak + one) > log_term(t_peak) {
        t_peak = t_peak + one;
        if t_peak > cap {
            return capacity_err();
        }
    }
    while t_peak > one && log_term(t_peak - one) > log_term(t_peak) {
        t_peak = t_peak - one;
    }

    let peak = log_term(t_peak);
    let cutoff = peak - T::SERIES_TAIL_NATS;

    let mut acc = one; // the peak term itself
    let mut t = t_peak - one;
    while t >= one {
        let lw = log_term(t);
        if lw < cutoff {
            break;
        }
        acc = acc + (lw - peak).exp();
        t = t - one;
    }
    let mut t = t_peak + one;
    loop {
        let lw = log_term(t);
        if lw < cutoff {
            break;
        }
        acc = acc + (lw - peak).exp();
        t = t + one;
        if t > cap {
            return capacity_err();
        }
    }

    Ok(peak + acc.ln() - ln_z)
}

/// Log-density of one observation under `Tw(mu, phi/weight, rho)`.
///
/// `weight` is the policy duration; it enters only through the
/// per-observation dispersion `phi/weight`.
pub fn log_density<T: Real>(y: T, params: &TweedieParams<T>, weight: T) -> Result<T> {
    if !(y >= T::zero()) || !y.is_finite() {
        return Err(Error::Domain(format!("log_density requires y >= 0, got {y}")));
    }
    check_positive(weight, "weight")?;
    log_density_raw(y, params.mu, params.phi, params.rho, weight)
}

/// Same as [`log_density`] without argument validation. Callers guarantee
/// `y >= 0`, positive `mu`/`phi`/`weight`, and `rho` in (1, 2).
pub(crate) fn log_density_raw<T: Real>(y: T, mu: T, phi: T, rho: T, weight: T) -> Result<T> {
    let one = T::one();
    let two = T::of(2.0);
    let disp = phi / weight;
    let kappa = mu.powf(two - rho) / (two - rho);
    if y == T::zero() {
        return Ok(-kappa / disp);
    }
    let theta_term = y * mu.powf(one - rho) / (one - rho);
    Ok(log_series_a(y, disp, rho)? + (theta_term - kappa) / disp)
}

/// `P(Y = 0)` under `Tw(mu, phi/weight, rho)`: `exp(-lambda * weight)` in
/// the compound Poisson view.
pub fn zero_mass_prob<T: Real>(params: &TweedieParams<T>, weight: T) -> T {
    let two = T::of(2.0);
    let disp = params.phi / weight;
    let kappa = params.mu.powf(two - params.rho) / (two - params.rho);
    (-kappa / disp).exp()
}
