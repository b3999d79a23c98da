//! Seeded data generators for the simulation studies and the
//! under-/over-sampling resampler.
//!
//! Reproducibility contract: every generator is a pure function of its
//! arguments and seed. Observation `i` draws from its own ChaCha stream
//! (`seed_from_u64(seed)` with `set_stream(i)`), so generating a portfolio
//! in parallel or in pieces yields exactly the sequential result.

use rand::distributions::Uniform;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Gamma, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::portfolio::{Matrix, Portfolio};

/// Per-observation RNG stream.
fn obs_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Two-interaction surface used by cases 1.1 and 3:
/// `exp(-5(1-x1)^2 + x2^2) + exp(-5 x1^2 + (1-x2)^2)`.
pub fn target_two_interactions(x1: f64, x2: f64) -> f64 {
    (-5.0 * (1.0 - x1) * (1.0 - x1) + x2 * x2).exp()
        + (-5.0 * x1 * x1 + (1.0 - x2) * (1.0 - x2)).exp()
}

/// Cosine surface used by case 2.1:
/// `2 cos(2.4 pi sqrt(|x1|^3 + |x2|^3))`.
pub fn target_cosine(x1: f64, x2: f64) -> f64 {
    2.0 * (2.4 * std::f64::consts::PI * (x1.abs().powi(3) + x2.abs().powi(3)).sqrt()).cos()
}

/// One Gaussian bump of the random function generator.
#[derive(Clone, Debug)]
pub struct RfgTerm {
    /// Expansion coefficient, uniform on [-1, 1].
    pub coeff: f64,
    /// Indices of the predictor subset this term looks at.
    pub vars: Vec<usize>,
    /// Bump center, standard normal.
    pub mean: Vec<f64>,
    /// Orthonormal factor of the quadratic form, row-major `p_k x p_k`.
    pub rotation: Vec<f64>,
    /// Eigenvalues of the quadratic form; sqrt(d) uniform on [0.1, 2.0].
    pub scales: Vec<f64>,
}

impl RfgTerm {
    /// `coeff * exp(-1/2 (z-u)^T V (z-u))` with `V = U diag(d) U^T`,
    /// evaluated through the factored form (a sum of squares, so the
    /// quadratic form can never go negative).
    pub fn eval(&self, z: &[f64]) -> f64 {
        let k = self.vars.len();
        debug_assert_eq!(z.len(), k);
        let mut quad = 0.0;
        for r in 0..k {
            let mut dot = 0.0;
            for c in 0..k {
                dot += self.rotation[r * k + c] * (z[c] - self.mean[c]);
            }
            quad += self.scales[r] * dot * dot;
        }
        self.coeff * (-0.5 * quad).exp()
    }
}

/// A drawn random-function-generator target: a linear expansion of 20
/// Gaussian bumps over random predictor subsets.
#[derive(Clone, Debug)]
pub struct RfgSpec {
    terms: Vec<RfgTerm>,
}

impl RfgSpec {
    pub fn terms(&self) -> &[RfgTerm] {
        &self.terms
    }
}

pub const RFG_NUM_TERMS: usize = 20;

/// Draws the random function generator for `p`-dimensional predictors.
pub fn rfg_draw(p: usize, seed: u64) -> RfgSpec {
    assert!(p >= 1, "rfg needs at least one predictor");
    let mut rng = obs_rng(seed, u64::MAX); // spec draw gets its own stream
    let coeff_dist = Uniform::new_inclusive(-1.0, 1.0);
    let size_dist = Exp::new(0.5).expect("valid rate"); // mean 2
    let scale_dist = Uniform::new_inclusive(0.1, 2.0);

    let mut terms = Vec::with_capacity(RFG_NUM_TERMS);
    for _ in 0..RFG_NUM_TERMS {
        let coeff = rng.sample(coeff_dist);
        let r: f64 = rng.sample(size_dist);
        let p_k = ((2.5 + r).floor() as usize).min(p).max(1);

        let mut perm: Vec<usize> = (0..p).collect();
        perm.shuffle(&mut rng);
        let vars = perm[..p_k].to_vec();

        let mean: Vec<f64> = (0..p_k).map(|_| rng.sample(StandardNormal)).collect();
        let rotation = random_orthonormal(p_k, &mut rng);
        let scales: Vec<f64> = (0..p_k)
            .map(|_| {
                let root: f64 = rng.sample(scale_dist);
                root * root
            })
            .collect();
        terms.push(RfgTerm {
            coeff,
            vars,
            mean,
            rotation,
            scales,
        });
    }
    RfgSpec { terms }
}

/// Row-major orthonormal matrix from Gram-Schmidt on standard normals.
fn random_orthonormal(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut m = vec![0.0; k * k];
    loop {
        for v in m.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        if gram_schmidt_rows(&mut m, k) {
            return m;
        }
        // near-singular draw; try again (probability ~0)
    }
}

fn gram_schmidt_rows(m: &mut [f64], k: usize) -> bool {
    for r in 0..k {
        for prev in 0..r {
            let dot: f64 = (0..k).map(|c| m[r * k + c] * m[prev * k + c]).sum();
            for c in 0..k {
                m[r * k + c] -= dot * m[prev * k + c];
            }
        }
        let norm: f64 = (0..k).map(|c| m[r * k + c] * m[r * k + c]).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return false;
        }
        for c in 0..k {
            m[r * k + c] /= norm;
        }
    }
    true
}

/// Evaluates the drawn target at one predictor row.
pub fn rfg_eval(spec: &RfgSpec, x_row: &[f64]) -> f64 {
    let mut acc = 0.0;
    for term in &spec.terms {
        let z: Vec<f64> = term.vars.iter().map(|&j| x_row[j]).collect();
        acc += term.eval(&z);
    }
    acc
}

/// One draw from `Tw(mu, phi, rho)` as a Poisson number of Gamma claims.
fn sample_tweedie(rng: &mut ChaCha8Rng, mu: f64, phi: f64, rho: f64) -> f64 {
    let lambda = mu.powf(2.0 - rho) / (phi * (2.0 - rho));
    let alpha = (2.0 - rho) / (rho - 1.0);
    let gamma_scale = phi * (rho - 1.0) * mu.powf(rho - 1.0);
    let n = rng.sample(Poisson::new(lambda).expect("positive rate")) as u64;
    if n == 0 {
        return 0.0;
    }
    let claim = Gamma::new(alpha, gamma_scale).expect("valid gamma");
    (0..n).map(|_| rng.sample(claim)).sum()
}

/// Zero-inflated Tweedie losses: with probability `q` a Tweedie draw at
/// dispersion `phi/omega_i`, otherwise an exact zero.
pub fn sample_zif_tweedie(
    f: &[f64],
    phi: f64,
    rho: f64,
    q: f64,
    omega: &[f64],
    seed: u64,
) -> Vec<f64> {
    assert_eq!(f.len(), omega.len(), "one duration per observation");
    (0..f.len())
        .map(|i| {
            let mut rng = obs_rng(seed, i as u64);
            if rng.gen_bool(q) {
                sample_tweedie(&mut rng, f[i].exp(), phi / omega[i], rho)
            } else {
                0.0
            }
        })
        .collect()
}

/// Zero-inflated Tobit losses: with probability `q` the censored normal
/// `max(F + eps, 0)`, otherwise an exact zero.
pub fn sample_zif_tobit(f: &[f64], q: f64, seed: u64) -> Vec<f64> {
    (0..f.len())
        .map(|i| {
            let mut rng = obs_rng(seed, i as u64);
            if rng.gen_bool(q) {
                let eps: f64 = rng.sample(StandardNormal);
                (f[i] + eps).max(0.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// Expected value of the zero-censored unit-variance normal,
/// `phi(-mu) + mu (1 - Phi(-mu))`. This is also the premium transform of
/// the boosted Tobit baseline.
pub fn tobit_expectation(mu: f64) -> f64 {
    let pdf = (-0.5 * mu * mu).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let cdf_neg = 0.5 * statrs::function::erf::erfc(mu / std::f64::consts::SQRT_2);
    pdf + mu * (1.0 - cdf_neg)
}

/// Scenario generators. Each returns a portfolio with unit durations and
/// the expected-true-loss oracle in `true_premium`.
///
/// Case 1.1: two-interaction surface, predictors uniform on (0,1)^2,
/// zero-inflated Tweedie losses.
pub fn generate_case1_1(n: usize, phi: f64, rho: f64, q: f64, seed: u64) -> Portfolio {
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = obs_rng(seed, i as u64);
        let a: f64 = rng.gen_range(0.0..1.0);
        let b: f64 = rng.gen_range(0.0..1.0);
        x1.push(a);
        x2.push(b);
        f.push(target_two_interactions(a, b));
    }
    // losses draw from a shifted seed so covariate and loss streams differ
    let y = sample_zif_tweedie(&f, phi, rho, q, &vec![1.0; n], seed.wrapping_add(1));
    let true_premium: Vec<f64> = f.iter().map(|fi| q * fi.exp()).collect();
    let x = Matrix::from_columns(vec![x1, x2]).expect("two equal columns");
    Portfolio::new(y, x, vec![1.0; n], Some(true_premium)).expect("valid generated data")
}

/// Case 3: same surface as 1.1 but a plain Tweedie (q = 1) with a large
/// dispersion, so the Tweedie zero mass itself dominates.
pub fn generate_case3(n: usize, phi: f64, seed: u64) -> Portfolio {
    generate_case1_1(n, phi, 1.5, 1.0, seed)
}

/// Case 1.2: random-function-generator surface, standard normal
/// predictors, zero-inflated Tweedie losses.
pub fn generate_case1_2(
    n: usize,
    p: usize,
    phi: f64,
    rho: f64,
    q: f64,
    spec: &RfgSpec,
    seed: u64,
) -> Portfolio {
    let (x, f) = normal_predictors_with_target(n, p, spec, seed);
    let y = sample_zif_tweedie(&f, phi, rho, q, &vec![1.0; n], seed.wrapping_add(1));
    let true_premium: Vec<f64> = f.iter().map(|fi| q * fi.exp()).collect();
    Portfolio::new(y, x, vec![1.0; n], Some(true_premium)).expect("valid generated data")
}

/// Case 2.1: cosine surface, predictors uniform on (-1,1)^2, zero-inflated
/// Tobit losses.
pub fn generate_case2_1(n: usize, q: f64, seed: u64) -> Portfolio {
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = obs_rng(seed, i as u64);
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        x1.push(a);
        x2.push(b);
        f.push(target_cosine(a, b));
    }
    let y = sample_zif_tobit(&f, q, seed.wrapping_add(1));
    let true_premium: Vec<f64> = f.iter().map(|&fi| q * tobit_expectation(fi)).collect();
    let x = Matrix::from_columns(vec![x1, x2]).expect("two equal columns");
    Portfolio::new(y, x, vec![1.0; n], Some(true_premium)).expect("valid generated data")
}

/// Case 2.2: random-function-generator surface, standard normal
/// predictors, zero-inflated Tobit losses.
pub fn generate_case2_2(n: usize, p: usize, q: f64, spec: &RfgSpec, seed: u64) -> Portfolio {
    let (x, f) = normal_predictors_with_target(n, p, spec, seed);
    let y = sample_zif_tobit(&f, q, seed.wrapping_add(1));
    let true_premium: Vec<f64> = f.iter().map(|&fi| q * tobit_expectation(fi)).collect();
    Portfolio::new(y, x, vec![1.0; n], Some(true_premium)).expect("valid generated data")
}

fn normal_predictors_with_target(
    n: usize,
    p: usize,
    spec: &RfgSpec,
    seed: u64,
) -> (Matrix, Vec<f64>) {
    let mut cols = vec![vec![0.0; n]; p];
    let mut f = Vec::with_capacity(n);
    let mut row = vec![0.0; p];
    for i in 0..n {
        let mut rng = obs_rng(seed, i as u64);
        for (j, col) in cols.iter_mut().enumerate() {
            let v: f64 = rng.sample(StandardNormal);
            col[i] = v;
            row[j] = v;
        }
        f.push(rfg_eval(spec, &row));
    }
    (Matrix::from_columns(cols).expect("equal columns"), f)
}

/// Under-samples the positive-loss records by fraction `lambda` (without
/// replacement) and replicates the zero-loss records to `ceil(eta * n0)`
/// (whole copies plus a with-replacement remainder), then reshuffles.
pub fn resample_portfolio(
    portfolio: &Portfolio,
    under_lambda: f64,
    over_eta: f64,
    seed: u64,
) -> Result<Portfolio> {
    if !(under_lambda > 0.0 && under_lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "under-sampling fraction must lie in (0, 1], got {under_lambda}"
        )));
    }
    if !(over_eta >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "over-sampling fraction must be at least 1, got {over_eta}"
        )));
    }
    let zeros: Vec<usize> = (0..portfolio.len())
        .filter(|&i| portfolio.y()[i] == 0.0)
        .collect();
    let positives: Vec<usize> = (0..portfolio.len())
        .filter(|&i| portfolio.y()[i] > 0.0)
        .collect();
    if zeros.is_empty() || positives.is_empty() {
        return Err(Error::Data(
            "resampling needs both zero and positive losses".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep = (under_lambda * positives.len() as f64).ceil() as usize;
    let keep = keep.clamp(1, positives.len());
    let mut pos_pool = positives.clone();
    pos_pool.shuffle(&mut rng);
    pos_pool.truncate(keep);

    let target_zeros = (over_eta * zeros.len() as f64).ceil() as usize;
    let mut zero_pool = Vec::with_capacity(target_zeros);
    while zero_pool.len() + zeros.len() <= target_zeros {
        zero_pool.extend_from_slice(&zeros);
    }
    while zero_pool.len() < target_zeros {
        zero_pool.push(*zeros.choose(&mut rng).expect("nonempty zeros"));
    }

    let mut idx = Vec::with_capacity(zero_pool.len() + pos_pool.len());
    idx.extend_from_slice(&zero_pool);
    idx.extend_from_slice(&pos_pool);
    if idx.is_empty() {
        return Err(Error::Data("resampling produced an empty portfolio".into()));
    }
    idx.shuffle(&mut rng);
    Ok(portfolio.subset(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::pairwise_sum;

    #[test]
    fn two_interactions_reference_points() {
        let f10 = target_two_interactions(1.0, 0.0);
        assert!((f10 - (1.0 + (-4.0f64).exp())).abs() < 1e-15);
        let fmid = target_two_interactions(0.5, 0.5);
        assert!((fmid - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn two_interactions_reflection_symmetry() {
        // the surface is symmetric under (x1, x2) -> (1-x1, 1-x2)
        for k in 0..50 {
            let a = (k as f64 * 0.37).fract();
            let b = (k as f64 * 0.73).fract();
            let lhs = target_two_interactions(a, b);
            let rhs = target_two_interactions(1.0 - a, 1.0 - b);
            assert!((lhs - rhs).abs() < 1e-12, "a={a} b={b}");
        }
    }

    #[test]
    fn cosine_reference_points() {
        assert_eq!(target_cosine(0.0, 0.0), 2.0);
        for k in 0..100 {
            let a = -1.0 + 2.0 * (k as f64 * 0.173).fract();
            let b = -1.0 + 2.0 * (k as f64 * 0.619).fract();
            assert!(target_cosine(a, b).abs() <= 2.0 + 1e-12);
        }
        // phase root: |x1|^3 + |x2|^3 = (1/2.4)^2 puts the cosine at pi
        let s: f64 = 1.0 / 2.4;
        let x1 = (s * s).cbrt();
        assert!((target_cosine(x1, 0.0) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn rfg_term_peak_equals_coefficient() {
        let spec = rfg_draw(10, 7);
        for term in spec.terms() {
            let at_peak = term.eval(&term.mean);
            assert_eq!(at_peak, term.coeff);
        }
    }

    #[test]
    fn rfg_terms_are_bounded_by_coefficients() {
        let spec = rfg_draw(6, 3);
        let mut rng = obs_rng(99, 0);
        for term in spec.terms() {
            for _ in 0..200 {
                let z: Vec<f64> = (0..term.vars.len()).map(|_| rng.sample(StandardNormal)).collect();
                assert!(term.eval(&z).abs() <= term.coeff.abs() + 1e-15);
            }
        }
    }

    #[test]
    fn rfg_subset_size_matches_monte_carlo_oracle() {
        // E[min(floor(2.5 + Exp(mean 2)), p)] with p = 100 (cap inactive)
        let draws = 10_000;
        let mut sizes = Vec::with_capacity(draws * RFG_NUM_TERMS);
        for s in 0..draws / 100 {
            let spec = rfg_draw(100, s as u64);
            for term in spec.terms() {
                sizes.push(term.vars.len() as f64);
            }
        }
        let mean = pairwise_sum(&sizes) / sizes.len() as f64;

        // independent oracle with its own RNG
        let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
        let exp = Exp::new(0.5).unwrap();
        let oracle: Vec<f64> = (0..200_000)
            .map(|_| (2.5 + rng.sample::<f64, _>(exp)).floor().min(100.0))
            .collect();
        let oracle_mean = pairwise_sum(&oracle) / oracle.len() as f64;
        let oracle_var = oracle
            .iter()
            .map(|v| (v - oracle_mean) * (v - oracle_mean))
            .sum::<f64>()
            / oracle.len() as f64;
        let se = (oracle_var / sizes.len() as f64).sqrt();
        assert!(
            (mean - oracle_mean).abs() <= 3.0 * se,
            "mean {mean} vs oracle {oracle_mean} (3se = {})",
            3.0 * se
        );
    }

    #[test]
    fn zif_tweedie_q_zero_is_all_zeros() {
        let f = vec![0.3; 500];
        let y = sample_zif_tweedie(&f, 1.0, 1.5, 0.0, &vec![1.0; 500], 5);
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zif_tweedie_moments_match_closed_forms() {
        let n = 100_000;
        let f = vec![0.4; n];
        let (phi, rho, q) = (1.0, 1.5, 0.7);
        let y = sample_zif_tweedie(&f, phi, rho, q, &vec![1.0; n], 11);

        let mu = 0.4f64.exp();
        let p0_tw = (-(mu.powf(0.5) / (phi * 0.5))).exp();
        let p_zero = (1.0 - q) + q * p0_tw;
        let zero_frac = y.iter().filter(|&&v| v == 0.0).count() as f64 / n as f64;
        let se_zero = (p_zero * (1.0 - p_zero) / n as f64).sqrt();
        assert!(
            (zero_frac - p_zero).abs() <= 3.0 * se_zero,
            "zero fraction {zero_frac} vs {p_zero}"
        );

        let mean = pairwise_sum(&y) / n as f64;
        let expect = q * mu;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let se_mean = (var / n as f64).sqrt();
        assert!(
            (mean - expect).abs() <= 4.0 * se_mean,
            "mean {mean} vs {expect}"
        );
    }

    #[test]
    fn zif_tweedie_method_of_moments_phi() {
        let n = 100_000;
        let f = vec![0.0; n];
        let (phi, rho) = (1.3, 1.5);
        let y = sample_zif_tweedie(&f, phi, rho, 1.0, &vec![1.0; n], 23);
        let mean = pairwise_sum(&y) / n as f64;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        let phi_hat = var / mean.powf(rho);
        assert!(
            (phi_hat - phi).abs() / phi < 0.3,
            "method of moments phi {phi_hat} vs {phi}"
        );
    }

    #[test]
    fn zif_tobit_mostly_zero_when_latent_mean_is_low() {
        let f = vec![-6.0; 2000];
        let y = sample_zif_tobit(&f, 1.0, 3);
        let zero_frac = y.iter().filter(|&&v| v == 0.0).count() as f64 / 2000.0;
        assert!(zero_frac > 0.999);
    }

    #[test]
    fn zif_tobit_mean_matches_expectation_formula() {
        let n = 100_000;
        for &(fv, q) in &[(0.0, 1.0), (0.8, 0.5), (-0.4, 0.75)] {
            let f = vec![fv; n];
            let y = sample_zif_tobit(&f, q, 31);
            let mean = pairwise_sum(&y) / n as f64;
            let expect = q * tobit_expectation(fv);
            let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let se = (var / n as f64).sqrt();
            assert!(
                (mean - expect).abs() <= 4.0 * se,
                "f={fv} q={q}: mean {mean} vs {expect}"
            );
        }
        // f = 0, q = 1: the mean is 1/sqrt(2 pi)
        let y = sample_zif_tobit(&vec![0.0; n], 1.0, 37);
        let mean = pairwise_sum(&y) / n as f64;
        assert!((mean - 0.39894).abs() < 0.01);
    }

    #[test]
    fn tobit_expectation_reference_values() {
        assert!((tobit_expectation(0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!((tobit_expectation(1.0) - 1.08332).abs() < 1e-5);
        assert!((tobit_expectation(40.0) - 40.0).abs() < 1e-9);
        assert!(tobit_expectation(-40.0).abs() < 1e-12);
    }

    #[test]
    fn tobit_expectation_monotone_and_convex() {
        let h = 1e-3;
        let mut prev = tobit_expectation(-8.0);
        let mut grid = -8.0 + h;
        while grid < 8.0 {
            let cur = tobit_expectation(grid);
            assert!(cur >= prev - 1e-12);
            let second = tobit_expectation(grid + h) - 2.0 * cur + tobit_expectation(grid - h);
            assert!(second >= -1e-9, "concave kink at {grid}");
            prev = cur;
            grid += h;
        }
    }

    #[test]
    fn generators_are_reproducible() {
        let a = generate_case1_1(100, 1.0, 1.5, 0.5, 42);
        let b = generate_case1_1(100, 1.0, 1.5, 0.5, 42);
        assert_eq!(a, b);
        let c = generate_case1_1(100, 1.0, 1.5, 0.5, 43);
        assert_ne!(a, c);

        let spec = rfg_draw(8, 5);
        let d = generate_case1_2(50, 8, 1.0, 1.5, 0.75, &spec, 9);
        let e = generate_case1_2(50, 8, 1.0, 1.5, 0.75, &spec, 9);
        assert_eq!(d, e);
    }

    #[test]
    fn observation_streams_are_independent_of_batch_size() {
        // the sampler for observation i depends only on (seed, i)
        let f = vec![0.2; 60];
        let full = sample_zif_tweedie(&f, 1.0, 1.5, 0.6, &vec![1.0; 60], 77);
        let tail = sample_zif_tweedie(&f[40..], 1.0, 1.5, 0.6, &vec![1.0; 20], 77);
        // first 20 entries of `tail` use streams 0..20, matching full[0..20]
        assert_eq!(&full[..20], &tail[..]);
    }

    #[test]
    fn resample_identity_is_a_permutation() {
        let p = generate_case1_1(200, 1.0, 1.5, 0.5, 8);
        let r = resample_portfolio(&p, 1.0, 1.0, 3).unwrap();
        assert_eq!(r.len(), p.len());
        let mut a = p.y().to_vec();
        let mut b = r.y().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
    }

    #[test]
    fn resample_zero_fractions_match_reported_values() {
        // synthetic base with exactly 61.1% zeros
        let n = 10_000;
        let n_zero = 6110;
        let y: Vec<f64> = (0..n).map(|i| if i < n_zero { 0.0 } else { 1.0 + (i % 7) as f64 }).collect();
        let x = Matrix::from_columns(vec![(0..n).map(|i| i as f64 / n as f64).collect()]).unwrap();
        let base = Portfolio::new(y, x, vec![1.0; n], None).unwrap();

        let r = resample_portfolio(&base, 0.15, 1.0, 4).unwrap();
        let frac = r.n_zero() as f64 / r.len() as f64;
        assert!((frac - 0.9128).abs() < 0.005, "zero fraction {frac}");

        let r2 = resample_portfolio(&base, 0.2, 3.0, 4).unwrap();
        let frac2 = r2.n_zero() as f64 / r2.len() as f64;
        assert!((frac2 - 0.959).abs() < 0.005, "zero fraction {frac2}");
    }

    #[test]
    fn resample_requires_both_classes() {
        let x = Matrix::from_columns(vec![vec![0.0, 1.0]]).unwrap();
        let all_zero = Portfolio::new(vec![0.0, 0.0], x.clone(), vec![1.0; 2], None).unwrap();
        assert!(resample_portfolio(&all_zero, 0.5, 1.0, 1).is_err());
        let all_pos = Portfolio::new(vec![1.0, 2.0], x, vec![1.0; 2], None).unwrap();
        assert!(resample_portfolio(&all_pos, 0.5, 1.0, 1).is_err());
    }
}
