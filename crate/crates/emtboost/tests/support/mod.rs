//! Test-only oracles: arbitrary-precision series summation and adaptive
//! quadrature. Nothing here touches the library's own evaluation path.

#![allow(dead_code)]

/// Arbitrary-precision direct summation of the Tweedie series normalizer.
pub mod hiprec {
    use astro_float::{BigFloat, Consts, RoundingMode};

    /// 640 bits of mantissa, about 190 decimal digits.
    const P: usize = 640;
    const RM: RoundingMode = RoundingMode::ToEven;
    /// Spouge parameter; the truncation error is far below the working
    /// precision we rely on (~60 digits verified against references).
    const SPOUGE_A: usize = 120;

    fn bf(x: f64) -> BigFloat {
        BigFloat::from_f64(x, P)
    }

    fn bfu(x: usize) -> BigFloat {
        BigFloat::from_u64(x as u64, P)
    }

    /// Gamma(x) for x > 0 by the Spouge series.
    fn gamma(x: &BigFloat, cc: &mut Consts) -> BigFloat {
        let z = x.sub(&bf(1.0), P, RM);
        let two_pi = cc.pi(P, RM).mul(&bf(2.0), P, RM);
        let mut sum = two_pi.sqrt(P, RM);
        let mut fact = bf(1.0);
        for k in 1..SPOUGE_A {
            if k > 1 {
                fact = fact.mul(&bfu(k - 1), P, RM);
            }
            let amk = bfu(SPOUGE_A - k);
            let powk = amk.powi(k, P, RM);
            let half = powk.div(&amk.sqrt(P, RM), P, RM);
            let eak = amk.exp(P, RM, cc);
            let mut ck = half.mul(&eak, P, RM).div(&fact, P, RM);
            if k % 2 == 0 {
                ck = ck.neg();
            }
            let denom = z.add(&bfu(k), P, RM);
            sum = sum.add(&ck.div(&denom, P, RM), P, RM);
        }
        let za = z.add(&bfu(SPOUGE_A), P, RM);
        let zh = z.add(&bf(0.5), P, RM);
        let pw = zh.mul(&za.ln(P, RM, cc), P, RM).exp(P, RM, cc);
        let emza = za.neg().exp(P, RM, cc);
        pw.mul(&emza, P, RM).mul(&sum, P, RM)
    }

    fn to_f64(x: &BigFloat) -> f64 {
        format!("{x}").parse::<f64>().expect("parsable big float")
    }

    /// `log a(z, phi, rho)` by direct summation of `terms` series terms in
    /// big-float arithmetic:
    /// `a = (1/z) sum_t z^(t a) / ((rho-1)^(t a) (2-rho)^t Gamma(t a) phi^(t(1+a)) t!)`.
    pub fn log_series_a_oracle(z: f64, phi: f64, rho: f64, terms: usize) -> f64 {
        let mut cc = Consts::new().expect("constants cache");
        let alpha = (2.0 - rho) / (rho - 1.0);
        let z_b = bf(z);
        let ln_z = z_b.ln(P, RM, &mut cc);
        let ln_rho_m1 = bf(rho - 1.0).ln(P, RM, &mut cc);
        let ln_two_m_rho = bf(2.0 - rho).ln(P, RM, &mut cc);
        let ln_phi = bf(phi).ln(P, RM, &mut cc);
        let alpha_b = bf(alpha);

        // per-index linear coefficient of ln W_t
        let l = alpha_b
            .mul(&ln_z.sub(&ln_rho_m1, P, RM), P, RM)
            .sub(&ln_two_m_rho, P, RM)
            .sub(&bf(1.0).add(&alpha_b, P, RM).mul(&ln_phi, P, RM), P, RM);

        let mut total = bf(0.0);
        let mut factorial = bf(1.0);
        for t in 1..=terms {
            factorial = factorial.mul(&bfu(t), P, RM);
            let t_b = bfu(t);
            let numer = t_b.mul(&l, P, RM).exp(P, RM, &mut cc);
            let g = gamma(&t_b.mul(&alpha_b, P, RM), &mut cc);
            let w = numer.div(&g, P, RM).div(&factorial, P, RM);
            total = total.add(&w, P, RM);
        }
        let log_a = total.ln(P, RM, &mut cc).sub(&ln_z, P, RM);
        to_f64(&log_a)
    }
}

/// Adaptive Simpson quadrature and the Tweedie normalization integral.
pub mod quad {
    use emtboost::tweedie;
    use emtboost::TweedieParams;

    fn simpson_recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
                + simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
        }
    }

    pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps: f64) -> f64 {
        let fa = f(a);
        let fb = f(b);
        let m = 0.5 * (a + b);
        let fm = f(m);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        simpson_recurse(&f, a, b, fa, fm, fb, whole, eps, 55)
    }

    /// Integral of the continuous density part over (0, upper).
    ///
    /// Near zero the density behaves like `y^(alpha-1)`; substituting
    /// `y = v^(1/alpha)` makes the integrand bounded there, so the region
    /// (0, y_split) is integrated in the substituted variable and the rest
    /// directly.
    pub fn continuous_mass(params: &TweedieParams, weight: f64, eps: f64) -> f64 {
        let mu = params.mu();
        let phi = params.phi();
        let rho = params.rho();
        let alpha = params.alpha();
        let upper = mu + 40.0 * (phi * mu.powf(rho)).sqrt() / weight.sqrt();
        let y_split = mu.min(1.0);

        let density = |y: f64| {
            tweedie::log_density(y, params, weight)
                .expect("valid density argument")
                .exp()
        };
        // substituted integrand, assembled in log space
        let sub = |v: f64| {
            let y = v.powf(1.0 / alpha);
            let ld = tweedie::log_density(y, params, weight).expect("valid density argument");
            (ld + (1.0 / alpha - 1.0) * v.ln() - alpha.ln()).exp()
        };
        let v_lo = 1e-300f64.max(1e-250f64.powf(alpha));
        let v_hi = y_split.powf(alpha);
        let head = adaptive_simpson(sub, v_lo, v_hi, eps);
        let tail = adaptive_simpson(density, y_split, upper, eps);
        head + tail
    }
}
