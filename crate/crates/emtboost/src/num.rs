//! Scalar abstraction and deterministic summation helpers.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar accepted by the numeric kernels.
///
/// Implemented for `f32` and `f64`. The associated constant pins the
/// precision-dependent truncation rule used by the Tweedie series.
pub trait Real: Float + FromPrimitive + std::fmt::Debug + std::fmt::Display + 'static {
    /// Series terms more than this many nats below the peak term are dropped.
    const SERIES_TAIL_NATS: Self;

    /// Natural log of the Gamma function.
    fn ln_gamma(self) -> Self;

    /// Lossy conversion of an `f64` constant.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant conversion")
    }
}

impl Real for f64 {
    const SERIES_TAIL_NATS: Self = 37.0;

    fn ln_gamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self)
    }
}

impl Real for f32 {
    const SERIES_TAIL_NATS: Self = 18.0;

    fn ln_gamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self as f64) as f32
    }
}

/// Pairwise summation with a fixed association order.
///
/// The reduction tree depends only on the slice length, so results are
/// identical across runs and thread counts.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= 32 {
        let mut acc = T::zero();
        for &x in xs {
            acc = acc + x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_sum_exp2<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
