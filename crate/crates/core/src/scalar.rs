use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Floating point scalar the model is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumCast
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from a literal.
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("literal representable in scalar type")
    }

    fn from_count(n: u32) -> Self {
        <Self as NumCast>::from(n).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Relative discrepancy with a unit floor: `|a - b| / max(|a|, |b|, 1)`.
pub fn floored_relative_error<T: Scalar>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs()).max(T::one());
    (a - b).abs() / scale
}

/// `ln(exp(a) + exp(b))` without overflow; `-inf` is the additive identity.
pub fn log_add_exp<T: Scalar>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Log-sum-exp over an iterator of log values.
pub fn log_sum_exp<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values
        .into_iter()
        .fold(T::neg_infinity(), |acc, v| log_add_exp(acc, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_exp_matches_direct_sum() {
        let a = 0.3f64.ln();
        let b = 0.9f64.ln();
        assert!((log_add_exp(a, b).exp() - 1.2).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, b), b);
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
    }

    #[test]
    fn floored_error_uses_unit_floor() {
        assert_eq!(floored_relative_error(1.0f64, 2.0), 0.5);
        assert_eq!(floored_relative_error(1e-3f64, 2e-3), 1e-3);
        assert_eq!(floored_relative_error(0.0f32, 0.0), 0.0);
    }
}
