//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Display, LowerExp};

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Real floating-point type the channel, selection and metric code is
/// generic over. Implemented for `f32` and `f64`.
pub trait Real: Float + FloatConst + FftNum + Default + Display + LowerExp {
    /// Converts an `f64` literal or configuration value into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 value representable in scalar type")
    }

    /// Widens to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Pairwise (cascade) summation. The fixed recursion order makes the
/// result independent of how the terms were produced.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        return xs.iter().fold(T::zero(), |acc, &x| acc + x);
    }
    let (lo, hi) = xs.split_at(xs.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}
