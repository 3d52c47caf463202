//! Scalar abstraction: all geometry kernels are generic over the working
//! floating-point type.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Floating-point scalar usable throughout the library (f32 or f64).
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// Shorthand for lifting an `f64` literal into the working scalar type.
#[inline]
pub fn lit<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("literal not representable in scalar type")
}

/// Binomial coefficient C(n, k) as a scalar.
pub fn binomial<R: Real>(n: usize, k: usize) -> R {
    lit(binomial_u(n, k) as f64)
}

/// Binomial coefficient C(n, k) as an integer (0 when k > n).
pub fn binomial_u(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}
