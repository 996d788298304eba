//! Floating-point scalar abstraction shared by the graph, clustering and
//! classifier code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used for "strictly better" comparisons in greedy optimizers.
    #[inline]
    fn improvement_tol() -> Self {
        Self::epsilon().sqrt() * Self::lit(1e-3)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `x log2 x` with the `0 log 0 = 0` convention.
#[inline]
pub fn plogp<F: Scalar>(x: F) -> F {
    if x > F::zero() {
        x * x.log2()
    } else {
        F::zero()
    }
}
