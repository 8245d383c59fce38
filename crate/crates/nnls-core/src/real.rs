use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Scalar type the numerical core is written against: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Converts a count.
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Surface area of the unit sphere in R^n.
pub fn sphere_area<T: Real>(n: usize) -> T {
    // A(1) = 2, A(2) = 2π, A(n) = 2π/(n-2) A(n-2)
    let two_pi = T::lit(2.0) * T::PI();
    let mut a = if n % 2 == 1 { T::lit(2.0) } else { two_pi };
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    while k < n {
        k += 2;
        a = a * two_pi / T::of(k - 2);
    }
    a
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume<T: Real>(n: usize) -> T {
    sphere_area::<T>(n) / T::of(n)
}
