//! Scalar abstraction used by the continuous-system code paths.
//!
//! Everything geometric (interval, circle and torus coordinates, distances,
//! growth estimates) is generic over a floating-point scalar so the same code
//! runs in `f32` and `f64`.  Exact integer / rational arithmetic lives in the
//! [`crate::toeplitz`] module and is deliberately not abstracted.

use std::fmt;

use num_traits::{Float, FromPrimitive};

pub trait Scalar:
    Float + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    fn from_f64_exact(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 constant must convert")
    }

    fn from_usize_exact(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize must convert")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }

    /// 2^e with an exact floating-point representation.
    fn exp2i(e: i32) -> Self {
        let two = Self::one() + Self::one();
        two.powi(e)
    }

    fn half() -> Self {
        Self::from_f64_exact(0.5)
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

/// Reduce a value to the fundamental domain [0, 1) of the circle.
pub fn mod_one<T: Scalar>(v: T) -> T {
    let f = v - v.floor();
    // Rounding can push `v - floor(v)` to exactly 1.0 for tiny negatives.
    if f >= T::one() {
        T::zero()
    } else {
        f
    }
}

/// Distance on the circle R/Z between two reduced coordinates.
pub fn circle_distance<T: Scalar>(a: T, b: T) -> T {
    let r = (a - b).abs();
    let r = r - r.floor();
    r.min(T::one() - r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod_one_reduces_into_unit_interval() {
        assert_eq!(mod_one(1.25_f64), 0.25);
        assert_eq!(mod_one(-0.25_f64), 0.75);
        assert_eq!(mod_one(1.0_f64), 0.0);
        assert_eq!(mod_one(0.0_f64), 0.0);
        let tiny = -1e-18_f64;
        let r = mod_one(tiny);
        assert!((0.0..1.0).contains(&r));
    }

    #[test]
    fn circle_distance_wraps() {
        assert_eq!(circle_distance(0.125_f64, 0.875), 0.25);
        assert!((circle_distance(0.1_f64, 0.9) - 0.2).abs() < 1e-15);
        assert_eq!(circle_distance(0.0_f64, 0.5), 0.5);
        assert_eq!(circle_distance(0.25_f32, 0.25), 0.0);
    }

    #[test]
    fn exp2i_is_exact() {
        assert_eq!(<f64 as Scalar>::exp2i(-13), 2.0_f64.powi(-13));
        assert_eq!(<f32 as Scalar>::exp2i(3), 8.0_f32);
    }
}
