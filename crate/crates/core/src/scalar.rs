//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the library: `f32` or `f64`.
///
/// Tolerances quoted in the documentation are for `f64`; routines clamp them
/// from below by a small multiple of the type's epsilon so that `f32` runs
/// terminate with the best accuracy the type allows.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + LowerExp + Default + Send + Sync + rustfft::FftNum + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `tol` clamped to what the type can resolve.
    #[inline]
    fn tolerance(tol: f64) -> Self {
        let floor = 64.0 * Self::epsilon().to_f64_lossy();
        Self::lit(tol.max(floor))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier-compensated sum in iteration order.
///
/// The result depends only on the multiset of inputs up to the final rounding,
/// which keeps rearranged sums within one ulp of each other.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(items: I) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for x in items {
        if x.is_infinite() || sum.is_infinite() {
            sum = sum + x;
            continue;
        }
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry = carry + ((sum - t) + x);
        } else {
            carry = carry + ((x - t) + sum);
        }
        sum = t;
    }
    if sum.is_infinite() || sum.is_nan() {
        sum
    } else {
        sum + carry
    }
}

/// `a.powf(b)` with the measure-theoretic convention `0^b = 0` for `b > 0`.
#[inline]
pub(crate) fn pow<T: Real>(a: T, b: T) -> T {
    if a == T::zero() {
        if b > T::zero() {
            T::zero()
        } else {
            T::one()
        }
    } else {
        a.powf(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs.iter().copied()), 2.0);
    }

    #[test]
    fn compensated_sum_propagates_infinity() {
        let xs = [1.0, f64::INFINITY, 2.0];
        assert_eq!(compensated_sum(xs.iter().copied()), f64::INFINITY);
    }

    #[test]
    fn tolerance_is_clamped_for_f32() {
        assert!(f32::tolerance(1e-12) > 1e-6);
        assert_eq!(f64::tolerance(1e-10), 1e-10);
    }
}
