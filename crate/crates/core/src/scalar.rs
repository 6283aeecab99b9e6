//! Floating-point abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar used throughout the crate: `f32` or `f64`.
///
/// The dynamics need `sqrt` and `exp`, so only floating types qualify.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn cast(v: f64) -> Self;

    /// Converts a count.
    fn of_usize(n: usize) -> Self {
        Self::cast(n as f64)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A residual tolerance the type can actually reach on unit-scale problems.
    fn default_tolerance() -> Self {
        let floor = Self::epsilon() * Self::cast(1e3);
        Self::cast(1e-10).max(floor)
    }
}

impl Scalar for f32 {
    fn cast(v: f64) -> Self {
        v as f32
    }
}

impl Scalar for f64 {
    fn cast(v: f64) -> Self {
        v
    }
}

/// Sum that returns zero for an empty slice.
pub fn total<T: Scalar>(values: &[T]) -> T {
    values.iter().copied().sum()
}

/// Largest absolute entry (zero for an empty slice).
pub fn max_abs<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_is_reachable_for_single_precision() {
        assert_eq!(<f64 as Scalar>::default_tolerance(), 1e-10);
        assert!(<f32 as Scalar>::default_tolerance() > 1e-5);
    }

    #[test]
    fn helpers_on_empty_input() {
        let empty: [f64; 0] = [];
        assert_eq!(total(&empty), 0.0);
        assert_eq!(max_abs(&empty), 0.0);
        assert_eq!(norm2(&[3.0_f64, 4.0]), 5.0);
    }
}
