//! The numeric contract shared by every computation in the crate.
//!
//! Interval arithmetic, CROWN, the mixed-Jacobian bounds and the embedding
//! systems are all written once against [`Scalar`]. Running them with `f64`
//! gives plain certificates; running them with [`crate::autodiff::Tracked`]
//! records a tape that can be differentiated with respect to network weights
//! and the lifting parameter.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
{
    fn from_f64(v: f64) -> Self;

    /// Forward value. Branch decisions (comparisons, ReLU phase) are made on
    /// this and never differentiated.
    fn value(self) -> f64;

    fn relu(self) -> Self;
    fn tanh(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn abs(self) -> Self;

    #[inline]
    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    #[inline]
    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// Minimum; on an exact tie the first argument is returned.
    #[inline]
    fn min(self, other: Self) -> Self {
        if self.value() <= other.value() {
            self
        } else {
            other
        }
    }

    /// Maximum; on an exact tie the first argument is returned.
    #[inline]
    fn max(self, other: Self) -> Self {
        if self.value() >= other.value() {
            self
        } else {
            other
        }
    }

    /// Positive part `max(x, 0)` without creating a new tape node for zero.
    #[inline]
    fn pos(self) -> Self {
        self.relu()
    }

    /// Negative part `x - max(x, 0)`.
    #[inline]
    fn neg_part(self) -> Self {
        if self.value() < 0.0 {
            self
        } else {
            Self::zero()
        }
    }

    #[inline]
    fn powi2(self) -> Self {
        self * self
    }

    #[inline]
    fn scale(self, c: f64) -> Self {
        self * Self::from_f64(c)
    }

    /// True when the value is a zero that carries no derivative information,
    /// so products with it may be skipped.
    fn is_structural_zero(self) -> bool;

    #[inline]
    fn is_finite(self) -> bool {
        self.value().is_finite()
    }

    /// Inner product; tracked scalars may override this with a fused node.
    #[inline]
    fn dot(a: &[Self], b: &[Self]) -> Self {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = Self::zero();
        for (&x, &y) in a.iter().zip(b) {
            acc += x * y;
        }
        acc
    }
}

impl Scalar for f64 {
    #[inline]
    fn is_structural_zero(self) -> bool {
        self == 0.0
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline]
    fn value(self) -> f64 {
        self
    }

    #[inline]
    fn relu(self) -> Self {
        if self > 0.0 {
            self
        } else {
            0.0
        }
    }

    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }

    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }

    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
}
