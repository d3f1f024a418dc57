//! Numeric scalar used for linkage heights, cut thresholds and vote scores.
//!
//! Everything counted (leaf indices, pair disagreements, votes) is an
//! integer; only averages and half-point scores need a field. Those are
//! generic so callers can pick `f64` or an exact rational.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::Num;

pub trait Scalar: Num + Copy + PartialOrd + Debug + Display + Send + Sync + 'static {
    fn from_count(count: u128) -> Self;

    fn to_f64(self) -> f64;

    fn ratio(numerator: u128, denominator: u128) -> Self {
        Self::from_count(numerator) / Self::from_count(denominator)
    }
}

impl Scalar for f64 {
    fn from_count(count: u128) -> Self {
        count as f64
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_count(count: u128) -> Self {
        count as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for Ratio<i64> {
    /// Panics if `count` exceeds `i64::MAX`.
    fn from_count(count: u128) -> Self {
        Ratio::from_integer(i64::try_from(count).expect("count fits in i64"))
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn ratio(numerator: u128, denominator: u128) -> Self {
        Ratio::new(
            i64::try_from(numerator).expect("count fits in i64"),
            i64::try_from(denominator).expect("count fits in i64"),
        )
    }
}

impl Scalar for Ratio<i128> {
    fn from_count(count: u128) -> Self {
        Ratio::from_integer(i128::try_from(count).expect("count fits in i128"))
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}
