//! Integer views of a metric for hot loops.
//!
//! All distances are multiplied by the common denominator of the matrix so
//! that sums and ratio comparisons run on integers. Small matrices use `u64`
//! with `u128` cross products; anything larger falls back to `BigInt`.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Add;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::rational::{common_denominator, Rational};
use crate::MetricSpace;

/// Numerators above this use the `BigInt` path. Keeps path sums over up to
/// 2^20 edges below 2^61 and cross products below 2^128.
const SMALL_LIMIT: u64 = 1 << 40;

/// Nonnegative integer length in scaled units.
pub trait Length:
    Clone + Ord + Zero + Add<Output = Self> + for<'a> Add<&'a Self, Output = Self> + Send + Sync
{
    /// Compares `n1 / d1` with `n2 / d2`; denominators are positive.
    fn ratio_cmp(n1: &Self, d1: &Self, n2: &Self, d2: &Self) -> Ordering;
    fn to_bigint(&self) -> BigInt;
}

impl Length for u64 {
    fn ratio_cmp(n1: &Self, d1: &Self, n2: &Self, d2: &Self) -> Ordering {
        (u128::from(*n1) * u128::from(*d2)).cmp(&(u128::from(*n2) * u128::from(*d1)))
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Length for BigInt {
    fn ratio_cmp(n1: &Self, d1: &Self, n2: &Self, d2: &Self) -> Ordering {
        (n1 * d2).cmp(&(n2 * d1))
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

/// `d(i, j) = nums[i * n + j] / scale`.
#[derive(Clone, Debug)]
pub struct ScaledMetric<L> {
    n: usize,
    nums: Vec<L>,
    scale: BigInt,
}

impl<L: Length> ScaledMetric<L> {
    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> &L {
        &self.nums[i * self.n + j]
    }

    pub fn to_rational(&self, v: &L) -> Rational {
        Rational::new(v.to_bigint(), self.scale.clone())
    }

    /// `num / den` for two scaled lengths (the scale cancels).
    pub fn ratio(num: &L, den: &L) -> Rational {
        Rational::new(num.to_bigint(), den.to_bigint())
    }
}

/// Integer view of a metric, small or big.
#[derive(Clone, Debug)]
pub enum Scaled {
    Small(ScaledMetric<u64>),
    Big(ScaledMetric<BigInt>),
}

impl MetricSpace {
    /// Integer view of the distance matrix.
    pub fn scaled(&self) -> Scaled {
        let n = self.len();
        let scale = common_denominator(self.raw_matrix());
        let big: Vec<BigInt> = self
            .raw_matrix()
            .iter()
            .map(|d| d.numer() * (&scale / d.denom()))
            .collect();
        let small: Option<Vec<u64>> = big
            .iter()
            .map(|v| v.to_u64().filter(|&x| x <= SMALL_LIMIT))
            .collect();
        match small {
            Some(nums) => Scaled::Small(ScaledMetric { n, nums, scale }),
            None => Scaled::Big(ScaledMetric {
                n,
                nums: big,
                scale,
            }),
        }
    }
}

/// Runs `$body` with `$m` bound to the concrete scaled metric.
#[macro_export]
#[doc(hidden)]
macro_rules! with_scaled {
    ($scaled:expr, $m:ident => $body:expr) => {
        match $scaled {
            $crate::scaled::Scaled::Small(ref $m) => $body,
            $crate::scaled::Scaled::Big(ref $m) => $body,
        }
    };
}
