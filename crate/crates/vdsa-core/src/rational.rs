//! Exact rational values for CBR estimates.
//!
//! Estimates are ratios of integer counts. Deciding whether two estimates
//! from different channels are equal (e.g. 2/4 vs 3/6) must be exact,
//! because the probability of a tie between channel minima is a separate
//! term in the selection bounds. Comparisons therefore use integer
//! cross-multiplication, never floating point.

use std::cmp::Ordering;
use std::fmt;

/// A non-negative fraction `num / den` with `den >= 1`, compared exactly.
#[derive(Debug, Clone, Copy)]
pub struct Frac {
    num: u64,
    den: u64,
}

impl Frac {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "denominator must be positive");
        Frac { num, den }
    }

    /// The neutral sentinel 1/2 assigned to channels that were never sampled.
    pub fn unobserved_sentinel() -> Self {
        Frac { num: 1, den: 2 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Frac {
    fn eq(&self, other: &Self) -> bool {
        (self.num as u128) * (other.den as u128) == (other.num as u128) * (self.den as u128)
    }
}

impl Eq for Frac {}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> Ordering {
        ((self.num as u128) * (other.den as u128)).cmp(&((other.num as u128) * (self.den as u128)))
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_multiplication_equality() {
        assert_eq!(Frac::new(1, 2), Frac::new(2, 4));
        assert_eq!(Frac::new(0, 1), Frac::new(0, 7));
        assert_ne!(Frac::new(1, 3), Frac::new(2, 5));
    }

    #[test]
    fn ordering_is_exact_for_large_counts() {
        // 1e9/3e9 vs (1e9+1)/3e9: indistinguishable as f32, distinct exactly.
        let a = Frac::new(1_000_000_000, 3_000_000_000);
        let b = Frac::new(1_000_000_001, 3_000_000_000);
        assert!(a < b);
    }

    #[test]
    fn sentinel_is_one_half() {
        assert_eq!(Frac::unobserved_sentinel(), Frac::new(2, 4));
    }
}
