//! Scalar abstraction for density parameters and tolerances.
//!
//! Counting is always exact; only the thresholds a count is compared
//! against (`d·total`, `η·n³`, `ε·M^k`, ...) go through a [`Scalar`].
//! Floating-point scalars give the usual fast path, rationals make every
//! threshold comparison exact.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar: Num + Clone + PartialOrd + FromPrimitive + Debug + Display {
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar")
    }

    /// Smallest integer `>= self`, or `None` when negative or out of range.
    fn ceil_u64(&self) -> Option<u64>;

    fn to_f64(&self) -> f64;

    /// Exact value as an arbitrary-precision rational (`None` for NaN/inf).
    fn to_exact(&self) -> Option<BigRational>;

    fn from_ratio(r: Ratio<u64>) -> Self {
        Self::from_count(*r.numer()) / Self::from_count(*r.denom())
    }

    fn is_unit_interval(&self) -> bool {
        *self >= Self::zero() && *self <= Self::one()
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn ceil_u64(&self) -> Option<u64> {
                let c = self.ceil();
                if c.is_finite() && c >= 0.0 && (c as f64) <= u64::MAX as f64 {
                    Some(c as u64)
                } else {
                    None
                }
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            /// The shortest decimal that reads back as this float, so `0.3`
            /// means `3/10` rather than its binary approximation.
            fn to_exact(&self) -> Option<BigRational> {
                if self.is_finite() {
                    parse_rational(&self.to_string())
                } else {
                    None
                }
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for Ratio<i64> {
    fn ceil_u64(&self) -> Option<u64> {
        let c = self.ceil();
        if c.is_negative() {
            None
        } else {
            c.to_integer().to_u64()
        }
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_exact(&self) -> Option<BigRational> {
        Some(BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom())))
    }
}

impl Scalar for BigRational {
    fn ceil_u64(&self) -> Option<u64> {
        let c = self.ceil();
        if c.is_negative() {
            None
        } else {
            c.to_integer().to_u64()
        }
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_exact(&self) -> Option<BigRational> {
        Some(self.clone())
    }
}

/// `count < s * total`, evaluated in the scalar type.
pub(crate) fn below<S: Scalar>(count: u64, s: &S, total: u64) -> bool {
    S::from_count(count) < s.clone() * S::from_count(total)
}

/// `count <= s * total`.
pub(crate) fn at_most<S: Scalar>(count: u64, s: &S, total: u64) -> bool {
    S::from_count(count) <= s.clone() * S::from_count(total)
}

/// Parse a decimal (`0.25`) or fraction (`1/4`) literal into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// `count >= base^exponent * total` for `0 < base <= 1`, with the power
/// given as an arbitrary-precision exponent.
///
/// Exact when the exponent is small; otherwise compared in log space,
/// where the power underflows far below any nonzero ratio of counts.
pub(crate) fn meets_power_bound(
    count: usize,
    total: usize,
    base: &BigRational,
    exponent: &num_bigint::BigUint,
) -> bool {
    if total == 0 {
        return true;
    }
    if count >= total {
        return true;
    }
    if base.is_one() || exponent.is_zero() {
        return count >= total;
    }
    if count == 0 {
        return base.is_zero();
    }
    if let Some(e) = exponent.to_usize().filter(|&e| e <= 4096) {
        let bound = num_traits::pow(base.clone(), e) * BigRational::from_integer(BigInt::from(total));
        return BigRational::from_integer(BigInt::from(count)) >= bound;
    }
    // exponent > 4096 and base <= 1/2 in every use; the bound is below 2^-4096.
    let lhs = (count as f64 / total as f64).log2();
    let rhs = ToPrimitive::to_f64(base).unwrap_or(0.0).log2() * ToPrimitive::to_f64(exponent).unwrap_or(f64::INFINITY);
    lhs >= rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_decimal_and_fraction() {
        assert_eq!(parse_rational("0.5"), Some(BigRational::new(1.into(), 2.into())));
        assert_eq!(parse_rational("3/9"), Some(BigRational::new(1.into(), 3.into())));
        assert_eq!(parse_rational("2"), Some(BigRational::from_integer(2.into())));
        assert_eq!(parse_rational(".25"), Some(BigRational::new(1.into(), 4.into())));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn floats_read_as_their_decimal() {
        assert_eq!(0.3f64.to_exact(), parse_rational("3/10"));
        assert_eq!(0.1f32.to_exact(), parse_rational("1/10"));
        assert_eq!(1e-20f64.to_exact(), parse_rational("1/100000000000000000000"));
        assert_eq!(f64::NAN.to_exact(), None);
    }

    #[test]
    fn ceil_per_scalar() {
        assert_eq!(Scalar::ceil_u64(&2.1f64), Some(3));
        assert_eq!(Scalar::ceil_u64(&Ratio::<i64>::new(9, 3)), Some(3));
        assert_eq!(Scalar::ceil_u64(&Ratio::<i64>::new(-1, 3)), Some(0));
        assert_eq!(Scalar::ceil_u64(&-1.5f64), None);
    }

    #[test]
    fn power_bound() {
        let quarter = BigRational::new(1.into(), 4.into());
        let one = num_bigint::BigUint::from(1u32);
        assert!(meets_power_bound(25, 100, &quarter, &one));
        assert!(!meets_power_bound(24, 100, &quarter, &one));
        assert!(meets_power_bound(0, 0, &quarter, &one));
        let huge = num_bigint::BigUint::from(1u64 << 40);
        assert!(meets_power_bound(1, 1000, &quarter, &huge));
        assert!(!meets_power_bound(0, 1000, &quarter, &huge));
    }
}
