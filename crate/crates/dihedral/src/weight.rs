//! Probability weights: exact rationals or plain floats.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::AddAssign;

/// Scalar field used for weights and for the small exact linear algebra in
/// the moment computations.
pub trait Weight:
    Num + Signed + Clone + PartialOrd + Debug + AddAssign + Send + Sync + 'static
{
    /// True when zero entries are worth skipping in inner loops.
    const SPARSE: bool;

    fn to_f64(&self) -> f64;
    fn from_ratio(r: &BigRational) -> Self;
    fn from_i64(v: i64) -> Self;

    /// Tolerance-aware zero test (exact for rationals).
    fn near_zero(&self, tol: f64) -> bool;
}

impl Weight for f64 {
    const SPARSE: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_ratio(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn near_zero(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

impl Weight for BigRational {
    const SPARSE: bool = true;

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn near_zero(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

/// Rational to float without overflowing on large numerators/denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() {
            return v;
        }
    }
    let (n, d) = (r.numer(), r.denom());
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = n >> shift;
    let d = d >> shift;
    n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}

/// Parse "p/q", "p" or a decimal string. Decimal strings are converted
/// exactly (so "0.125" is 1/8).
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().ok()?;
        let d: BigInt = b.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(n));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.')?;
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(digits, scale);
    Some(if neg { -r } else { r })
}

/// Exact rational for an f64 (every finite float is a dyadic rational).
pub fn f64_to_ratio(x: f64) -> Option<BigRational> {
    BigRational::from_f64(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(parse_ratio("3/8"), Some(q(3, 8)));
        assert_eq!(parse_ratio(" 1 "), Some(q(1, 1)));
        assert_eq!(parse_ratio("0.125"), Some(q(1, 8)));
        assert_eq!(parse_ratio("-.5"), Some(q(-1, 2)));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(parse_ratio("abc"), None);
    }

    #[test]
    fn huge_ratio_to_float() {
        let big = num_traits::pow(BigInt::from(3), 2000);
        let r = BigRational::new(big.clone(), big * BigInt::from(4));
        assert_eq!(ratio_to_f64(&r), 0.25);
    }
}
