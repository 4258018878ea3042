//! Exact dyadic rationals `m / 2^e`.
//!
//! Every vertex label `r`, every event probability and every L1 distance in
//! this crate is a dyadic rational, so the type is kept small and `Copy`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dyadic rational in canonical form: the numerator is odd, or the value is
/// zero and stored as `0 / 2^0`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDyadic", into = "RawDyadic")]
pub struct Dyadic {
    num: i128,
    exp: u32,
}

#[derive(Serialize, Deserialize)]
struct RawDyadic {
    num: i128,
    exp: u32,
}

impl TryFrom<RawDyadic> for Dyadic {
    type Error = Error;

    fn try_from(raw: RawDyadic) -> Result<Self> {
        if raw.exp > 120 {
            return Err(Error::InvalidParameter(format!(
                "dyadic exponent {} out of range",
                raw.exp
            )));
        }
        Ok(Dyadic::new(raw.num, raw.exp))
    }
}

impl From<Dyadic> for RawDyadic {
    fn from(d: Dyadic) -> Self {
        RawDyadic {
            num: d.num,
            exp: d.exp,
        }
    }
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };
    pub const HALF: Dyadic = Dyadic { num: 1, exp: 1 };

    /// Builds `num / 2^exp` and reduces it.
    pub fn new(num: i128, exp: u32) -> Self {
        if num == 0 {
            return Dyadic::ZERO;
        }
        let shift = num.trailing_zeros().min(exp);
        Dyadic {
            num: num >> shift,
            exp: exp - shift,
        }
    }

    pub fn from_int(n: i128) -> Self {
        Dyadic::new(n, 0)
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn abs(self) -> Self {
        Dyadic {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    /// `self * 2^n` for any signed shift.
    pub fn times_pow2(self, n: i32) -> Self {
        if n >= 0 {
            let exp = self.exp as i64 - n as i64;
            if exp >= 0 {
                Dyadic::new(self.num, exp as u32)
            } else {
                Dyadic::new(self.num << (-exp) as u32, 0)
            }
        } else {
            Dyadic::new(self.num, self.exp + (-n) as u32)
        }
    }

    /// `2 * self`.
    pub fn double(self) -> Self {
        self.times_pow2(1)
    }

    /// `self / 2`.
    pub fn halve(self) -> Self {
        self.times_pow2(-1)
    }

    /// Numerator over the common denominator `2^exp`, when the value is a
    /// multiple of `2^-exp`.
    pub fn scaled_numerator(&self, exp: u32) -> Option<i128> {
        if self.exp > exp {
            None
        } else {
            Some(self.num << (exp - self.exp))
        }
    }

    /// Integer value, if the value is an integer.
    pub fn to_integer(&self) -> Option<i128> {
        (self.exp == 0).then_some(self.num)
    }

    /// Membership in `B_k`: for `k = 0` the set `{0, 1}`, otherwise the odd
    /// multiples of `2^-k` in `(0, 1)`.
    pub fn in_level(&self, k: u32) -> bool {
        if k == 0 {
            *self == Dyadic::ZERO || *self == Dyadic::ONE
        } else {
            self.exp == k && self.num > 0 && self.num < (1i128 << k)
        }
    }

    /// Binary digits `sigma_1 .. sigma_n` of a value in `[0, 1)` that is a
    /// multiple of `2^-n` (`sigma_1` is the most significant).
    pub fn binary_digits(&self, n: u32) -> Option<Vec<bool>> {
        let scaled = self.scaled_numerator(n)?;
        if scaled < 0 || scaled >= (1i128 << n) {
            return None;
        }
        Some((1..=n).map(|i| (scaled >> (n - i)) & 1 == 1).collect())
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(1) << self.exp)
    }

    /// Inverse of [`Dyadic::to_rational`]; `None` when the denominator is
    /// not a power of two or the numerator does not fit.
    pub fn from_rational(q: &BigRational) -> Option<Self> {
        let den = q.denom();
        let bits = den.bits();
        if bits == 0 || (den.clone() & (den.clone() - 1u32)) != BigInt::from(0) {
            return None;
        }
        let exp = (bits - 1) as u32;
        let num: i128 = q.numer().try_into().ok()?;
        Some(Dyadic::new(num, exp))
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::ZERO
    }
}

fn align(a: Dyadic, b: Dyadic) -> (i128, i128, u32) {
    let exp = a.exp.max(b.exp);
    (a.num << (exp - a.exp), b.num << (exp - b.exp), exp)
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let (a, b, e) = align(self, rhs);
        Dyadic::new(a + b, e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        let (a, b, e) = align(self, rhs);
        Dyadic::new(a - b, e)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        Dyadic::new(self.num * rhs.num, self.exp + rhs.exp)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::ZERO, |acc, x| acc + x)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = align(*self, *other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    /// CSV form `num/2^exp`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1i128 << self.exp)
        }
    }
}

impl std::str::FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a dyadic rational: {s:?}"));
        let s = s.trim();
        match s.split_once('/') {
            None => s.parse::<i128>().map(Dyadic::from_int).map_err(|_| bad()),
            Some((num, den)) => {
                let num: i128 = num.trim().parse().map_err(|_| bad())?;
                let den = den.trim();
                if let Some(exp) = den.strip_prefix("2^") {
                    let exp: u32 = exp.parse().map_err(|_| bad())?;
                    if exp > 120 {
                        return Err(bad());
                    }
                    Ok(Dyadic::new(num, exp))
                } else {
                    let den: i128 = den.parse().map_err(|_| bad())?;
                    if den <= 0 || den.count_ones() != 1 {
                        return Err(bad());
                    }
                    Ok(Dyadic::new(num, den.trailing_zeros()))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form() {
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(0, 7), Dyadic::ZERO);
        assert_eq!(Dyadic::new(6, 0).numerator(), 6);
        assert_eq!(Dyadic::new(2, 1), Dyadic::ONE);
    }

    #[test]
    fn level_membership() {
        assert!(Dyadic::new(3, 2).in_level(2));
        assert!(!Dyadic::new(1, 1).in_level(2));
        assert!(Dyadic::ZERO.in_level(0));
        assert!(Dyadic::ONE.in_level(0));
        assert!(!Dyadic::HALF.in_level(0));
        assert!(!Dyadic::ONE.in_level(1));
        assert!(Dyadic::HALF.in_level(1));
    }

    #[test]
    fn digits() {
        // 5/8 = .101
        assert_eq!(
            Dyadic::new(5, 3).binary_digits(3),
            Some(vec![true, false, true])
        );
        assert_eq!(
            Dyadic::new(1, 1).binary_digits(3),
            Some(vec![true, false, false])
        );
        assert_eq!(Dyadic::new(1, 4).binary_digits(3), None);
    }

    #[test]
    fn parse_and_display() {
        let d: Dyadic = "3/2^2".parse().unwrap();
        assert_eq!(d, Dyadic::new(3, 2));
        assert_eq!(d.to_string(), "3/2^2");
        assert_eq!("3/4".parse::<Dyadic>().unwrap(), d);
        assert!("1/3".parse::<Dyadic>().is_err());
        assert_eq!("-5".parse::<Dyadic>().unwrap(), Dyadic::from_int(-5));
    }

    #[test]
    fn json_round_trip_reduces() {
        let d: Dyadic = serde_json::from_str(r#"{"num": 6, "exp": 3}"#).unwrap();
        assert_eq!(d, Dyadic::new(3, 2));
        assert_eq!(serde_json::to_string(&d).unwrap(), r#"{"num":3,"exp":2}"#);
    }

    proptest! {
        #[test]
        fn arithmetic_matches_rationals(a in -1000i128..1000, ea in 0u32..12, b in -1000i128..1000, eb in 0u32..12) {
            let x = Dyadic::new(a, ea);
            let y = Dyadic::new(b, eb);
            prop_assert_eq!((x + y).to_rational(), x.to_rational() + y.to_rational());
            prop_assert_eq!((x - y).to_rational(), x.to_rational() - y.to_rational());
            prop_assert_eq!((x * y).to_rational(), x.to_rational() * y.to_rational());
            prop_assert_eq!(x.cmp(&y), x.to_rational().cmp(&y.to_rational()));
            prop_assert_eq!(Dyadic::from_rational(&x.to_rational()), Some(x));
        }
    }
}
