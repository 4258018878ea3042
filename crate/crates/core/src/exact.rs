//! Helpers for exact rationals: conversions, integer powers and the JSON
//! form `{"num", "exp"}` (value `num / 2^exp`) or `{"num", "den"}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dyadic::Dyadic;

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn pow(x: &BigRational, e: u32) -> BigRational {
    num_traits::pow(x.clone(), e as usize)
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // ratios of huge integers: scale both down first
        let shift = x.numer().bits().max(x.denom().bits()).saturating_sub(1000);
        let n = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (x.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact binary value of a finite float.
pub fn from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// `x^(1/e)` in floating point.
pub fn root(x: &BigRational, e: u32) -> f64 {
    let v = to_f64(x);
    if e == 1 {
        v
    } else {
        v.powf(1.0 / e as f64)
    }
}

/// Parses `"a/b"`, `"a/2^e"` or an integer.
pub fn parse(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Ok(d) = s.parse::<Dyadic>() {
        return Some(d.to_rational());
    }
    let (n, d) = s.split_once('/')?;
    let n: BigInt = n.trim().parse().ok()?;
    let d: BigInt = d.trim().parse().ok()?;
    (!d.is_zero()).then(|| BigRational::new(n, d))
}

/// CSV form: `num/2^exp` for dyadic values, `num/den` otherwise.
pub fn display(x: &BigRational) -> String {
    match Dyadic::from_rational(x) {
        Some(d) => d.to_string(),
        None => format!("{}/{}", x.numer(), x.denom()),
    }
}

/// Integer that travels as a JSON number when it fits in `i64` and as a
/// decimal string otherwise.
enum Big {
    Small(i64),
    Text(String),
}

impl Serialize for Big {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Big::Small(v) => s.serialize_i64(*v),
            Big::Text(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for Big {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Big;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an integer or a decimal string")
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Big, E> {
                Ok(Big::Small(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Big, E> {
                Ok(i64::try_from(v)
                    .map(Big::Small)
                    .unwrap_or_else(|_| Big::Text(v.to_string())))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Big, E> {
                Ok(Big::Text(v.to_string()))
            }
        }
        d.deserialize_any(V)
    }
}

impl Big {
    fn from_int(n: &BigInt) -> Self {
        match n.to_i64() {
            Some(v) => Big::Small(v),
            None => Big::Text(n.to_string()),
        }
    }

    fn to_int<E: serde::de::Error>(&self) -> Result<BigInt, E> {
        match self {
            Big::Small(v) => Ok(BigInt::from(*v)),
            Big::Text(s) => s
                .parse()
                .map_err(|_| E::custom(format!("bad integer {s:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    num: Big,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exp: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    den: Option<Big>,
}

/// Serde adapter for `BigRational` fields.
pub mod json {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        let den = x.denom();
        let wire = if den.bits() > 0 && (den.clone() & (den.clone() - 1u32)).is_zero() {
            Wire {
                num: Big::from_int(x.numer()),
                exp: Some((den.bits() - 1) as u32),
                den: None,
            }
        } else {
            Wire {
                num: Big::from_int(x.numer()),
                exp: None,
                den: Some(Big::from_int(den)),
            }
        };
        wire.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let wire = Wire::deserialize(d)?;
        let num = wire.num.to_int()?;
        match (wire.exp, wire.den) {
            (Some(exp), None) => {
                if exp > 4096 {
                    return Err(D::Error::custom("exponent out of range"));
                }
                Ok(BigRational::new(num, BigInt::one() << exp))
            }
            (None, Some(den)) => {
                let den = den.to_int()?;
                if den.is_zero() {
                    return Err(D::Error::custom("zero denominator"));
                }
                Ok(BigRational::new(num, den))
            }
            _ => Err(D::Error::custom(
                "expected exactly one of \"exp\" and \"den\"",
            )),
        }
    }
}

/// Serde adapter for `Option<BigRational>`.
pub mod json_opt {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::json")] BigRational);

    pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        x.as_ref().map(|v| Wrap(v.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Holder(#[serde(with = "json")] BigRational);

    #[test]
    fn json_forms() {
        let x = Holder(BigRational::new(3.into(), 8.into()));
        assert_eq!(serde_json::to_string(&x).unwrap(), r#"{"num":3,"exp":3}"#);
        let y = Holder(BigRational::new(2.into(), 3.into()));
        assert_eq!(serde_json::to_string(&y).unwrap(), r#"{"num":2,"den":3}"#);
        let big = Holder(pow(&int(10), 50));
        let text = serde_json::to_string(&big).unwrap();
        assert_eq!(serde_json::from_str::<Holder>(&text).unwrap(), big);
        assert_eq!(
            serde_json::from_str::<Holder>(r#"{"num":6,"den":4}"#)
                .unwrap()
                .0,
            BigRational::new(3.into(), 2.into())
        );
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(parse("3/2^2"), Some(BigRational::new(3.into(), 4.into())));
        assert_eq!(parse("2/3"), Some(BigRational::new(2.into(), 3.into())));
        assert_eq!(display(&BigRational::new(2.into(), 3.into())), "2/3");
        assert_eq!(display(&int(5)), "5/2^0");
        assert_eq!(parse("1/0"), None);
    }

    #[test]
    fn float_conversions() {
        assert_eq!(from_f64(0.6).map(|x| to_f64(&x)), Some(0.6));
        assert!((root(&int(8), 3) - 2.0).abs() < 1e-12);
        let huge = BigRational::new(
            pow(&int(10), 400).to_integer(),
            pow(&int(10), 399).to_integer(),
        );
        assert!((to_f64(&huge) - 10.0).abs() < 1e-9);
    }
}
