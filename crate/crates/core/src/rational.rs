//! Exact rational helpers shared by the polyhedral code.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"` (surrounding whitespace allowed).
pub fn parse_rational(s: &str) -> Result<Q> {
    let bad = || Error::MalformedRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(num, den))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn dot_int(a: &[u32], w: &[Q]) -> Q {
    a.iter()
        .zip(w)
        .filter(|(&ai, _)| ai != 0)
        .fold(Q::zero(), |acc, (&ai, wi)| acc + wi * BigInt::from(ai))
}

pub fn from_exponents(a: &[u32]) -> Vec<Q> {
    a.iter().map(|&x| q(x as i64)).collect()
}

/// Least common multiple of the reduced denominators (zero entries contribute 1).
pub fn lcm_denominators(v: &[Q]) -> BigInt {
    v.iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn is_nonneg(v: &[Q]) -> bool {
    v.iter().all(|x| !x.is_negative())
}

pub fn ceil_to_i64(x: &Q) -> i64 {
    x.ceil().to_integer().to_i64().unwrap_or(i64::MAX)
}

pub fn floor_to_i64(x: &Q) -> i64 {
    x.floor().to_integer().to_i64().unwrap_or(i64::MAX)
}

pub mod serde_q {
    //! Serializes a rational as its canonical string.
    use super::{format_rational, parse_rational, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_qvec {
    use super::{format_rational, parse_rational, Q};
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&format_rational(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod serde_qvecvec {
    use super::{format_rational, Q};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<Vec<String>> = v.iter().map(|row| row.iter().map(format_rational).collect()).collect();
        serde::Serialize::serialize(&strings, s)
    }
}
