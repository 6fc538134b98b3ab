//! Exact rationals, the `+∞`-extended rationals used for approximation
//! exponents, and their string forms.
//!
//! Rationals cross every external boundary as lowest-terms strings `"p/q"`
//! (or `"p"` for integers); the serde helper modules below implement that
//! convention for the data types of this crate.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator.
pub type Rat = BigRational;

/// `num/den` as a [`Rat`]. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.125"`, exactly.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    let bad = || Error::ParseRat(s.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() && digits.is_empty() {
            return Err(bad());
        }
        if !digits.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let mantissa = format!("{digits}{frac}");
        let m = if mantissa.is_empty() { BigInt::zero() } else { BigInt::from_str(&mantissa).map_err(|_| bad())? };
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rat::new(m, den);
        return Ok(if negative { -r } else { r });
    }
    let p = BigInt::from_str(t).map_err(|_| bad())?;
    Ok(Rat::from_integer(p))
}

/// Parses a comma-separated list of rationals.
pub fn parse_rat_list(s: &str) -> Result<Vec<Rat>> {
    s.split(',').map(parse_rat).collect()
}

/// Canonical string form: `"p"` for integers, `"p/q"` otherwise.
pub fn fmt_rat(r: &Rat) -> String {
    r.to_string()
}

/// Decimal rendering rounded half away from zero to `digits` places.
/// Used only for the labelled approximate columns of exported tables.
pub fn to_decimal(r: &Rat, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = r.abs() * Rat::from_integer(scale.clone());
    let rounded = (scaled + rat(1, 2)).floor().to_integer();
    let (whole, frac) = rounded.div_rem(&scale);
    let sign = if r.is_negative() && !rounded.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{whole}");
    }
    format!("{sign}{whole}.{:0>width$}", frac.to_string(), width = digits)
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A rational extended by `+∞`, the value range of the approximation
/// exponents ω_j.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRat {
    Finite(Rat),
    Infinity,
}

impl ExtRat {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRat::Infinity)
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            ExtRat::Finite(r) => Some(r),
            ExtRat::Infinity => None,
        }
    }

    pub fn parse(s: &str) -> Result<ExtRat> {
        match s.trim() {
            "inf" | "+inf" | "infinity" | "∞" => Ok(ExtRat::Infinity),
            other => parse_rat(other).map(ExtRat::Finite),
        }
    }

    /// `1/x − 1` with the convention `x = 0 ↦ ∞`.
    pub fn reciprocal_minus_one(x: &Rat) -> ExtRat {
        if x.is_zero() {
            ExtRat::Infinity
        } else {
            ExtRat::Finite(x.recip() - Rat::one())
        }
    }

    /// `1/(x + 1)` with the convention `∞ ↦ 0`; inverse of
    /// [`ExtRat::reciprocal_minus_one`].
    pub fn reciprocal_of_successor(&self) -> Rat {
        match self {
            ExtRat::Infinity => Rat::zero(),
            ExtRat::Finite(x) => (x + Rat::one()).recip(),
        }
    }
}

impl From<Rat> for ExtRat {
    fn from(r: Rat) -> Self {
        ExtRat::Finite(r)
    }
}

impl PartialOrd for ExtRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRat::Infinity, ExtRat::Infinity) => Ordering::Equal,
            (ExtRat::Infinity, _) => Ordering::Greater,
            (_, ExtRat::Infinity) => Ordering::Less,
            (ExtRat::Finite(a), ExtRat::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRat::Infinity => f.write_str("inf"),
            ExtRat::Finite(r) => write!(f, "{r}"),
        }
    }
}

impl serde::Serialize for ExtRat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for ExtRat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ExtRat::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// serde helper: a single [`Rat`] as a string.
pub mod serde_rat {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// serde helper: `Vec<Rat>` as a list of strings.
pub mod serde_rat_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rat(s).map_err(serde::de::Error::custom)).collect()
    }
}

/// serde helper: `Vec<Vec<Rat>>` as nested lists of strings.
pub mod serde_rat_mat {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rat>], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|row| row.iter().map(fmt_rat).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Rat>>, D::Error> {
        let m = Vec::<Vec<String>>::deserialize(d)?;
        m.iter()
            .map(|row| row.iter().map(|s| parse_rat(s).map_err(serde::de::Error::custom)).collect())
            .collect()
    }
}
