use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Arithmetic used by the lattice computations: plain `f64` or
/// double-double (about 106 bits).
pub trait LabFloat:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_two(x: TwoFloat) -> Self;
    fn from_f64(x: f64) -> Self;
    fn from_i128(x: i128) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn exp(self) -> Self;
    /// Natural logarithm of a positive value, rounded to `f64`.
    fn ln_f64(self) -> f64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl LabFloat for f64 {
    fn from_two(x: TwoFloat) -> Self {
        x.hi() + x.lo()
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i128(x: i128) -> Self {
        x as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln_f64(self) -> f64 {
        self.ln()
    }
}

impl LabFloat for TwoFloat {
    fn from_two(x: TwoFloat) -> Self {
        x
    }
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn from_i128(x: i128) -> Self {
        let hi = x as f64;
        let rest = x - hi as i128;
        TwoFloat::new_add(hi, rest as f64)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn sqrt(self) -> Self {
        TwoFloat::sqrt(self)
    }
    fn abs(self) -> Self {
        TwoFloat::abs(&self)
    }
    fn exp(self) -> Self {
        TwoFloat::exp(self)
    }
    fn ln_f64(self) -> f64 {
        // The library logarithm loses digits; the f64 split is exact enough.
        self.hi().ln() + (self.lo() / self.hi()).ln_1p()
    }
}

/// Arithmetic selected for a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    Double,
    DoubleDouble,
}

impl Precision {
    pub const DEFAULT_BITS: u32 = 80;

    /// Smallest available arithmetic with at least `bits` of mantissa.
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            0 => Err(Error::Precondition("precision must be positive".into())),
            1..=53 => Ok(Precision::Double),
            54..=106 => Ok(Precision::DoubleDouble),
            _ => Err(Error::Precondition(format!("precision of {bits} bits is not available (maximum 106)"))),
        }
    }

    /// Reads `NSYS_PRECISION`, defaulting to 80 bits.
    pub fn from_env() -> Result<Self> {
        match std::env::var("NSYS_PRECISION") {
            Ok(s) => {
                let bits = s
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Precondition(format!("NSYS_PRECISION = {s:?} is not a bit count")))?;
                Precision::from_bits(bits)
            }
            Err(_) => Precision::from_bits(Self::DEFAULT_BITS),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            Precision::Double => 53,
            Precision::DoubleDouble => 106,
        }
    }
}
