use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{BitString, CodecError};

/// Exact nonnegative rational `numerator / 2^exponent`, kept in canonical form
/// (numerator odd, or zero with exponent 0).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigUint,
    exponent: u32,
}

impl DyadicRational {
    pub fn zero() -> Self {
        Self { numerator: BigUint::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        Self { numerator: BigUint::one(), exponent: 0 }
    }

    pub fn new(numerator: impl Into<BigUint>, exponent: u32) -> Self {
        let mut d = Self { numerator: numerator.into(), exponent };
        d.normalize();
        d
    }

    /// `2^-k`
    pub fn pow2_neg(k: u32) -> Self {
        Self { numerator: BigUint::one(), exponent: k }
    }

    /// `2^k` for signed `k`.
    pub fn pow2(k: i64) -> Self {
        if k >= 0 {
            Self { numerator: BigUint::one() << (k as usize), exponent: 0 }
        } else {
            Self::pow2_neg((-k) as u32)
        }
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().unwrap_or(0).min(self.exponent as u64);
        if tz > 0 {
            self.numerator >>= tz as usize;
            self.exponent -= tz as u32;
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Numerator when the value is written over `2^exp`; `None` if `exp` is too small.
    pub fn scaled_numerator(&self, exp: u32) -> Option<BigUint> {
        if exp < self.exponent {
            None
        } else {
            Some(&self.numerator << ((exp - self.exponent) as usize))
        }
    }

    pub fn half(&self) -> Self {
        self.mul_pow2(-1)
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        if k >= 0 {
            let shift = (k as u64).min(self.exponent as u64) as u32;
            let rest = k as u64 - shift as u64;
            Self { numerator: &self.numerator << (rest as usize), exponent: self.exponent - shift }
        } else {
            Self { numerator: self.numerator.clone(), exponent: self.exponent + (-k) as u32 }
        }
    }

    /// `self - other`, or `None` when the result would be negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let e = self.exponent.max(other.exponent);
        let a = self.scaled_numerator(e).unwrap();
        let b = other.scaled_numerator(e).unwrap();
        if a < b {
            None
        } else {
            Some(Self::new(a - b, e))
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numerator.clone()), BigInt::one() << self.exponent as usize)
    }

    /// Recovers a dyadic value from a rational, if its reduced denominator is a power of two.
    pub fn from_rational(q: &BigRational) -> Option<Self> {
        let num = q.numer().to_biguint()?;
        let den = q.denom().to_biguint()?;
        if den.count_ones() != 1 {
            return None;
        }
        let e = den.trailing_zeros()? as u32;
        Some(Self::new(num, e))
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator.to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(self.exponent as i32)
    }

    fn is_power_of_two(&self) -> bool {
        self.numerator.trailing_zeros() == Some(self.numerator.bits() - 1)
    }

    /// `⌈-log₂ q⌉` for `0 < q`.
    pub fn ceil_neg_log2(&self) -> Result<i64, CodecError> {
        if self.is_zero() {
            return Err(CodecError::ZeroMeasure);
        }
        // q = n·2^-e with 2^(b-1) ≤ n < 2^b.
        let b = self.numerator.bits() as i64;
        let e = self.exponent as i64;
        Ok(e - b + 1)
    }

    /// `⌊-log₂ q⌋` for `0 < q`.
    pub fn floor_neg_log2(&self) -> Result<i64, CodecError> {
        if self.is_zero() {
            return Err(CodecError::ZeroMeasure);
        }
        let b = self.numerator.bits() as i64;
        Ok(self.exponent as i64 - b + 1 - if self.is_power_of_two() { 0 } else { 1 })
    }

    /// `⌈log₂ q⌉` for `0 < q`.
    pub fn ceil_log2(&self) -> Result<i64, CodecError> {
        Ok(-self.floor_neg_log2()?)
    }
}

/// `⌈-log₂ q⌉` for `0 < q ≤ 1`: the unique `k` with `2^-k ≤ q < 2^-(k-1)`.
pub fn ceil_neg_log2(q: &DyadicRational) -> Result<i64, CodecError> {
    if q > &DyadicRational::one() {
        return Err(CodecError::AboveOne);
    }
    q.ceil_neg_log2()
}

/// `⌊log₂ q⌋` for a positive rational.
pub fn floor_log2_rational(q: &BigRational) -> Result<i64, CodecError> {
    if q <= &BigRational::zero() {
        return Err(CodecError::ZeroMeasure);
    }
    let n = q.numer().to_biguint().unwrap();
    let d = q.denom().to_biguint().unwrap();
    // Start from the bit-length estimate and correct by at most one.
    let mut k = n.bits() as i64 - d.bits() as i64;
    let pow = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(BigInt::one() << k as usize)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
        }
    };
    while pow(k) > *q {
        k -= 1;
    }
    while pow(k + 1) <= *q {
        k += 1;
    }
    Ok(k)
}

/// `⌊-log₂ q⌋` for a positive rational.
pub fn floor_neg_log2_rational(q: &BigRational) -> Result<i64, CodecError> {
    // ⌊-x⌋ = -⌈x⌉
    Ok(-ceil_log2_rational(q)?)
}

/// `⌈log₂ q⌉` for a positive rational.
pub fn ceil_log2_rational(q: &BigRational) -> Result<i64, CodecError> {
    let f = floor_log2_rational(q)?;
    let exact = if f >= 0 {
        *q == BigRational::from_integer(BigInt::one() << f as usize)
    } else {
        *q == BigRational::new(BigInt::one(), BigInt::one() << (-f) as usize)
    };
    Ok(if exact { f } else { f + 1 })
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        self.scaled_numerator(e).unwrap().cmp(&other.scaled_numerator(e).unwrap())
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;

    fn add(self, other: &DyadicRational) -> DyadicRational {
        let e = self.exponent.max(other.exponent);
        DyadicRational::new(self.scaled_numerator(e).unwrap() + other.scaled_numerator(e).unwrap(), e)
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;

    fn add(self, other: DyadicRational) -> DyadicRational {
        &self + &other
    }
}

impl AddAssign<&DyadicRational> for DyadicRational {
    fn add_assign(&mut self, other: &DyadicRational) {
        *self = &*self + other;
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;

    /// Panics if the result is negative.
    fn sub(self, other: &DyadicRational) -> DyadicRational {
        self.checked_sub(other).expect("negative dyadic difference")
    }
}

impl<'a> Sum<&'a DyadicRational> for DyadicRational {
    fn sum<I: Iterator<Item = &'a DyadicRational>>(iter: I) -> Self {
        let mut acc = DyadicRational::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl Sum for DyadicRational {
    fn sum<I: Iterator<Item = DyadicRational>>(iter: I) -> Self {
        let mut acc = DyadicRational::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for DyadicRational {
    type Err = CodecError;

    /// Parses `numerator/2^exponent`. A bare integer is read as exponent 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CodecError::BadDyadic(s.to_string());
        let (num, exp) = match s.split_once('/') {
            Some((n, rest)) => (n, rest.strip_prefix("2^").ok_or_else(bad)?),
            None => (s, "0"),
        };
        let num: BigUint = num.trim().parse().map_err(|_| bad())?;
        let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
        Ok(DyadicRational::new(num, exp))
    }
}

impl Serialize for DyadicRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DyadicRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Open subinterval `(lo, hi)` of `[0, 1]` with dyadic endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: DyadicRational,
    pub hi: DyadicRational,
}

impl OpenInterval {
    pub fn new(lo: DyadicRational, hi: DyadicRational) -> Result<Self, CodecError> {
        if lo >= hi || hi > DyadicRational::one() {
            return Err(CodecError::BadInterval(lo.to_string(), hi.to_string()));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> DyadicRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, other: &OpenInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn disjoint(&self, other: &OpenInterval) -> bool {
        self.hi <= other.lo || other.hi <= self.lo
    }

    /// Entirely to the left of `other`.
    pub fn left_of(&self, other: &OpenInterval) -> bool {
        self.hi <= other.lo
    }
}

/// `([p]·2^-‖p‖, ([p]+1)·2^-‖p‖)`. The empty string maps to `(0, 1)`.
pub fn interval_of(p: &BitString) -> OpenInterval {
    let e = p.len() as u32;
    let v = BigUint::from(p.value());
    OpenInterval {
        lo: DyadicRational::new(v.clone(), e),
        hi: DyadicRational::new(v + 1u32, e),
    }
}
