//! Exact nonnegative fractions over `u128`.
//!
//! Every size, capacity and ratio in the crate is a [`Rational`]. Values are
//! always kept in lowest terms with a positive denominator, so structural
//! equality is numeric equality. Arithmetic never wraps: the `checked_*`
//! methods report [`RationalError::Overflow`], and the operator impls panic
//! with the same message.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Sub, SubAssign};
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("rational arithmetic overflowed 128 bits")]
    Overflow,
    #[error("subtraction would produce a negative value")]
    Negative,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse {0:?} as an exact fraction or decimal")]
    Parse(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u128,
    den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    pub fn new(num: u128, den: u128) -> Result<Self, RationalError> {
        if den == 0 {
            return Err(RationalError::DivisionByZero);
        }
        let g = gcd(num, den);
        Ok(Rational {
            num: num / g,
            den: den / g,
        })
    }

    /// Shorthand for literals in code and tests; panics on a zero denominator.
    pub fn frac(num: u128, den: u128) -> Self {
        Self::new(num, den).expect("zero denominator")
    }

    pub const fn integer(n: u128) -> Self {
        Rational { num: n, den: 1 }
    }

    /// `1 / 2^exp`.
    pub fn inverse_power_of_two(exp: u32) -> Self {
        assert!(exp < 127, "2^{exp} does not fit in u128");
        Rational {
            num: 1,
            den: 1u128 << exp,
        }
    }

    pub fn numer(&self) -> u128 {
        self.num
    }

    pub fn denom(&self) -> u128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn floor(&self) -> u128 {
        self.num / self.den
    }

    pub fn ceil(&self) -> u128 {
        self.num.div_ceil(self.den)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn recip(&self) -> Result<Self, RationalError> {
        if self.num == 0 {
            return Err(RationalError::DivisionByZero);
        }
        Ok(Rational {
            num: self.den,
            den: self.num,
        })
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, RationalError> {
        let g = gcd(self.den, rhs.den);
        let left = self
            .num
            .checked_mul(rhs.den / g)
            .ok_or(RationalError::Overflow)?;
        let right = rhs
            .num
            .checked_mul(self.den / g)
            .ok_or(RationalError::Overflow)?;
        let num = left.checked_add(right).ok_or(RationalError::Overflow)?;
        let den = (self.den / g)
            .checked_mul(rhs.den)
            .ok_or(RationalError::Overflow)?;
        Self::new(num, den)
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, RationalError> {
        if self < rhs {
            return Err(RationalError::Negative);
        }
        let g = gcd(self.den, rhs.den);
        let left = self
            .num
            .checked_mul(rhs.den / g)
            .ok_or(RationalError::Overflow)?;
        let right = rhs
            .num
            .checked_mul(self.den / g)
            .ok_or(RationalError::Overflow)?;
        let den = (self.den / g)
            .checked_mul(rhs.den)
            .ok_or(RationalError::Overflow)?;
        Self::new(left - right, den)
    }

    /// `self - rhs`, or zero when `rhs > self`.
    pub fn saturating_sub(self, rhs: Self) -> Self {
        match self.checked_sub(rhs) {
            Ok(v) => v,
            Err(RationalError::Negative) => Rational::ZERO,
            Err(e) => panic!("{e}"),
        }
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self, RationalError> {
        let g1 = gcd(self.num, rhs.den).max(1);
        let g2 = gcd(rhs.num, self.den).max(1);
        let num = (self.num / g1)
            .checked_mul(rhs.num / g2)
            .ok_or(RationalError::Overflow)?;
        let den = (self.den / g2)
            .checked_mul(rhs.den / g1)
            .ok_or(RationalError::Overflow)?;
        Self::new(num, den)
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self, RationalError> {
        self.checked_mul(rhs.recip()?)
    }

    pub fn mul_int(self, k: u128) -> Self {
        self * Rational::integer(k)
    }

    pub fn div_int(self, k: u128) -> Self {
        self / Rational::integer(k)
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

/// Compares `a/b` with `c/d` by continued-fraction expansion; never overflows.
fn cmp_fractions(mut a: u128, mut b: u128, mut c: u128, mut d: u128) -> Ordering {
    let mut flipped = false;
    loop {
        let (qa, qc) = (a / b, c / d);
        if qa != qc {
            let ord = qa.cmp(&qc);
            return if flipped { ord.reverse() } else { ord };
        }
        let (ra, rc) = (a % b, c % d);
        match (ra == 0, rc == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => {
                return if flipped {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (false, true) => {
                return if flipped {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (false, false) => {
                // a/b - q = ra/b; compare reciprocals b/ra vs d/rc with order flipped.
                a = b;
                b = ra;
                c = d;
                d = rc;
                flipped = !flipped;
            }
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        match (
            self.num.checked_mul(other.den),
            other.num.checked_mul(self.den),
        ) {
            (Some(l), Some(r)) => l.cmp(&r),
            _ => cmp_fractions(self.num, self.den, other.num, other.den),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Self) -> Self {
        self.checked_div(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Rational::ZERO, |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::ZERO, |acc, x| acc + *x)
    }
}

impl From<u32> for Rational {
    fn from(n: u32) -> Self {
        Rational::integer(n as u128)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_u128(s: &str, whole: &str) -> Result<u128, RationalError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(RationalError::Parse(whole.to_string()));
    }
    s.parse::<u128>().map_err(|_| RationalError::Overflow)
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Accepts `p/q`, integers, and finite decimals such as `0.375`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let num = parse_u128(p.trim(), s)?;
            let den = parse_u128(q.trim(), s)?;
            return Rational::new(num, den);
        }
        if let Some((int, frac)) = t.split_once('.') {
            if int.is_empty() && frac.is_empty() {
                return Err(RationalError::Parse(s.to_string()));
            }
            let int = if int.is_empty() {
                0
            } else {
                parse_u128(int, s)?
            };
            if frac.is_empty() {
                return Ok(Rational::integer(int));
            }
            let digits = parse_u128(frac, s)?;
            let scale = 10u128
                .checked_pow(frac.len() as u32)
                .ok_or(RationalError::Overflow)?;
            let num = int
                .checked_mul(scale)
                .and_then(|v| v.checked_add(digits))
                .ok_or(RationalError::Overflow)?;
            return Rational::new(num, scale);
        }
        Ok(Rational::integer(parse_u128(t, s)?))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RationalVisitor;

        impl Visitor<'_> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a fraction string like \"3/8\", a decimal string, or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::integer(v as u128))
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }
}
