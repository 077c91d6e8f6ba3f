//! Exact rational scalars.
//!
//! [`Rational`] wraps an arbitrary-precision GMP fraction. Every value is kept
//! in lowest terms with a positive denominator, so structural equality is
//! value equality. The canonical text form is always `"p/q"`, including
//! integers (`"3/1"`), which is what certificates store.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use rug::{Float, Integer};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(rug::Rational);

/// The four field operations, for callers that pick an operation at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl Rational {
    /// Builds `num/den`. Panics if `den == 0`; use [`Rational::try_new`] for
    /// untrusted input.
    pub fn new(num: i64, den: i64) -> Self {
        Self::try_new(num, den).expect("zero denominator")
    }

    pub fn try_new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(rug::Rational::from((num, den))))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(rug::Rational::from(n))
    }

    pub fn from_big(num: Integer, den: Integer) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(rug::Rational::from((num, den))))
    }

    pub fn zero() -> Self {
        Rational(rug::Rational::new())
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn numer(&self) -> &Integer {
        self.0.numer()
    }

    pub fn denom(&self) -> &Integer {
        self.0.denom()
    }

    pub fn inner(&self) -> &rug::Rational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.cmp0() == Ordering::Equal
    }

    pub fn is_positive(&self) -> bool {
        self.0.cmp0() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.0.cmp0() == Ordering::Less
    }

    /// Sign as an ordering against zero.
    pub fn sign(&self) -> Ordering {
        self.0.cmp0()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.clone().abs())
    }

    pub fn square(&self) -> Self {
        Rational(rug::Rational::from(&self.0 * &self.0))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.clone().recip()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(rug::Rational::from(&self.0 / &rhs.0)))
    }

    /// Applies `op` exactly; division by zero is reported, never panics.
    pub fn apply(&self, op: ArithOp, rhs: &Rational) -> Result<Self> {
        Ok(match op {
            ArithOp::Add => self + rhs,
            ArithOp::Sub => self - rhs,
            ArithOp::Mul => self * rhs,
            ArithOp::Div => self.checked_div(rhs)?,
        })
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, exp: i32) -> Result<Self> {
        use rug::ops::Pow;
        if exp < 0 && self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(rug::Rational::from((&self.0).pow(exp))))
    }

    pub fn max_of(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    pub fn min_of(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    /// Exact square root when both numerator and denominator are perfect
    /// squares (the fraction is reduced, so this is exact iff the value is the
    /// square of a rational).
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let (n, d) = (self.numer(), self.denom());
        if n.is_perfect_square() && d.is_perfect_square() {
            Some(Rational(rug::Rational::from((
                n.clone().sqrt(),
                d.clone().sqrt(),
            ))))
        } else {
            None
        }
    }

    pub fn floor(&self) -> Integer {
        self.0.clone().floor().into_numer_denom().0
    }

    /// Floating mirror, for oracles and reports only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Floating mirror at `prec` bits.
    pub fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.0)
    }

    /// Exact value of a finite double.
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        rug::Rational::from_f64(x).map(Rational)
    }

    /// Best rational approximation of `self` with denominator at most
    /// `max_den`, by continued-fraction convergents and the final
    /// semiconvergent.
    pub fn best_approximation(&self, max_den: &Integer) -> Self {
        assert!(*max_den >= 1, "denominator bound must be positive");
        if self.denom() <= max_den {
            return self.clone();
        }
        // Convergent recurrences: (p_prev/q_prev, p_cur/q_cur).
        let (mut p_prev, mut q_prev) = (Integer::from(0), Integer::from(1));
        let (mut p_cur, mut q_cur) = (Integer::from(1), Integer::from(0));
        let mut x = self.0.clone();
        loop {
            let a = Rational(x.clone()).floor();
            let q_next = Integer::from(&q_prev + &a * &q_cur);
            if q_next > *max_den {
                break;
            }
            let p_next = Integer::from(&p_prev + &a * &p_cur);
            p_prev = std::mem::replace(&mut p_cur, p_next);
            q_prev = std::mem::replace(&mut q_cur, q_next);
            let frac = x - rug::Rational::from(a);
            if frac.cmp0() == Ordering::Equal {
                break;
            }
            x = frac.recip();
        }
        let convergent = Rational(rug::Rational::from((p_cur.clone(), q_cur.clone())));
        let k = Integer::from(max_den - &q_prev) / &q_cur;
        if k == 0 {
            return convergent;
        }
        let semi = Rational(rug::Rational::from((
            Integer::from(&p_prev + &k * &p_cur),
            Integer::from(&q_prev + &k * &q_cur),
        )));
        let err_semi = (&semi - self).abs();
        let err_conv = (&convergent - self).abs();
        if err_semi < err_conv {
            semi
        } else {
            convergent
        }
    }

    /// Continued-fraction rounding of a double to denominator at most
    /// `max_den`. Returns `None` for non-finite input.
    pub fn round_f64(x: f64, max_den: u64) -> Option<Self> {
        let exact = Self::from_f64_exact(x)?;
        Some(exact.best_approximation(&Integer::from(max_den.max(1))))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"p/q"`, `"p"`, and plain decimals such as `"-0.125"` (read
    /// exactly).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::ParseRational(s.to_string());
        if t.is_empty() {
            return Err(bad());
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: Integer = p.trim().parse().map_err(|_| bad())?;
            let q: Integer = q.trim().parse().map_err(|_| bad())?;
            return Rational::from_big(p, q).map_err(|_| bad());
        }
        if let Some((int_part, frac_part)) = t.split_once('.') {
            let negative = int_part.trim_start().starts_with('-');
            let digits = int_part.trim_start_matches(['-', '+']);
            if !frac_part.chars().all(|c| c.is_ascii_digit())
                || !digits.chars().all(|c| c.is_ascii_digit())
                || (digits.is_empty() && frac_part.is_empty())
            {
                return Err(bad());
            }
            let mut num: Integer = format!("0{digits}{frac_part}").parse().map_err(|_| bad())?;
            if negative {
                num = -num;
            }
            let den = Integer::from(Integer::u_pow_u(10, frac_part.len() as u32));
            return Rational::from_big(num, den).map_err(|_| bad());
        }
        let p: Integer = t.parse().map_err(|_| bad())?;
        Ok(Rational(rug::Rational::from(p)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<u32> for Rational {
    fn from(n: u32) -> Self {
        Rational::from_integer(i64::from(n))
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(rug::Rational::from(&self.0 $op &rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0 $op &rhs.0)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(rug::Rational::from(&self.0 $op &rhs.0))
            }
        }
        impl $tr<i64> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: i64) -> Rational {
                self $op &Rational::from_integer(rhs)
            }
        }
        impl $tr<i64> for Rational {
            type Output = Rational;
            fn $method(self, rhs: i64) -> Rational {
                self $op Rational::from_integer(rhs)
            }
        }
        impl $tr<&Rational> for i64 {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational::from_integer(self) $op rhs
            }
        }
        impl $tr<Rational> for i64 {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational::from_integer(self) $op rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
// Division panics on a zero divisor like the integer types do; the certified
// path uses `checked_div` wherever a divisor can vanish.
binop!(Div, div, /);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(rug::Rational::from(-&self.0))
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

/// Shorthand for `Rational::new(p, q)` in tables and tests.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}
