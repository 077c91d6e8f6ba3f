//! Single-square-root extension of the rationals.
//!
//! Only the closed operations the constant chain needs are supported:
//! squaring, comparison with a rational, products, ratios, and a rational
//! shift (`p + r*sqrt(s)`). Comparisons never evaluate a square root; they go
//! through sign analysis and squaring.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rug::Float;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// `coeff * sqrt(radicand)` with `radicand >= 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    coeff: Rational,
    radicand: Rational,
}

/// Result of an operation that may collapse to a rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurdValue {
    Rational(Rational),
    Surd(QuadSurd),
}

impl QuadSurd {
    pub fn new(coeff: Rational, radicand: Rational) -> Result<Self> {
        if radicand.is_negative() {
            return Err(Error::NegativeRadicand(radicand.to_string()));
        }
        Ok(QuadSurd { coeff, radicand })
    }

    /// `sqrt(radicand)`.
    pub fn sqrt(radicand: Rational) -> Result<Self> {
        Self::new(Rational::one(), radicand)
    }

    pub fn from_rational(r: Rational) -> Self {
        QuadSurd {
            coeff: r,
            radicand: Rational::one(),
        }
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn radicand(&self) -> &Rational {
        &self.radicand
    }

    /// `coeff^2 * radicand`, exactly.
    pub fn square(&self) -> Rational {
        self.coeff.square() * &self.radicand
    }

    pub fn sign(&self) -> Ordering {
        if self.radicand.is_zero() {
            Ordering::Equal
        } else {
            self.coeff.sign()
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    /// The rational value, when the radicand is a perfect square.
    pub fn as_rational(&self) -> Option<Rational> {
        self.radicand.sqrt_exact().map(|root| &self.coeff * root)
    }

    pub fn into_value(self) -> SurdValue {
        match self.as_rational() {
            Some(r) => SurdValue::Rational(r),
            None => SurdValue::Surd(self),
        }
    }

    pub fn scale(&self, r: &Rational) -> QuadSurd {
        QuadSurd {
            coeff: &self.coeff * r,
            radicand: self.radicand.clone(),
        }
    }

    /// Exact comparison `self <=> y`.
    pub fn cmp_rational(&self, y: &Rational) -> Ordering {
        let (sx, sy) = (self.sign(), y.sign());
        if sx != sy {
            return sx.cmp(&sy);
        }
        match sx {
            Ordering::Equal => Ordering::Equal,
            Ordering::Greater => self.square().cmp(&y.square()),
            Ordering::Less => y.square().cmp(&self.square()),
        }
    }

    /// Exact comparison of two surds by the same sign-then-square argument.
    pub fn cmp_surd(&self, other: &QuadSurd) -> Ordering {
        let (sx, sy) = (self.sign(), other.sign());
        if sx != sy {
            return sx.cmp(&sy);
        }
        match sx {
            Ordering::Equal => Ordering::Equal,
            Ordering::Greater => self.square().cmp(&other.square()),
            Ordering::Less => other.square().cmp(&self.square()),
        }
    }

    /// Value equality (structurally different surds may be equal).
    pub fn value_eq(&self, other: &QuadSurd) -> bool {
        self.cmp_surd(other) == Ordering::Equal
    }

    /// Product; collapses to a rational when the radicands multiply to a
    /// perfect square.
    pub fn mul(&self, other: &QuadSurd) -> SurdValue {
        QuadSurd {
            coeff: &self.coeff * &other.coeff,
            radicand: &self.radicand * &other.radicand,
        }
        .into_value()
    }

    /// Ratio `self / other`; `other` must be nonzero.
    pub fn div(&self, other: &QuadSurd) -> Result<SurdValue> {
        if other.sign() == Ordering::Equal {
            return Err(Error::DivisionByZero);
        }
        Ok(QuadSurd {
            coeff: self.coeff.checked_div(&other.coeff)?,
            radicand: self.radicand.checked_div(&other.radicand)?,
        }
        .into_value())
    }

    /// Same value with the denominator moved out of the radicand:
    /// `r*sqrt(p/q) = (r/q)*sqrt(p*q)`.
    pub fn normalized(&self) -> QuadSurd {
        if let Some(r) = self.as_rational() {
            return QuadSurd::from_rational(r);
        }
        let q = Rational::from_big(self.radicand.denom().clone(), 1.into()).expect("nonzero");
        QuadSurd {
            coeff: &self.coeff / &q,
            radicand: &self.radicand * &q.square(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.coeff.to_f64() * self.radicand.to_f64().sqrt()
    }

    pub fn to_float(&self, prec: u32) -> Float {
        let root = self.radicand.to_float(prec).sqrt();
        root * self.coeff.to_float(prec)
    }
}

impl SurdValue {
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            SurdValue::Rational(r) => Some(r),
            SurdValue::Surd(_) => None,
        }
    }

    pub fn to_surd(&self) -> QuadSurd {
        match self {
            SurdValue::Rational(r) => QuadSurd::from_rational(r.clone()),
            SurdValue::Surd(s) => s.clone(),
        }
    }
}

impl fmt::Display for SurdValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurdValue::Rational(r) => write!(f, "{r}"),
            SurdValue::Surd(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*sqrt({})", self.coeff, self.radicand)
    }
}

impl fmt::Debug for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for QuadSurd {
    type Err = Error;

    /// Parses `"r*sqrt(s)"`; a bare rational `"r"` is read as `r*sqrt(1/1)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseSurd(s.to_string());
        let t = s.trim();
        match t.split_once("*sqrt(") {
            Some((coeff, rest)) => {
                let radicand = rest.strip_suffix(')').ok_or_else(bad)?;
                let coeff: Rational = coeff.parse().map_err(|_| bad())?;
                let radicand: Rational = radicand.parse().map_err(|_| bad())?;
                QuadSurd::new(coeff, radicand)
            }
            None => t
                .parse::<Rational>()
                .map(QuadSurd::from_rational)
                .map_err(|_| bad()),
        }
    }
}

impl Serialize for QuadSurd {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QuadSurd {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `shift + surd`, e.g. the endpoints `delta -/+ sqrt(delta*(delta - (n-2)/n))`.
#[derive(Clone, PartialEq, Eq)]
pub struct SurdSum {
    pub shift: Rational,
    pub surd: QuadSurd,
}

impl SurdSum {
    pub fn new(shift: Rational, surd: QuadSurd) -> Self {
        SurdSum { shift, surd }
    }

    /// Exact comparison `self <=> y`.
    pub fn cmp_rational(&self, y: &Rational) -> Ordering {
        self.surd.cmp_rational(&(y - &self.shift))
    }

    pub fn scale(&self, r: &Rational) -> SurdSum {
        SurdSum {
            shift: &self.shift * r,
            surd: self.surd.scale(r),
        }
    }

    pub fn add_rational(&self, r: &Rational) -> SurdSum {
        SurdSum {
            shift: &self.shift + r,
            surd: self.surd.clone(),
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.surd.as_rational().map(|r| r + &self.shift)
    }

    pub fn to_f64(&self) -> f64 {
        self.shift.to_f64() + self.surd.to_f64()
    }
}

impl fmt::Display for SurdSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}", self.shift, self.surd)
    }
}

impl fmt::Debug for SurdSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for SurdSum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SurdSum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let (shift, surd) = s
            .split_once(" + ")
            .ok_or_else(|| serde::de::Error::custom(format!("bad surd sum {s:?}")))?;
        Ok(SurdSum {
            shift: shift.parse().map_err(serde::de::Error::custom)?,
            surd: surd.parse().map_err(serde::de::Error::custom)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn root(r: Rational) -> QuadSurd {
        QuadSurd::sqrt(r).unwrap()
    }

    #[test]
    fn compare_against_rationals() {
        assert_eq!(root(ratio(2, 3)).cmp_rational(&ratio(1, 1)), Ordering::Less);
        assert_eq!(
            root(ratio(4, 9)).cmp_rational(&ratio(2, 3)),
            Ordering::Equal
        );
        // (1/2)*sqrt(8): squares to 2 > 49/25.
        let s = QuadSurd::new(ratio(1, 2), ratio(8, 1)).unwrap();
        assert_eq!(s.cmp_rational(&ratio(7, 5)), Ordering::Greater);
    }

    #[test]
    fn compare_handles_signs() {
        let neg = QuadSurd::new(ratio(-1, 1), ratio(2, 1)).unwrap();
        assert_eq!(neg.cmp_rational(&ratio(-3, 2)), Ordering::Greater);
        assert_eq!(neg.cmp_rational(&ratio(-1, 1)), Ordering::Less);
        assert_eq!(neg.cmp_rational(&ratio(1, 100)), Ordering::Less);
        let zero = root(Rational::zero());
        assert_eq!(zero.cmp_rational(&Rational::zero()), Ordering::Equal);
        assert_eq!(zero.cmp_rational(&ratio(-1, 3)), Ordering::Greater);
    }

    #[test]
    fn products_collapse_on_perfect_squares() {
        assert_eq!(
            root(ratio(2, 1)).mul(&root(ratio(2, 1))),
            SurdValue::Rational(ratio(2, 1))
        );
        match root(ratio(2, 1)).mul(&root(ratio(3, 1))) {
            SurdValue::Surd(s) => {
                assert_eq!(s.coeff(), &ratio(1, 1));
                assert_eq!(s.radicand(), &ratio(6, 1));
            }
            other => panic!("expected surd, got {other:?}"),
        }
    }

    #[test]
    fn ratio_of_surds() {
        let v = root(ratio(8, 1)).div(&root(ratio(2, 1))).unwrap();
        assert_eq!(v, SurdValue::Rational(ratio(2, 1)));
        assert!(root(ratio(2, 1)).div(&root(Rational::zero())).is_err());
    }

    #[test]
    fn negative_radicand_rejected() {
        assert!(QuadSurd::sqrt(ratio(-1, 2)).is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = QuadSurd::new(ratio(-3, 4), ratio(2, 3)).unwrap();
        assert_eq!(s.to_string(), "-3/4*sqrt(2/3)");
        assert_eq!(s.to_string().parse::<QuadSurd>().unwrap(), s);
        let sum = SurdSum::new(ratio(1, 1), root(ratio(2, 3)));
        let json = serde_json::to_string(&sum).unwrap();
        assert_eq!(json, "\"1/1 + 1/1*sqrt(2/3)\"");
        assert!(serde_json::from_str::<SurdSum>(&json).unwrap() == sum);
    }

    #[test]
    fn normalized_preserves_value() {
        let s = QuadSurd::new(ratio(3, 5), ratio(7, 12)).unwrap();
        let n = s.normalized();
        assert_eq!(n.radicand().denom(), &1);
        assert!(s.value_eq(&n));
        assert_eq!(
            root(ratio(9, 4)).normalized(),
            QuadSurd::from_rational(ratio(3, 2))
        );
    }

    #[test]
    fn surd_sum_comparison() {
        // 1 - sqrt(2/3) < 1/5 < 1 + sqrt(2/3)
        let lower = SurdSum::new(ratio(1, 1), root(ratio(2, 3)).scale(&ratio(-1, 1)));
        let upper = SurdSum::new(ratio(1, 1), root(ratio(2, 3)));
        assert_eq!(lower.cmp_rational(&ratio(1, 5)), Ordering::Less);
        assert_eq!(upper.cmp_rational(&ratio(1, 5)), Ordering::Greater);
        assert_eq!(upper.cmp_rational(&ratio(2, 1)), Ordering::Less);
    }
}
