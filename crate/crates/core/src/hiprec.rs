//! High-precision floating evaluation for quantities that are irrational
//! (anything involving pi, exp, tan or unit-sphere measures).
//!
//! Nothing here participates in pass/fail decisions of exact checks. Values
//! leave this module as [`Approx`] records: a decimal string plus the number
//! of digits the internal computation carried.

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};

/// Minimum internal precision, in significant decimal digits.
pub const MIN_DIGITS: u32 = 50;

/// Digits shown in reports.
pub const REPORT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(out_of_range("float precision digits", digits));
        }
        Ok(Precision { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Working precision in bits, with a few guard bits.
    pub fn bits(&self) -> u32 {
        (f64::from(self.digits) * std::f64::consts::LOG2_10).ceil() as u32 + 16
    }

    pub fn float(&self, x: f64) -> Float {
        Float::with_val(self.bits(), x)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits(), Constant::Pi)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision { digits: MIN_DIGITS }
    }
}

/// A floating value flagged as approximate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approx {
    pub value: String,
    pub digits: u32,
}

impl Approx {
    pub fn from_float(x: &Float, precision: Precision) -> Self {
        Approx {
            value: format_sig(x, REPORT_DIGITS),
            digits: precision.digits(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.parse().unwrap_or(f64::NAN)
    }
}

/// Scientific notation with `sig` significant digits, e.g. `2.51327412287e1`.
pub fn format_sig(x: &Float, sig: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.into();
    }
    if x.is_zero() {
        return "0".into();
    }
    // digits d1d2... with value 0.d1d2... * 10^exp
    let (neg, digits, exp) = x.to_sign_string_exp_round(10, Some(sig), Round::Nearest);
    let exp = exp.expect("finite nonzero float has an exponent") - 1;
    let (head, tail) = digits.split_at(1);
    let tail = tail.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}

/// Surface measure of the unit sphere `S^{d-1}` in `R^d`: `2 pi^{d/2} / Gamma(d/2)`.
pub fn unit_sphere_area(d: u32, precision: Precision) -> Float {
    let bits = precision.bits();
    let half = Float::with_val(bits, d) / 2u32;
    let num = precision.pi().pow(&half) * 2u32;
    num / half.gamma()
}

/// Volume of the unit ball in `R^d`: `pi^{d/2} / Gamma(d/2 + 1)`.
pub fn unit_ball_volume(d: u32, precision: Precision) -> Float {
    let bits = precision.bits();
    let half = Float::with_val(bits, d) / 2u32;
    let num = precision.pi().pow(&half);
    num / (half + 1u32).gamma()
}

/// `2^e` for a rational exponent `p/q`.
pub fn pow2_rational(exp: &crate::Rational, precision: Precision) -> Float {
    let e = exp.to_float(precision.bits());
    Float::with_val(precision.bits(), 2u32).pow(&e)
}

/// Serde adapter for `f64` fields that may be infinite or NaN: finite values
/// stay JSON numbers, the rest become the strings `"inf"`, `"-inf"`, `"NaN"`.
pub mod lossless_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("NaN")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "NaN" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float {other}"))),
            },
        }
    }
}
