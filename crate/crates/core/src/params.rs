//! Candidate parameter rows and the built-in reference tables.
//!
//! The reference values are stored verbatim as data. They are never derived
//! from the formulas, so a mismatch between a computed and a quoted value
//! surfaces as a discrepancy instead of being silently absorbed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadratic::check_dimension;
use crate::rational::{ratio, Rational};

/// One candidate row `(n, a, b, alpha, beta)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ParamRecord", into = "ParamRecord")]
pub struct ParamSet {
    n: u32,
    a: Rational,
    b: Rational,
    alpha: Rational,
    beta: Rational,
}

impl ParamSet {
    pub fn new(n: u32, a: Rational, b: Rational, alpha: Rational, beta: Rational) -> Result<Self> {
        check_dimension(n)?;
        for (name, v) in [("b", &b), ("alpha", &alpha), ("beta", &beta)] {
            if !v.is_positive() {
                return Err(Error::OutOfRange {
                    what: "row parameter (must be positive)",
                    value: format!("{name} = {v}"),
                });
            }
        }
        Ok(ParamSet {
            n,
            a,
            b,
            alpha,
            beta,
        })
    }

    /// Row with `a = b * delta0`.
    pub fn from_delta0(
        n: u32,
        delta0: &Rational,
        b: Rational,
        alpha: Rational,
        beta: Rational,
    ) -> Result<Self> {
        let a = delta0 * &b;
        Self::new(n, a, b, alpha, beta)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn nr(&self) -> Rational {
        Rational::from(self.n)
    }

    /// `delta0 = a / b`.
    pub fn delta0(&self) -> Rational {
        &self.a / &self.b
    }

    /// `q = b / beta`.
    pub fn q(&self) -> Rational {
        &self.b / &self.beta
    }

    pub fn with_b(&self, b: Rational) -> Result<Self> {
        Self::new(
            self.n,
            self.a.clone(),
            b,
            self.alpha.clone(),
            self.beta.clone(),
        )
    }

    pub fn with_alpha(&self, alpha: Rational) -> Result<Self> {
        Self::new(
            self.n,
            self.a.clone(),
            self.b.clone(),
            alpha,
            self.beta.clone(),
        )
    }

    pub fn with_beta(&self, beta: Rational) -> Result<Self> {
        Self::new(
            self.n,
            self.a.clone(),
            self.b.clone(),
            self.alpha.clone(),
            beta,
        )
    }

    /// Keeps `delta0` fixed while moving `b` (so `a` moves with it).
    pub fn with_b_fixed_delta0(&self, b: Rational) -> Result<Self> {
        Self::from_delta0(
            self.n,
            &self.delta0(),
            b,
            self.alpha.clone(),
            self.beta.clone(),
        )
    }
}

/// Serialized form of a [`ParamSet`], with the derived values included for
/// readers. Derived fields are recomputed, never trusted, on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub n: u32,
    pub a: Rational,
    pub b: Rational,
    pub alpha: Rational,
    pub beta: Rational,
    #[serde(default)]
    pub delta0: Option<Rational>,
    #[serde(default)]
    pub q: Option<Rational>,
}

impl From<ParamSet> for ParamRecord {
    fn from(p: ParamSet) -> Self {
        ParamRecord {
            delta0: Some(p.delta0()),
            q: Some(p.q()),
            n: p.n,
            a: p.a,
            b: p.b,
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl TryFrom<ParamRecord> for ParamSet {
    type Error = Error;

    fn try_from(r: ParamRecord) -> Result<Self> {
        let p = ParamSet::new(r.n, r.a, r.b, r.alpha, r.beta)?;
        if let Some(d) = &r.delta0 {
            if *d != p.delta0() {
                return Err(Error::MalformedCertificate(format!(
                    "recorded delta0 {d} differs from a/b = {}",
                    p.delta0()
                )));
            }
        }
        if let Some(q) = &r.q {
            if *q != p.q() {
                return Err(Error::MalformedCertificate(format!(
                    "recorded q {q} differs from b/beta = {}",
                    p.q()
                )));
            }
        }
        Ok(p)
    }
}

/// Reference values quoted alongside each built-in row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceRow {
    pub params: ParamSet,
    pub delta0: Rational,
    pub epsilon: Rational,
    pub l_value: Rational,
    pub gamma0: Rational,
    pub delta1: Rational,
}

/// Rows available as built-in witnesses.
pub const REFERENCE_DIMENSIONS: [u32; 3] = [3, 4, 5];

pub fn reference_row(n: u32) -> Result<ReferenceRow> {
    let row = match n {
        3 => ReferenceRow {
            params: ParamSet::new(3, ratio(10, 11), ratio(30, 11), ratio(18, 11), ratio(3, 2))?,
            delta0: ratio(1, 3),
            epsilon: ratio(9, 11),
            l_value: ratio(71, 11),
            gamma0: ratio(77, 142),
            delta1: ratio(3, 8),
        },
        4 => ReferenceRow {
            params: ParamSet::new(4, ratio(24, 25), ratio(48, 25), ratio(51, 50), ratio(5, 4))?,
            delta0: ratio(1, 2),
            epsilon: ratio(377, 5260),
            l_value: ratio(189697, 206625),
            gamma0: ratio(276875, 569091),
            delta1: ratio(2, 3),
        },
        5 => ReferenceRow {
            params: ParamSet::new(
                5,
                ratio(10, 11),
                ratio(20, 21),
                ratio(31, 40),
                ratio(207, 250),
            )?,
            delta0: ratio(21, 22),
            epsilon: ratio(979826999, 65363627000),
            l_value: ratio(106986857, 251572482),
            gamma0: ratio(667989, 855894856),
            delta1: ratio(21, 22),
        },
        other => return Err(Error::NoReferenceRow(other)),
    };
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let r = reference_row(3).unwrap();
        assert_eq!(r.params.delta0(), ratio(1, 3));
        assert_eq!(r.params.q(), ratio(20, 11));
        assert_eq!(reference_row(4).unwrap().params.q(), ratio(192, 125));
        assert_eq!(reference_row(5).unwrap().params.q(), ratio(5000, 4347));
    }

    #[test]
    fn a_equals_b_times_delta0() {
        for n in REFERENCE_DIMENSIONS {
            let r = reference_row(n).unwrap();
            assert_eq!(r.params.b() * &r.delta0, *r.params.a());
        }
    }

    #[test]
    fn unknown_rows_and_bad_parameters() {
        assert_eq!(reference_row(6), Err(Error::NoReferenceRow(6)));
        assert!(ParamSet::new(3, ratio(1, 1), Rational::zero(), ratio(1, 1), ratio(1, 1)).is_err());
        assert!(ParamSet::new(2, ratio(1, 1), ratio(1, 1), ratio(1, 1), ratio(1, 1)).is_err());
    }

    #[test]
    fn record_rejects_inconsistent_derived_fields() {
        let p = reference_row(4).unwrap().params;
        let mut rec = ParamRecord::from(p.clone());
        assert_eq!(ParamSet::try_from(rec.clone()).unwrap(), p);
        rec.delta0 = Some(ratio(1, 3));
        assert!(ParamSet::try_from(rec).is_err());
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"delta0\":\"1/2\""));
        assert_eq!(serde_json::from_str::<ParamSet>(&json).unwrap(), p);
    }
}
