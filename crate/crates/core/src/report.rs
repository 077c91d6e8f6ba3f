use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// How a margin is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginRule {
    /// Must be strictly positive.
    Positive,
    /// Zero allowed (binding constraints such as the Young-parameter choice).
    NonNegative,
    /// Recorded only.
    Informational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub margin: Rational,
    pub rule: MarginRule,
}

impl Constraint {
    pub fn satisfied(&self) -> bool {
        match self.rule {
            MarginRule::Positive => self.margin.is_positive(),
            MarginRule::NonNegative => !self.margin.is_negative(),
            MarginRule::Informational => true,
        }
    }
}

/// A falsifying sample from a randomized check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub witness: String,
    pub margin: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub constraints: Vec<Constraint>,
    /// Number of random samples drawn, for sampled checks.
    #[serde(default)]
    pub samples: u64,
    #[serde(default)]
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, margin: Rational, rule: MarginRule) {
        self.constraints.push(Constraint {
            name: name.into(),
            margin,
            rule,
        });
    }

    pub fn get(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    pub fn margin(&self, name: &str) -> Option<&Rational> {
        self.get(name).map(|c| &c.margin)
    }

    pub fn all_satisfied(&self) -> bool {
        self.violations.is_empty() && self.constraints.iter().all(Constraint::satisfied)
    }

    pub fn failing(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(|c| !c.satisfied())
    }

    /// Smallest margin among judged (non-informational) constraints.
    pub fn min_margin(&self) -> Option<&Constraint> {
        self.constraints
            .iter()
            .filter(|c| c.rule != MarginRule::Informational)
            .min_by(|x, y| x.margin.cmp(&y.margin))
    }

    pub fn extend(&mut self, other: ConstraintReport) {
        self.constraints.extend(other.constraints);
        self.samples += other.samples;
        self.violations.extend(other.violations);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn rules() {
        let mut r = ConstraintReport::new();
        r.push("p", ratio(1, 2), MarginRule::Positive);
        r.push("z", Rational::zero(), MarginRule::NonNegative);
        r.push("info", ratio(-1, 1), MarginRule::Informational);
        assert!(r.all_satisfied());
        assert_eq!(r.min_margin().unwrap().name, "z");
        r.push("bad", Rational::zero(), MarginRule::Positive);
        assert!(!r.all_satisfied());
        assert_eq!(r.failing().count(), 1);
    }

    #[test]
    fn violations_fail_the_report() {
        let mut r = ConstraintReport::new();
        r.violations.push(Violation {
            check: "sampled".into(),
            witness: "lambda = (1/1)".into(),
            margin: "-1/1".into(),
        });
        assert!(!r.all_satisfied());
    }
}
