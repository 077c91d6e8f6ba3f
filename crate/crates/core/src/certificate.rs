//! Machine-readable certificates.
//!
//! Exact values are stored as strings (`"p/q"`, `"r*sqrt(s)"`); floating
//! values carry the working precision they were computed at. The exit code
//! is a pure function of a certificate's content.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iteration::RecursionRun;
use crate::optimizer::{feasibility, SearchResult};
use crate::params::ParamSet;
use crate::rational::Rational;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Exact,
    Sampled,
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Discrepancy,
    NotApplicable,
}

impl CheckStatus {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    /// Margin, residual or sample summary.
    pub value: String,
    pub status: CheckStatus,
}

impl Check {
    pub fn new(name: impl Into<String>, kind: CheckKind, value: impl ToString, status: CheckStatus) -> Self {
        Check {
            name: name.into(),
            kind,
            value: value.to_string(),
            status,
        }
    }

    /// Exact check passing iff `margin > 0` (or `>= 0` when `allow_zero`).
    pub fn margin(name: impl Into<String>, margin: &Rational, allow_zero: bool) -> Self {
        let ok = margin.is_positive() || (allow_zero && margin.is_zero());
        Check::new(name, CheckKind::Exact, margin, CheckStatus::from_bool(ok))
    }
}

/// A quoted published value next to its recomputation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub quantity: String,
    pub quoted: Rational,
    pub computed: Rational,
    pub matches: bool,
}

impl ReferenceValue {
    pub fn new(quantity: impl Into<String>, quoted: Rational, computed: Rational) -> Self {
        let matches = quoted == computed;
        ReferenceValue {
            quantity: quantity.into(),
            quoted,
            computed,
            matches,
        }
    }
}

/// Something a reader must see that is neither a pass nor a failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flag {
    pub name: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamSet>,
    /// Named values in computation order (exact strings or annotated floats).
    #[serde(default)]
    pub values: Vec<(String, String)>,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub reference_values: Vec<ReferenceValue>,
    #[serde(default)]
    pub flags: Vec<Flag>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Section {
            name: name.into(),
            n: None,
            params: None,
            values: Vec::new(),
            checks: Vec::new(),
            reference_values: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn value(&mut self, name: impl Into<String>, v: impl ToString) {
        self.values.push((name.into(), v.to_string()));
    }

    pub fn get_value(&self, name: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn get_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn reference(&mut self, r: ReferenceValue) {
        self.reference_values.push(r);
    }

    pub fn flag(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.flags.push(Flag {
            name: name.into(),
            detail: detail.into(),
        });
    }

    pub fn has_failure(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }

    pub fn discrepancies(&self) -> impl Iterator<Item = String> + '_ {
        let checks = self
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Discrepancy)
            .map(|c| c.name.clone());
        let refs = self
            .reference_values
            .iter()
            .filter(|r| !r.matches)
            .map(|r| format!("{}: quoted {} computed {}", r.quantity, r.quoted, r.computed));
        checks.chain(refs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverallStatus {
    Pass,
    PassWithDiscrepancies,
    Fail,
}

/// Run settings recorded for reproducibility.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Environment {
    pub entries: BTreeMap<String, String>,
}

impl Environment {
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.insert(key.into(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: String,
    pub command: String,
    pub environment: Environment,
    pub sections: Vec<Section>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recursion: Option<Vec<RecursionRun>>,
    pub status: OverallStatus,
}

impl Certificate {
    pub fn new(command: impl Into<String>, environment: Environment) -> Self {
        Certificate {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            environment,
            sections: Vec::new(),
            search: None,
            recursion: None,
            status: OverallStatus::Pass,
        }
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn discrepancies(&self) -> Vec<String> {
        self.sections
            .iter()
            .flat_map(|s| s.discrepancies().map(move |d| format!("{}: {d}", s.name)))
            .collect()
    }

    pub fn has_failure(&self) -> bool {
        let recursion_broken = self
            .recursion
            .iter()
            .flatten()
            .any(|r| !(r.all_within_bound && r.exponents_consistent));
        self.sections.iter().any(Section::has_failure) || recursion_broken
    }

    /// Recomputes [`Certificate::status`] from the content.
    pub fn finalize(mut self) -> Self {
        self.status = if self.has_failure() {
            OverallStatus::Fail
        } else if self.discrepancies().is_empty() {
            OverallStatus::Pass
        } else {
            OverallStatus::PassWithDiscrepancies
        };
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::MalformedCertificate(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cert: Certificate = serde_json::from_str(text).map_err(|e| Error::MalformedCertificate(e.to_string()))?;
        if cert.schema_version != SCHEMA_VERSION {
            return Err(Error::MalformedCertificate(format!(
                "unsupported schema version {}",
                cert.schema_version
            )));
        }
        Ok(cert)
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn write_atomic(&self, path: &Path) -> std::io::Result<()> {
        let json = self.to_json().map_err(std::io::Error::other)?;
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(json.as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::MalformedCertificate(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DISCREPANCY: i32 = 3;
pub const EXIT_UNCERTIFIED: i32 = 4;

/// Exit code from content only: a failed check wins, then an uncertified
/// search, then (in strict mode) any discrepancy.
pub fn exit_code(cert: &Certificate, strict: bool) -> i32 {
    if cert.has_failure() {
        EXIT_FAIL
    } else if cert.search.as_ref().is_some_and(|s| !s.certified) {
        EXIT_UNCERTIFIED
    } else if strict && !cert.discrepancies().is_empty() {
        EXIT_DISCREPANCY
    } else {
        EXIT_PASS
    }
}

/// Re-runs the exact feasibility chain on a stored search result and
/// compares every recorded margin. Returns the names of mismatches.
pub fn reverify_search(result: &SearchResult) -> Vec<String> {
    let fresh = feasibility(&result.best_params);
    let mut mismatches: Vec<String> = result
        .constraint_report
        .constraints
        .iter()
        .filter(|c| fresh.get(&c.name) != Some(c))
        .map(|c| c.name.clone())
        .collect();
    if fresh.constraints.len() != result.constraint_report.constraints.len() {
        mismatches.push("constraint count".into());
    }
    if result.certified != crate::optimizer::is_certified(&fresh) {
        mismatches.push("certified flag".into());
    }
    if result.delta0 != result.best_params.delta0() {
        mismatches.push("delta0".into());
    }
    mismatches
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn sample() -> Certificate {
        let mut env = Environment::default();
        env.set("seed", 7);
        let mut cert = Certificate::new("verify", env);
        let mut s = Section::new("row n=3");
        s.value("epsilon", ratio(9, 11));
        s.check(Check::margin("epsilon > 0", &ratio(9, 11), false));
        s.reference(ReferenceValue::new("epsilon", ratio(9, 11), ratio(9, 11)));
        cert.sections.push(s);
        cert.finalize()
    }

    #[test]
    fn round_trip() {
        let cert = sample();
        let back = Certificate::from_json(&cert.to_json().unwrap()).unwrap();
        assert_eq!(back, cert);
        assert!(cert.to_json().unwrap().contains("\"9/11\""));
    }

    #[test]
    fn exit_codes_follow_content() {
        let cert = sample();
        assert_eq!(cert.status, OverallStatus::Pass);
        assert_eq!(exit_code(&cert, true), EXIT_PASS);

        let mut d = cert.clone();
        d.sections[0].reference(ReferenceValue::new("L", ratio(1, 2), ratio(1, 3)));
        let d = d.finalize();
        assert_eq!(d.status, OverallStatus::PassWithDiscrepancies);
        assert_eq!(exit_code(&d, false), EXIT_PASS);
        assert_eq!(exit_code(&d, true), EXIT_DISCREPANCY);

        let mut f = d.clone();
        f.sections[0].check(Check::margin("bad", &ratio(-1, 2), false));
        let f = f.finalize();
        assert_eq!(f.status, OverallStatus::Fail);
        assert_eq!(exit_code(&f, true), EXIT_FAIL);
    }

    #[test]
    fn wrong_schema_rejected() {
        let json = sample().to_json().unwrap().replace("\"schema_version\": \"1\"", "\"schema_version\": \"9\"");
        assert!(Certificate::from_json(&json).is_err());
    }

    #[test]
    fn atomic_write_then_read() {
        let dir = std::env::temp_dir().join(format!("stabcert-cert-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        let cert = sample();
        cert.write_atomic(&path).unwrap();
        assert_eq!(Certificate::read(&path).unwrap(), cert);
        fs::remove_dir_all(&dir).unwrap();
    }
}
