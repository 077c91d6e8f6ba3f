//! `key = value` run configuration. Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use stabcert::hiprec::Precision;
use stabcert::Rational;

pub const KEYS: &[&str] = &[
    "seed",
    "c_ms",
    "radius",
    "s",
    "s1",
    "float_precision_digits",
    "pointwise_samples",
    "quadform_samples",
    "linearity_samples",
    "barrier_samples",
    "budget",
    "denominator_bound",
    "out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Parsed configuration. Every field is optional; unset fields fall back to
/// the library defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub c_ms: Option<f64>,
    pub radius: Option<Rational>,
    pub s: Option<Rational>,
    pub s1: Option<Rational>,
    pub precision: Option<Precision>,
    pub pointwise_samples: Option<u64>,
    pub quadform_samples: Option<u64>,
    pub linearity_samples: Option<u64>,
    pub barrier_samples: Option<u64>,
    pub budget: Option<u64>,
    pub denominator_bound: Option<u64>,
    pub out: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError(format!("invalid value for {key}: {v:?}")))
}

/// Exact rational from `p/q`, a decimal, or scientific notation such as `1e6`.
pub fn parse_rational(key: &str, v: &str) -> Result<Rational, ConfigError> {
    v.parse::<Rational>()
        .ok()
        .or_else(|| v.trim().parse::<f64>().ok().and_then(Rational::from_f64_exact))
        .ok_or_else(|| ConfigError(format!("invalid value for {key}: {v:?}")))
}

pub fn parse_c_ms(v: &str) -> Result<f64, ConfigError> {
    let c: f64 = parse("c_ms", v)?;
    if c.is_finite() && c > 0.0 {
        Ok(c)
    } else {
        Err(ConfigError(format!("c_ms must be positive and finite, got {v}")))
    }
}

pub fn parse_radius(v: &str) -> Result<Rational, ConfigError> {
    let r = parse_rational("radius", v)?;
    if r > 1 {
        Ok(r)
    } else {
        Err(ConfigError(format!("radius must exceed 1, got {v}")))
    }
}

fn positive_count(key: &str, v: &str) -> Result<u64, ConfigError> {
    match parse::<u64>(key, v)? {
        0 => Err(ConfigError(format!("{key} must be positive"))),
        c => Ok(c),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(ConfigError(format!("line {}: unknown key {k:?}", i + 1)));
            }
            if v.is_empty() {
                return Err(ConfigError(format!("line {}: empty value for {k}", i + 1)));
            }
            if seen.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError(format!("line {}: duplicate key {k}", i + 1)));
            }
        }
        let mut c = RunConfig::default();
        for (k, v) in &seen {
            match k.as_str() {
                "seed" => c.seed = Some(parse(k, v)?),
                "c_ms" => c.c_ms = Some(parse_c_ms(v)?),
                "radius" => c.radius = Some(parse_radius(v)?),
                "s" => c.s = Some(parse_rational(k, v)?),
                "s1" => c.s1 = Some(parse_rational(k, v)?),
                "float_precision_digits" => {
                    c.precision = Some(Precision::new(parse(k, v)?).map_err(|e| ConfigError(e.to_string()))?)
                }
                "pointwise_samples" => c.pointwise_samples = Some(positive_count(k, v)?),
                "quadform_samples" => c.quadform_samples = Some(positive_count(k, v)?),
                "linearity_samples" => c.linearity_samples = Some(positive_count(k, v)?),
                "barrier_samples" => c.barrier_samples = Some(positive_count(k, v)?),
                "budget" => c.budget = Some(positive_count(k, v)?),
                "denominator_bound" => c.denominator_bound = Some(parse(k, v)?),
                "out" => c.out = Some(PathBuf::from(v)),
                _ => unreachable!("key list checked above"),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn apply(&self, s: &mut stabcert::Settings) {
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.c_ms {
            s.c_ms = Some(v);
        }
        if let Some(v) = &self.radius {
            s.radius = v.clone();
        }
        if let Some(v) = &self.s {
            s.s = v.clone();
        }
        if let Some(v) = &self.s1 {
            s.s1 = v.clone();
        }
        if let Some(v) = self.precision {
            s.precision = v;
        }
        if let Some(v) = self.pointwise_samples {
            s.pointwise_samples = v;
        }
        if let Some(v) = self.quadform_samples {
            s.quadform_samples = v;
        }
        if let Some(v) = self.linearity_samples {
            s.linearity_samples = v;
        }
        if let Some(v) = self.barrier_samples {
            s.barrier_samples = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# nothing\n\n   \n").unwrap(), RunConfig::default());
    }

    #[test]
    fn parses_values() {
        let c = RunConfig::parse("c_ms = 2.5\nradius = 1e6  # metres\ns1 = 3/2\nseed=7\n").unwrap();
        assert_eq!(c.c_ms, Some(2.5));
        assert_eq!(c.radius, Some(Rational::from(1_000_000i64)));
        assert_eq!(c.s1, Some(Rational::new(3, 2)));
        assert_eq!(c.seed, Some(7));
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "c_ms",
            "colour = red",
            "seed = x",
            "seed = 1\nseed = 2",
            "float_precision_digits = 20",
            "radius = 1",
            "c_ms = -1",
            "pointwise_samples = 0",
            "s = ",
        ] {
            assert!(RunConfig::parse(bad).is_err(), "{bad}");
        }
    }
}
