//! End-to-end certification of the built-in rows and the iteration constants.

use serde::{Deserialize, Serialize};

use crate::bubble::{
    barrier_ode_check, bubble_constants, hbar_coefficient, mean_curv_coeff, quadform_lower_bound_check,
    spectral_coeff_check, Gamma0Convention, LMax,
};
use crate::certificate::{Certificate, Check, CheckKind, CheckStatus, Environment, ReferenceValue, Section};
use crate::curvature::{epsilon_of, hessian, pointwise_sampling_check, linearity_check};
use crate::error::{Error, Result};
use crate::hiprec::{Approx, Precision};
use crate::iteration::{
    caccioppoli_constants, critical_exponent, critical_collapse, critical_delta, degiorgi_constants, delta1_of,
    k_interval, lower_threshold, limit_absorption_coefficient, PowerValue, DEFAULT_C_MS,
};
use crate::params::{reference_row, ReferenceRow, REFERENCE_DIMENSIONS};
use crate::quadratic::f_min_numerator;
use crate::rational::Rational;
use crate::report::ConstraintReport;

pub mod names {
    pub const A_EQUALS_B_DELTA0: &str = "a = b * delta0";
    pub const FXX: &str = "f_xx > 0";
    pub const FYY: &str = "f_yy > 0";
    pub const DISC: &str = "D > 0";
    pub const HESSIAN_DET: &str = "Hessian determinant equals D";
    pub const LINEARITY: &str = "F affine in t";
    pub const EPSILON: &str = "epsilon > 0";
    pub const POINTWISE: &str = "pointwise curvature estimate (sampled)";
    pub const Q_BELOW_4: &str = "q < 4";
    pub const SPECTRAL: &str = "spectral coefficient bound";
    pub const ALPHA_BETA: &str = "alpha/beta below (n-1)/(n-2)";
    pub const QUADFORM: &str = "mean-curvature quadratic form (sampled)";
    pub const HBAR_ZERO: &str = "Hbar^2 coefficient vanishes at L_max";
    pub const GAMMA0: &str = "gamma0 > 0";
    pub const GAMMA0_FLAG: &str = "gamma0 convention";

    pub fn product_identity(convention: &str) -> String {
        format!("2(beta/alpha) x0 y0 = eps/(2 alpha) [{convention}]")
    }

    pub fn ratio_identity(convention: &str) -> String {
        format!("2(beta/alpha) y0/x0 = gamma0 [{convention}]")
    }

    pub fn barrier(convention: &str) -> String {
        format!("barrier ODE residual [{convention}]")
    }

    pub fn delta1(n: u32) -> String {
        format!("delta1({n})")
    }

    pub fn collapse(n: u32) -> String {
        format!("critical radicand is a perfect square (n = {n})")
    }

    pub fn exponent_above_critical(n: u32) -> String {
        format!("p > n just above the critical delta (n = {n})")
    }

    pub const DELTA1_SECTION: &str = "delta1 and critical exponent";
    pub const ITERATION_SECTION: &str = "iteration constants";
    pub const EPSILON1_SECTION: &str = "epsilon1 thresholds";

    pub fn row_section(n: u32) -> String {
        format!("row n={n}")
    }
}

/// Everything that influences a run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub seed: u64,
    pub pointwise_samples: u64,
    pub quadform_samples: u64,
    pub linearity_samples: u64,
    pub barrier_samples: u64,
    pub precision: Precision,
    /// Michael-Simon constant; `None` means the placeholder default and no
    /// `eps1` grid.
    pub c_ms: Option<f64>,
    pub radius: Rational,
    pub s: Rational,
    pub s1: Rational,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 2024,
            pointwise_samples: 100_000,
            quadform_samples: 10_000,
            linearity_samples: 1_000,
            barrier_samples: 1_000,
            precision: Precision::default(),
            c_ms: None,
            radius: Rational::from(1_000_000i64),
            s: Rational::from(100i64),
            s1: Rational::from(100i64),
        }
    }
}

impl Settings {
    pub fn c_ms_value(&self) -> f64 {
        self.c_ms.unwrap_or(DEFAULT_C_MS)
    }

    pub fn environment(&self) -> Environment {
        let mut env = Environment::default();
        env.set("seed", self.seed);
        env.set("pointwise_samples", self.pointwise_samples);
        env.set("quadform_samples", self.quadform_samples);
        env.set("linearity_samples", self.linearity_samples);
        env.set("barrier_samples", self.barrier_samples);
        env.set("float_precision_digits", self.precision.digits());
        match self.c_ms {
            Some(c) => env.set("c_ms", c),
            None => env.set("c_ms", format!("{DEFAULT_C_MS} (placeholder, not a physical value)")),
        }
        env.set("radius", &self.radius);
        env.set("s", &self.s);
        env.set("s1", &self.s1);
        env
    }

    /// Inverse of [`Settings::environment`].
    pub fn from_environment(env: &Environment) -> Result<Self> {
        fn get<T: std::str::FromStr>(env: &Environment, key: &str) -> Result<T> {
            env.get(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::MalformedCertificate(format!("environment entry {key}")))
        }
        let c_ms = match env.get("c_ms") {
            Some(v) if v.contains("placeholder") => None,
            Some(v) => Some(v.parse().map_err(|_| Error::MalformedCertificate("c_ms".into()))?),
            None => None,
        };
        Ok(Settings {
            seed: get(env, "seed")?,
            pointwise_samples: get(env, "pointwise_samples")?,
            quadform_samples: get(env, "quadform_samples")?,
            linearity_samples: get(env, "linearity_samples")?,
            barrier_samples: get(env, "barrier_samples")?,
            precision: Precision::new(get(env, "float_precision_digits")?)?,
            c_ms,
            radius: get(env, "radius")?,
            s: get(env, "s")?,
            s1: get(env, "s1")?,
        })
    }
}

fn approx(a: &Approx) -> String {
    format!("{} (approx, {} digits)", a.value, a.digits)
}

fn sampled(name: &str, report: &ConstraintReport) -> Check {
    let least = report
        .min_margin()
        .map(|c| c.margin.to_string())
        .unwrap_or_else(|| "none".into());
    let value = format!(
        "{} samples, {} violations, least margin {least}",
        report.samples,
        report.violations.len()
    );
    Check::new(name, CheckKind::Sampled, value, CheckStatus::from_bool(report.all_satisfied()))
}

/// Full certification of one built-in row.
pub fn row_section(n: u32, settings: &Settings) -> Result<Section> {
    let row: ReferenceRow = reference_row(n)?;
    let p = &row.params;
    let mut s = Section::new(names::row_section(n));
    s.n = Some(n);
    s.params = Some(p.clone());
    let seed = settings.seed ^ u64::from(n);

    s.check(Check::new(
        names::A_EQUALS_B_DELTA0,
        CheckKind::Exact,
        format!("{} = {} * {}", p.a(), p.b(), row.delta0),
        CheckStatus::from_bool(p.b() * &row.delta0 == *p.a()),
    ));

    let h = hessian(p)?;
    s.value("f_xx", &h.f_xx);
    s.value("f_yy", &h.f_yy);
    s.value("f_xy", &h.f_xy);
    s.value("D", &h.discriminant);
    s.check(Check::margin(names::FXX, &h.f_xx, false));
    s.check(Check::margin(names::FYY, &h.f_yy, false));
    s.check(Check::margin(names::DISC, &h.discriminant, false));
    s.check(Check::new(
        names::HESSIAN_DET,
        CheckKind::Exact,
        h.determinant(),
        CheckStatus::from_bool(h.determinant() == h.discriminant),
    ));

    let eps = epsilon_of(p)?;
    s.value("f_min numerator", f_min_numerator(n, p.a(), p.alpha(), p.beta()));
    s.value("Q = f_min / E^2", &eps.f_min_coefficient);
    s.value("F(0)", &eps.f_at_0);
    s.value("F(1)", &eps.f_at_1);
    s.value("max branch", format!("{:?}", eps.max_branch).to_lowercase());
    s.value("epsilon", &eps.epsilon);
    s.check(Check::new(
        names::LINEARITY,
        CheckKind::Sampled,
        format!("{} samples", settings.linearity_samples),
        CheckStatus::from_bool(linearity_check(p, settings.linearity_samples, seed)?),
    ));
    s.check(Check::margin(names::EPSILON, &eps.epsilon, false));
    let pointwise = pointwise_sampling_check(p, settings.pointwise_samples, seed)?;
    s.check(sampled(names::POINTWISE, &pointwise));

    for c in spectral_coeff_check(p)?.constraints {
        match c.name.as_str() {
            "q < 4" => s.check(Check::margin(names::Q_BELOW_4, &c.margin, false)),
            "spectral coefficient" => s.value("spectral coefficient", &c.margin),
            _ => s.check(Check::margin(names::SPECTRAL, &c.margin, true)),
        }
    }
    if n == 3 {
        s.check(Check::new(names::SPECTRAL, CheckKind::Exact, "n - 3 = 0", CheckStatus::NotApplicable));
    }
    s.value("q", p.q());
    let nr = p.nr();
    s.check(Check::margin(
        names::ALPHA_BETA,
        &((&nr - 1) * p.beta() - (&nr - 2) * p.alpha()),
        false,
    ));
    let mcc = mean_curv_coeff(n, p.alpha(), p.beta())?;
    s.value("mean-curvature coefficient", &mcc);
    let quad = quadform_lower_bound_check(n, p.alpha(), p.beta(), settings.quadform_samples, seed)?;
    s.check(sampled(names::QUADFORM, &quad));

    let chain = bubble_constants(p, &eps.epsilon, settings.precision)?;
    match &chain.l_max {
        LMax::Value(l) => {
            s.value("L_max", l);
            let c = hbar_coefficient(p, l)?;
            s.check(Check::new(names::HBAR_ZERO, CheckKind::Exact, &c, CheckStatus::from_bool(c.is_zero())));
            s.reference(ReferenceValue::new("L", row.l_value.clone(), l.clone()));
        }
        LMax::Unconstrained => s.value("L_max", "unconstrained (q = 2)"),
    }
    s.value("gamma0 (bare)", &chain.gamma0.bare);
    s.value("gamma0 (with beta/alpha)", &chain.gamma0.with_ratio);
    s.check(Check::margin(names::GAMMA0, &chain.gamma0.bare, false));
    s.reference(ReferenceValue::new("delta0", row.delta0.clone(), p.delta0()));
    s.reference(ReferenceValue::new("epsilon", row.epsilon.clone(), eps.epsilon.clone()));
    s.reference(ReferenceValue::new("gamma0", row.gamma0.clone(), chain.gamma0.bare.clone()));
    let quoted = &row.gamma0;
    if *quoted == chain.gamma0.bare && chain.gamma0.bare != chain.gamma0.with_ratio {
        s.flag(
            names::GAMMA0_FLAG,
            format!(
                "quoted gamma0 {quoted} equals the bare bracket; the defining expression carries a beta/alpha factor and gives {}; both are carried downstream",
                chain.gamma0.with_ratio
            ),
        );
    } else if *quoted == chain.gamma0.with_ratio {
        s.flag(names::GAMMA0_FLAG, format!("quoted gamma0 {quoted} equals the with-ratio value"));
    } else {
        s.flag(names::GAMMA0_FLAG, format!("quoted gamma0 {quoted} matches neither convention"));
    }

    for b in &chain.branches {
        let label = b.convention.label();
        s.value(format!("x0 [{label}]"), &b.x0);
        s.value(format!("y0 [{label}]"), &b.y0);
        s.check(Check::new(
            names::product_identity(label),
            CheckKind::Exact,
            &eps.epsilon / (2 * p.alpha()),
            CheckStatus::from_bool(b.product_identity),
        ));
        s.check(Check::new(
            names::ratio_identity(label),
            CheckKind::Exact,
            &b.gamma0,
            CheckStatus::from_bool(b.ratio_identity),
        ));
        let ode = barrier_ode_check(&b.x0, &b.y0, settings.barrier_samples, settings.precision)?;
        s.check(Check::new(
            names::barrier(label),
            CheckKind::Approximate,
            format!(
                "{} samples, max |residual|/(1+eta^2) = {}, tolerance {:e}",
                ode.samples,
                approx(&ode.max_scaled_residual),
                ode.tolerance
            ),
            CheckStatus::from_bool(ode.passed()),
        ));
        s.value(format!("growth base (n-2) alpha/eps [{label}]"), &b.growth.base);
        s.value(format!("area constant [{label}]"), approx(&b.growth.area_const));
        s.value(format!("volume constant [{label}]"), approx(&b.growth.volume_const));
    }
    if n == 3 {
        s.flag(
            "volume growth for n = 3",
            "computed with the general formulas; the argument itself uses Gauss-Bonnet here, so the area-estimate hypothesis check does not apply",
        );
    }
    Ok(s)
}

pub fn delta1_section() -> Result<Section> {
    let mut s = Section::new(names::DELTA1_SECTION);
    for n in REFERENCE_DIMENSIONS {
        let row = reference_row(n)?;
        let d1 = delta1_of(n)?;
        s.value(format!("delta_c({n})"), critical_delta(n));
        s.value(names::delta1(n), &d1);
        s.reference(ReferenceValue::new(names::delta1(n), row.delta1.clone(), d1.clone()));
        s.check(Check::new(
            names::delta1(n),
            CheckKind::Exact,
            &d1,
            CheckStatus::from_bool(d1 == row.delta1),
        ));
    }
    for n in 3..=12u32 {
        let root = critical_collapse(n)?;
        let nr = Rational::from(n);
        let expected = (&nr - 2).square() / (4 * (&nr - 1));
        s.check(Check::new(
            names::collapse(n),
            CheckKind::Exact,
            &root,
            CheckStatus::from_bool(root == expected && critical_delta(n) + &root == (&nr - 2) / 2),
        ));
        let c = critical_exponent(n, &(critical_delta(n) + Rational::new(1, 1000)))?;
        s.check(Check::new(
            names::exponent_above_critical(n),
            CheckKind::Exact,
            format!("p = {}", c.p),
            CheckStatus::from_bool(c.p_exceeds_n),
        ));
    }
    Ok(s)
}

/// Admissible `k`, Caccioppoli and De Giorgi constants at `delta = delta1(n)`.
pub fn iteration_section(settings: &Settings) -> Result<Section> {
    let mut s = Section::new(names::ITERATION_SECTION);
    for n in REFERENCE_DIMENSIONS {
        let delta = delta1_of(n)?;
        let interval = k_interval(n, &delta)?;
        let k = &delta / 2;
        s.value(format!("k-interval radicand (n = {n})"), &interval.radicand);
        if let (Some(lo), Some(hi)) = (&interval.lower, &interval.upper) {
            s.value(format!("2k range (n = {n})"), format!("({lo}, {hi})"));
        }
        s.check(Check::new(
            format!("2k = delta lies in the admissible interval (n = {n})"),
            CheckKind::Exact,
            &delta,
            CheckStatus::from_bool(interval.contains(&delta)),
        ));
        let limit = limit_absorption_coefficient(n, &delta, &k, None)?;
        s.check(Check::margin(format!("limit absorption coefficient (n = {n})"), &limit, false));
        let cacc = caccioppoli_constants(n, &delta, &k, &settings.s, &settings.s1, settings.precision)?;
        s.value(format!("C1 (n = {n})"), &cacc.c1);
        s.value(format!("p = 4k + 2 (n = {n})"), &cacc.p);
        s.value(
            format!("C2 (n = {n})"),
            match &cacc.c2 {
                PowerValue::Exact(v) => v.to_string(),
                PowerValue::Approx(a) => approx(a),
            },
        );
        s.check(Check::new(
            format!("both absorption coefficients positive (n = {n})"),
            CheckKind::Exact,
            format!("{}, {}", cacc.first.positivity, cacc.second.positivity),
            CheckStatus::from_bool(cacc.both_positive),
        ));
        let q = (lower_threshold(n) + &delta) / 2;
        let dg = degiorgi_constants(n, &delta, &q, settings.c_ms_value(), &settings.radius, settings.precision)?;
        s.value(format!("q for C0 (n = {n})"), &q);
        s.value(format!("log2 C (n = {n})"), &dg.c_exponent);
        s.value(format!("C0 (n = {n})"), approx(&dg.c0));
        s.value(format!("R exponents (n = {n})"), format!("{}, {}", dg.r_exponents.0, dg.r_exponents.1));
        s.value(format!("hypothesis R exponent (n = {n})"), &dg.hypothesis_exponent);
    }
    if settings.c_ms.is_none() {
        s.flag("C_MS", format!("placeholder value {DEFAULT_C_MS}; not a physical constant"));
    }
    Ok(s)
}

/// `(n, q, delta)` grid for the `eps1` table: `delta` at `delta1(n)` and at 1,
/// `q` at the middle of `((n-2)/n, delta)`.
pub fn epsilon1_grid() -> Result<Vec<(u32, Rational, Rational)>> {
    let mut grid = vec![(3, Rational::new(1, 2), Rational::one())];
    for n in REFERENCE_DIMENSIONS {
        for delta in [delta1_of(n)?, Rational::one()] {
            let q = (lower_threshold(n) + &delta) / 2;
            grid.push((n, q, delta));
        }
    }
    Ok(grid)
}

pub fn epsilon1_section(settings: &Settings) -> Result<Section> {
    let mut s = Section::new(names::EPSILON1_SECTION);
    let c_ms = settings.c_ms_value();
    for (n, q, delta) in epsilon1_grid()? {
        let dg = degiorgi_constants(n, &delta, &q, c_ms, &settings.radius, settings.precision)?;
        s.value(
            format!("eps1 (n = {n}, q = {q}, delta = {delta})"),
            format!(
                "critical {}, threshold {} (factor {})",
                approx(&dg.epsilon1.critical),
                approx(&dg.epsilon1.threshold),
                dg.epsilon1.safety_factor
            ),
        );
    }
    Ok(s)
}

pub fn verify(n: u32, settings: &Settings) -> Result<Certificate> {
    let mut cert = Certificate::new(format!("verify {n}"), settings.environment());
    cert.sections.push(row_section(n, settings)?);
    Ok(cert.finalize())
}

pub fn verify_all(settings: &Settings) -> Result<Certificate> {
    let mut cert = Certificate::new("verify-all", settings.environment());
    for n in REFERENCE_DIMENSIONS {
        cert.sections.push(row_section(n, settings)?);
    }
    cert.sections.push(delta1_section()?);
    cert.sections.push(iteration_section(settings)?);
    if settings.c_ms.is_some() {
        cert.sections.push(epsilon1_section(settings)?);
    }
    Ok(cert.finalize())
}

/// Recomputes every row section from the certificate's recorded settings and
/// lists checks or values that differ.
pub fn reverify(cert: &Certificate) -> Result<Vec<String>> {
    let settings = Settings::from_environment(&cert.environment)?;
    let mut mismatches = Vec::new();
    for stored in &cert.sections {
        let Some(n) = stored.n else { continue };
        let fresh = row_section(n, &settings)?;
        if fresh.params != stored.params {
            mismatches.push(format!("{}: params", stored.name));
        }
        for c in &stored.checks {
            if fresh.get_check(&c.name) != Some(c) {
                mismatches.push(format!("{}: {}", stored.name, c.name));
            }
        }
        for (k, v) in &stored.values {
            if fresh.get_value(k) != Some(v.as_str()) {
                mismatches.push(format!("{}: {k}", stored.name));
            }
        }
    }
    if let Some(search) = &cert.search {
        mismatches.extend(crate::certificate::reverify_search(search));
    }
    Ok(mismatches)
}

/// `gamma0` under one convention, for reports.
pub fn gamma0_label(c: Gamma0Convention) -> &'static str {
    c.label()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> Settings {
        Settings {
            pointwise_samples: 2_000,
            quadform_samples: 500,
            linearity_samples: 50,
            barrier_samples: 50,
            ..Settings::default()
        }
    }

    #[test]
    fn row3_certificate() {
        let s = row_section(3, &fast()).unwrap();
        assert!(!s.has_failure(), "{:?}", s.checks);
        assert_eq!(s.get_value("epsilon"), Some("9/11"));
        assert_eq!(s.get_check(names::SPECTRAL).unwrap().status, CheckStatus::NotApplicable);
        assert!(s.flags.iter().any(|f| f.name == names::GAMMA0_FLAG));
        assert_eq!(s.discrepancies().count(), 0);
    }

    #[test]
    fn settings_round_trip_through_environment() {
        let mut s = fast();
        s.c_ms = Some(2.5);
        assert_eq!(Settings::from_environment(&s.environment()).unwrap(), s);
        let d = Settings::default();
        assert_eq!(Settings::from_environment(&d.environment()).unwrap(), d);
    }

    #[test]
    fn verify_all_sections() {
        let mut s = fast();
        s.c_ms = Some(1.0);
        let cert = verify_all(&s).unwrap();
        assert_eq!(cert.sections.len(), 6);
        assert!(!cert.has_failure(), "{:?}", cert.sections.iter().flat_map(|s| s.checks.iter().filter(|c| c.status == CheckStatus::Fail)).collect::<Vec<_>>());
        assert!(reverify(&cert).unwrap().is_empty());
    }
}
