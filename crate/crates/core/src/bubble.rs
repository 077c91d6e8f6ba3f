//! The mu-bubble coefficient chain.
//!
//! With `q = b / beta`, the chain runs
//! spectral coefficient `4/(4-q) * beta/alpha`, mean-curvature coefficient,
//! Young parameter `L`, the `h^2` coefficient `gamma0`, the barrier
//! constants `x0, y0`, and finally the area and volume growth constants.
//! Everything is exact except the growth constants and the barrier ODE
//! residuals, which are irrational and carried as [`Approx`] values.

use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hiprec::{
    format_sig, unit_ball_volume, unit_sphere_area, Approx, Precision, REPORT_DIGITS,
};
use crate::params::ParamSet;
use crate::quadratic::check_dimension;
use crate::rational::Rational;
use crate::report::{ConstraintReport, MarginRule, Violation};
use crate::sampling::{par_chunks, random_rational};
use crate::surd::{QuadSurd, SurdValue};

fn infeasible(msg: impl Into<String>) -> Error {
    Error::Infeasible(msg.into())
}

fn check_q(q: &Rational) -> Result<()> {
    if !q.is_positive() || *q >= 4 {
        return Err(infeasible(format!("q = {q} must lie in (0, 4)")));
    }
    Ok(())
}

/// `4/(4-q) * beta/alpha`.
pub fn spectral_coefficient(params: &ParamSet) -> Result<Rational> {
    let q = params.q();
    check_q(&q)?;
    Ok(Rational::from(4i64) / (4 - q) * params.beta() / params.alpha())
}

/// Margin of `q < 4` and, for `n >= 4`, of the bound `(n-2)/(n-3)` on the
/// spectral coefficient. For `n = 3` the bound is absent from the report.
pub fn spectral_coeff_check(params: &ParamSet) -> Result<ConstraintReport> {
    let coeff = spectral_coefficient(params)?;
    let mut report = ConstraintReport::new();
    report.push("q < 4", 4 - params.q(), MarginRule::Positive);
    report.push(
        "spectral coefficient",
        coeff.clone(),
        MarginRule::Informational,
    );
    if params.n() >= 4 {
        let n = params.nr();
        let bound = (&n - 2) / (&n - 3);
        report.push(
            "spectral coefficient bound",
            bound - coeff,
            MarginRule::NonNegative,
        );
    }
    Ok(report)
}

/// `(4 beta^2 - (n-2) alpha^2) / (4 beta [(n-1) beta - (n-2) alpha])`.
pub fn mean_curv_coeff(n: u32, alpha: &Rational, beta: &Rational) -> Result<Rational> {
    check_dimension(n)?;
    let nr = Rational::from(n);
    let ratio = alpha / beta;
    if ratio >= (&nr - 1) / (&nr - 2) {
        return Err(infeasible(format!(
            "alpha/beta = {ratio} must be below (n-1)/(n-2)"
        )));
    }
    let den_inner = (&nr - 1) * beta - (&nr - 2) * alpha;
    if !den_inner.is_positive() {
        return Err(infeasible(format!(
            "(n-1) beta - (n-2) alpha = {den_inner} must be positive"
        )));
    }
    let num = 4 * beta.square() - (&nr - 2) * alpha.square();
    Ok(num / (4 * beta * den_inner))
}

/// Coefficients `(A, B, C)` of `A mu^2 + B H mu + C H^2`.
fn quadform(n: u32, alpha: &Rational, beta: &Rational) -> (Rational, Rational, Rational) {
    let nr = Rational::from(n);
    let r = alpha / beta;
    let a = (&nr - 1) / (&nr - 2) - &r;
    let b = (&nr - 3) * &r / (&nr - 1);
    let c = (1 + &r * (&nr - 2) / (&nr - 1)) / (&nr - 1);
    (a, b, c)
}

fn quadform_eval(coeffs: &(Rational, Rational, Rational), mu: &Rational, h: &Rational) -> Rational {
    let (a, b, c) = coeffs;
    a * mu.square() + b * h * mu + c * h.square()
}

/// Randomized exact check that the quadratic form in `(mu1, Hbar)` dominates
/// `mean_curv_coeff * Hbar^2`, plus exact tightness at the vertex in `mu1`.
pub fn quadform_lower_bound_check(
    n: u32,
    alpha: &Rational,
    beta: &Rational,
    sample_count: u64,
    seed: u64,
) -> Result<ConstraintReport> {
    let coeff = mean_curv_coeff(n, alpha, beta)?;
    let form = quadform(n, alpha, beta);
    let chunks = par_chunks(sample_count, seed, |rng, count| {
        let mut least: Option<Rational> = None;
        let mut violations = Vec::new();
        for _ in 0..count {
            let mu = random_rational(rng, 50, 13);
            let h = random_rational(rng, 50, 13);
            let margin = quadform_eval(&form, &mu, &h) - &coeff * h.square();
            // vertex of the parabola in mu
            let vertex = -(&form.1 * &h) / (2 * &form.0);
            let gap = quadform_eval(&form, &vertex, &h) - &coeff * h.square();
            if margin.is_negative() {
                violations.push(Violation {
                    check: "mean-curvature quadratic form".into(),
                    witness: format!("mu1 = {mu}, Hbar = {h}"),
                    margin: margin.to_string(),
                });
            }
            if !gap.is_zero() {
                violations.push(Violation {
                    check: "mean-curvature vertex tightness".into(),
                    witness: format!("Hbar = {h}"),
                    margin: gap.to_string(),
                });
            }
            if least.as_ref().is_none_or(|l| margin < *l) {
                least = Some(margin);
            }
        }
        violations.truncate(8);
        (least, violations)
    });
    let mut report = ConstraintReport::new();
    report.samples = sample_count;
    let mut least: Option<Rational> = None;
    for (m, v) in chunks {
        report.violations.extend(v);
        if let Some(m) = m {
            if least.as_ref().is_none_or(|l| m < *l) {
                least = Some(m);
            }
        }
    }
    report.push(
        "mean-curvature coefficient",
        coeff,
        MarginRule::Informational,
    );
    if let Some(m) = least {
        report.push(
            "quadratic form: least sampled margin",
            m,
            MarginRule::NonNegative,
        );
    }
    Ok(report)
}

/// `|1/2 - 1/q|`.
fn young_gap(q: &Rational) -> Rational {
    (Rational::new(1, 2) - q.recip().expect("q > 0")).abs()
}

/// Binding Young parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LMax {
    Value(Rational),
    /// `q = 2`: the Young term vanishes and any `L` works.
    Unconstrained,
}

impl LMax {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LMax::Value(v) => Some(v),
            LMax::Unconstrained => None,
        }
    }
}

/// `H^2` coefficient `mean_curv_coeff + 1/q - 1 - L |1/2 - 1/q|`.
pub fn hbar_coefficient(params: &ParamSet, l: &Rational) -> Result<Rational> {
    let q = params.q();
    check_q(&q)?;
    let mcc = mean_curv_coeff(params.n(), params.alpha(), params.beta())?;
    Ok(mcc + q.recip()? - 1 - l * young_gap(&q))
}

/// Largest `L` keeping the `H^2` coefficient nonnegative.
pub fn l_max(params: &ParamSet) -> Result<LMax> {
    let q = params.q();
    check_q(&q)?;
    let mcc = mean_curv_coeff(params.n(), params.alpha(), params.beta())?;
    let num = mcc + q.recip()? - 1;
    if !num.is_positive() {
        return Err(infeasible(format!(
            "mean-curvature coefficient + 1/q - 1 = {num} must be positive"
        )));
    }
    let gap = young_gap(&q);
    if gap.is_zero() {
        return Ok(LMax::Unconstrained);
    }
    Ok(LMax::Value(num / gap))
}

/// `gamma0` with and without the trailing `beta/alpha` factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gamma0 {
    pub bare: Rational,
    pub with_ratio: Rational,
}

impl Gamma0 {
    pub fn get(&self, convention: Gamma0Convention) -> &Rational {
        match convention {
            Gamma0Convention::Bare => &self.bare,
            Gamma0Convention::WithRatio => &self.with_ratio,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma0Convention {
    Bare,
    WithRatio,
}

impl Gamma0Convention {
    pub const ALL: [Gamma0Convention; 2] = [Gamma0Convention::Bare, Gamma0Convention::WithRatio];

    pub fn label(self) -> &'static str {
        match self {
            Gamma0Convention::Bare => "bare",
            Gamma0Convention::WithRatio => "with_ratio",
        }
    }
}

/// `1/q - |1/2 - 1/q| / L`; `l = None` stands for an unconstrained `L`
/// (only meaningful at `q = 2`, where the second term vanishes).
pub fn gamma0(params: &ParamSet, l: Option<&Rational>) -> Result<Gamma0> {
    let q = params.q();
    check_q(&q)?;
    let gap = young_gap(&q);
    let penalty = match l {
        Some(l) if !l.is_positive() => {
            return Err(Error::OutOfRange {
                what: "Young parameter L (must be positive)",
                value: l.to_string(),
            })
        }
        Some(l) => &gap / l,
        None if gap.is_zero() => Rational::zero(),
        None => return Err(infeasible("L is only free when q = 2")),
    };
    let bare = q.recip()? - penalty;
    let with_ratio = &bare * params.beta() / params.alpha();
    Ok(Gamma0 { bare, with_ratio })
}

/// `x0 = sqrt(eps / (2 alpha gamma))`, `y0 = sqrt(alpha eps gamma / 2) / (2 beta)`.
pub fn x0_y0(
    alpha: &Rational,
    beta: &Rational,
    epsilon: &Rational,
    gamma: &Rational,
) -> Result<(QuadSurd, QuadSurd)> {
    if !epsilon.is_positive() || !gamma.is_positive() {
        return Err(infeasible(format!(
            "epsilon = {epsilon} and gamma0 = {gamma} must be positive"
        )));
    }
    let x0 = QuadSurd::sqrt(epsilon / (2 * alpha * gamma))?.normalized();
    let y0 = QuadSurd::new((2 * beta).recip()?, alpha * epsilon * gamma / 2)?.normalized();
    Ok((x0, y0))
}

/// `2 (beta/alpha) x0 y0 = eps / (2 alpha)` and `2 (beta/alpha) y0/x0 = gamma`.
pub fn surd_identities(
    alpha: &Rational,
    beta: &Rational,
    epsilon: &Rational,
    gamma: &Rational,
    x0: &QuadSurd,
    y0: &QuadSurd,
) -> Result<(bool, bool)> {
    let k = 2 * beta / alpha;
    let as_exact = |v: SurdValue| v.to_surd().scale(&k);
    let prod = as_exact(x0.mul(y0));
    let quot = as_exact(y0.div(x0)?);
    let first = prod.value_eq(&QuadSurd::from_rational(epsilon / (2 * alpha)));
    let second = quot.value_eq(&QuadSurd::from_rational(gamma.clone()));
    Ok((first, second))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub samples: u64,
    pub breaches: u64,
    /// Largest `|residual| / (1 + eta^2)` seen.
    pub max_scaled_residual: Approx,
    pub tolerance: f64,
}

impl BarrierReport {
    pub fn passed(&self) -> bool {
        self.breaches == 0
    }
}

pub const BARRIER_TOLERANCE: f64 = 1e-9;

/// Checks `eta' + x0 y0 + (y0/x0) eta^2 = 0` for
/// `eta(t) = -x0 tan(y0 t - pi/2)` on an even grid inside `(0, pi/y0)`,
/// with `eta'` from a central difference whose step shrinks with the
/// distance to the poles.
pub fn barrier_ode_check(
    x0: &QuadSurd,
    y0: &QuadSurd,
    sample_count: u64,
    precision: Precision,
) -> Result<BarrierReport> {
    if !x0.is_positive() || !y0.is_positive() {
        return Err(infeasible("x0 and y0 must be positive"));
    }
    let bits = precision.bits();
    let x = x0.to_float(bits);
    let y = y0.to_float(bits);
    let pi = precision.pi();
    let half_pi = Float::with_val(bits, &pi / 2u32);
    let span = Float::with_val(bits, &pi / &y);
    let margin = Float::with_val(bits, &span * 1e-6);
    let eta = |t: &Float| -> Float {
        let arg = Float::with_val(bits, &y * t) - &half_pi;
        -Float::with_val(bits, &x * arg.tan())
    };
    let xy = Float::with_val(bits, &x * &y);
    let y_over_x = Float::with_val(bits, &y / &x);
    let inner = Float::with_val(bits, &span - Float::with_val(bits, &margin * 2u32));
    let mut worst = Float::with_val(bits, 0);
    let mut breaches = 0;
    for i in 1..=sample_count {
        let frac = Float::with_val(bits, i) / (sample_count + 1);
        let t = Float::with_val(bits, &margin + Float::with_val(bits, &inner * frac));
        let dist_left = t.clone();
        let dist_right = Float::with_val(bits, &span - &t);
        let dist = if dist_left < dist_right {
            dist_left
        } else {
            dist_right
        };
        let h = Float::with_val(bits, &dist * 1e-12);
        let plus = eta(&Float::with_val(bits, &t + &h));
        let minus = eta(&Float::with_val(bits, &t - &h));
        let deriv = Float::with_val(bits, &plus - &minus) / Float::with_val(bits, &h * 2u32);
        let e = eta(&t);
        let e2 = Float::with_val(bits, e.square_ref());
        let residual = deriv + &xy + Float::with_val(bits, &y_over_x * &e2);
        let scaled = Float::with_val(bits, residual.abs_ref()) / (e2 + 1u32);
        if scaled > BARRIER_TOLERANCE {
            breaches += 1;
        }
        if scaled > worst {
            worst = scaled;
        }
    }
    Ok(BarrierReport {
        samples: sample_count,
        breaches,
        max_scaled_residual: Approx {
            value: format_sig(&worst, REPORT_DIGITS),
            digits: precision.digits(),
        },
        tolerance: BARRIER_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    /// Exact base `(n-2) alpha / eps`.
    pub base: Rational,
    pub area_const: Approx,
    pub volume_const: Approx,
}

/// `area = base^{(n-1)/2} |S^{n-1}|` and
/// `Lambda = base^{n/2} |B^n| (2 exp(3 pi / y0))^n`.
pub fn growth_constants(
    n: u32,
    alpha: &Rational,
    epsilon: &Rational,
    y0: &QuadSurd,
    precision: Precision,
) -> Result<GrowthConstants> {
    check_dimension(n)?;
    if !epsilon.is_positive() || !y0.is_positive() {
        return Err(infeasible("epsilon and y0 must be positive"));
    }
    let bits = precision.bits();
    let base = Rational::from(n - 2) * alpha / epsilon;
    let base_f = base.to_float(bits);
    let sqrt_base = Float::with_val(bits, base_f.sqrt_ref());
    let area = Float::with_val(bits, (&sqrt_base).pow(n - 1)) * unit_sphere_area(n, precision);
    let y = y0.to_float(bits);
    let growth = (Float::with_val(bits, precision.pi() * 3u32) / y).exp() * 2u32;
    let volume = Float::with_val(bits, (&sqrt_base).pow(n))
        * unit_ball_volume(n, precision)
        * Float::with_val(bits, (&growth).pow(n));
    Ok(GrowthConstants {
        base,
        area_const: Approx::from_float(&area, precision),
        volume_const: Approx::from_float(&volume, precision),
    })
}

/// One `gamma0` convention carried through the barrier and growth step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleBranch {
    pub convention: Gamma0Convention,
    pub gamma0: Rational,
    pub x0: QuadSurd,
    pub y0: QuadSurd,
    pub product_identity: bool,
    pub ratio_identity: bool,
    pub growth: GrowthConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleConstants {
    pub q: Rational,
    pub spectral_coeff: Rational,
    pub mean_curv_coeff: Rational,
    pub l_max: LMax,
    pub gamma0: Gamma0,
    pub branches: Vec<BubbleBranch>,
}

impl BubbleConstants {
    pub fn branch(&self, convention: Gamma0Convention) -> &BubbleBranch {
        self.branches
            .iter()
            .find(|b| b.convention == convention)
            .expect("both conventions are always computed")
    }
}

/// The whole chain at `L = L_max`, for both `gamma0` conventions.
pub fn bubble_constants(
    params: &ParamSet,
    epsilon: &Rational,
    precision: Precision,
) -> Result<BubbleConstants> {
    let spectral_coeff = spectral_coefficient(params)?;
    let mcc = mean_curv_coeff(params.n(), params.alpha(), params.beta())?;
    let l = l_max(params)?;
    let g = gamma0(params, l.value())?;
    if !g.bare.is_positive() {
        return Err(infeasible(format!("gamma0 = {} must be positive", g.bare)));
    }
    let mut branches = Vec::with_capacity(2);
    for convention in Gamma0Convention::ALL {
        let gamma = g.get(convention).clone();
        let (x0, y0) = x0_y0(params.alpha(), params.beta(), epsilon, &gamma)?;
        let (product_identity, ratio_identity) =
            surd_identities(params.alpha(), params.beta(), epsilon, &gamma, &x0, &y0)?;
        let growth = growth_constants(params.n(), params.alpha(), epsilon, &y0, precision)?;
        branches.push(BubbleBranch {
            convention,
            gamma0: gamma,
            x0,
            y0,
            product_identity,
            ratio_identity,
            growth,
        });
    }
    Ok(BubbleConstants {
        q: params.q(),
        spectral_coeff,
        mean_curv_coeff: mcc,
        l_max: l,
        gamma0: g,
        branches,
    })
}
