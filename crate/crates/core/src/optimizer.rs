//! Parameter search over `(b, alpha, beta)` with exact recertification.
//!
//! The inner loop runs on an `f64` mirror of the constraint chain and
//! maximizes the smallest normalized margin. Floating candidates are rounded
//! to rationals by continued fractions and only count once [`feasibility`]
//! accepts them in exact arithmetic. The Young parameter is always taken at
//! its binding value `L_max`, which maximizes `gamma0` among admissible `L`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bubble::{gamma0, l_max, mean_curv_coeff, spectral_coefficient, LMax};
use crate::curvature::epsilon_of;
use crate::error::{out_of_range, Error, Result};
use crate::params::{reference_row, ParamSet};
use crate::quadratic::hessian_conditions;
use crate::rational::Rational;
use crate::report::{ConstraintReport, MarginRule};
use crate::sampling::chunk_rng;

pub const FXX: &str = "f_xx > 0";
pub const FYY: &str = "f_yy > 0";
pub const DISC: &str = "D > 0";
pub const F_AT_0: &str = "F(0)";
pub const F_AT_1: &str = "F(1)";
pub const EPSILON: &str = "epsilon > 0";
pub const Q_BELOW_4: &str = "q < 4";
pub const SPECTRAL: &str = "spectral coefficient bound";
pub const ALPHA_BETA: &str = "(n-1) beta - (n-2) alpha > 0";
pub const L_NUMERATOR: &str = "mean-curvature coefficient + 1/q - 1 > 0";
pub const GAMMA0: &str = "gamma0 > 0";
pub const HBAR: &str = "Hbar^2 coefficient at L_max";

/// Judged constraints in the order used by the floating mirror.
pub const JUDGED: [&str; 9] = [
    FXX,
    FYY,
    DISC,
    EPSILON,
    Q_BELOW_4,
    SPECTRAL,
    ALPHA_BETA,
    L_NUMERATOR,
    GAMMA0,
];

/// Exact margins of every constraint in the chain. Stages whose inputs are
/// already infeasible are left out; the failing earlier stage fails the report.
pub fn feasibility(params: &ParamSet) -> ConstraintReport {
    let mut r = ConstraintReport::new();
    let h = hessian_conditions(params.n(), params.a(), params.alpha(), params.beta())
        .expect("ParamSet has n >= 3");
    r.push(FXX, h.f_xx.clone(), MarginRule::Positive);
    r.push(FYY, h.f_yy.clone(), MarginRule::Positive);
    r.push(DISC, h.discriminant.clone(), MarginRule::Positive);
    if let Ok(eps) = epsilon_of(params) {
        r.push(F_AT_0, eps.f_at_0, MarginRule::Informational);
        r.push(F_AT_1, eps.f_at_1, MarginRule::Informational);
        r.push(EPSILON, eps.epsilon, MarginRule::Positive);
    }
    let q = params.q();
    r.push(Q_BELOW_4, 4 - &q, MarginRule::Positive);
    if params.n() >= 4 {
        if let Ok(coeff) = spectral_coefficient(params) {
            let n = params.nr();
            r.push(
                SPECTRAL,
                (&n - 2) / (&n - 3) - coeff,
                MarginRule::NonNegative,
            );
        }
    }
    let n = params.nr();
    r.push(
        ALPHA_BETA,
        (&n - 1) * params.beta() - (&n - 2) * params.alpha(),
        MarginRule::Positive,
    );
    if q < 4 {
        if let Ok(mcc) = mean_curv_coeff(params.n(), params.alpha(), params.beta()) {
            r.push(
                L_NUMERATOR,
                mcc + q.recip().expect("q > 0") - 1,
                MarginRule::Positive,
            );
        }
    }
    if let Ok(l) = l_max(params) {
        if let Ok(g) = gamma0(params, l.value()) {
            r.push(GAMMA0, g.bare, MarginRule::Positive);
        }
        if let LMax::Value(l) = &l {
            if let Ok(c) = crate::bubble::hbar_coefficient(params, l) {
                r.push(HBAR, c, MarginRule::NonNegative);
            }
        }
    }
    r
}

pub fn is_certified(report: &ConstraintReport) -> bool {
    report.all_satisfied()
        && JUDGED
            .iter()
            .all(|name| report.get(name).is_some() || *name == SPECTRAL)
}

/// `f64` mirror of the judged margins, in [`JUDGED`] order. `NaN` maps to `-inf`.
pub fn float_margins(n: u32, a: f64, b: f64, alpha: f64, beta: f64) -> [f64; 9] {
    let nf = f64::from(n);
    let nm2 = nf - 2.0;
    let diag = 2.0 * (nf - 1.0) * a / nm2;
    let fxx = diag - 2.0 * beta;
    let fyy = diag - 2.0 * alpha;
    let d = 4.0 * nf / nm2 * a * a - 4.0 * ((nf - 1.0) / nm2 * beta + alpha) * a
        + (4.0 * beta - alpha) * alpha;
    let a2 = alpha * alpha;
    let num = nm2 * a2 * alpha - ((nf * nf - 5.0 * nf + 8.0) * a + (3.0 * nf - 7.0) * beta) * a2
        + (nm2 * nm2 * alpha - (nf - 1.0) * nm2 * a) * beta * beta
        + 4.0 * nm2 * a * alpha * beta;
    let qmin = num / d;
    let constant = 2.0 * (nf - 1.0) * beta + 2.0 * nm2 * alpha - b * nf * nm2 / 2.0;
    let max_term = (nm2 * beta - alpha).max((nf - 3.0) * alpha);
    let slope = (nf * nf - 4.0) / 4.0 * b - (nf * beta + (nf - 1.0) * alpha) - max_term;
    let eps = if fxx > 0.0 && fyy > 0.0 && d > 0.0 {
        (constant + qmin).min(constant + slope)
    } else {
        f64::NEG_INFINITY
    };
    let q = b / beta;
    let spectral = if n >= 4 {
        nm2 / (nf - 3.0) - 4.0 / (4.0 - q) * beta / alpha
    } else {
        f64::INFINITY
    };
    let ab = (nf - 1.0) * beta - nm2 * alpha;
    let mcc = (4.0 * beta * beta - nm2 * a2) / (4.0 * beta * ab);
    let lnum = mcc + 1.0 / q - 1.0;
    let gap = (0.5 - 1.0 / q).abs();
    let g0 = 1.0 / q - gap * gap / lnum;
    let mut out = [fxx, fyy, d, eps, 4.0 - q, spectral, ab, lnum, g0];
    if !(q < 4.0 && q > 0.0) {
        out[5] = f64::NEG_INFINITY;
    }
    if !(lnum > 0.0) || ab <= 0.0 {
        out[7] = out[7].min(-1e-300);
        out[8] = f64::NEG_INFINITY;
    }
    out.map(|m| if m.is_nan() { f64::NEG_INFINITY } else { m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MinimizeDelta0,
    MaximizeEpsilon,
}

/// Log-uniform search ranges for `(b, alpha, beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub b: (f64, f64),
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
}

impl SearchBox {
    fn bounds(&self) -> [(f64, f64); 3] {
        [self.b, self.alpha, self.beta].map(|(lo, hi)| (lo.ln(), hi.ln()))
    }

    fn around(center: [f64; 3], factor: f64) -> Self {
        let r = |c: f64| (c / factor, c * factor);
        SearchBox {
            b: r(center[0]),
            alpha: r(center[1]),
            beta: r(center[2]),
        }
    }
}

/// Row used to center the search: the built-in row, or for `n = 6` a
/// geometric extrapolation `p5^2 / p4` of the last two rows (a heuristic).
pub fn search_center(n: u32) -> Result<[f64; 4]> {
    let floats = |p: &ParamSet| {
        [
            p.delta0().to_f64(),
            p.b().to_f64(),
            p.alpha().to_f64(),
            p.beta().to_f64(),
        ]
    };
    if let Ok(row) = reference_row(n) {
        return Ok(floats(&row.params));
    }
    if n == 6 {
        let p4 = floats(&reference_row(4)?.params);
        let p5 = floats(&reference_row(5)?.params);
        let mut c = [0.0; 4];
        for i in 0..4 {
            c[i] = p5[i] * p5[i] / p4[i];
        }
        c[0] = c[0].min(1.0);
        return Ok(c);
    }
    Err(Error::NoReferenceRow(n))
}

/// Per-constraint scales that make margins commensurate: absolute margins at
/// the built-in row (the `n = 5` row for `n = 6`), with `1` for zero margins.
pub fn margin_scales(n: u32) -> [f64; 9] {
    let row = reference_row(n)
        .or_else(|_| reference_row(5))
        .expect("row 5 exists");
    let m = float_margins(
        row.params.n(),
        row.params.a().to_f64(),
        row.params.b().to_f64(),
        row.params.alpha().to_f64(),
        row.params.beta().to_f64(),
    );
    m.map(|v| {
        if v.is_finite() && v != 0.0 {
            v.abs()
        } else {
            1.0
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n: u32,
    pub objective: Objective,
    /// Total floating evaluations.
    pub budget: u64,
    pub denominator_bound: u64,
    pub seeds: Vec<u64>,
    pub search_box: SearchBox,
    pub bisection_steps: u32,
}

pub const DEFAULT_BUDGET: u64 = 100_000;
pub const DEFAULT_DENOMINATOR_BOUND: u64 = 1_000_000;

impl SearchConfig {
    pub fn new(n: u32, objective: Objective) -> Result<Self> {
        let c = search_center(n)?;
        Ok(SearchConfig {
            n,
            objective,
            budget: DEFAULT_BUDGET,
            denominator_bound: DEFAULT_DENOMINATOR_BOUND,
            seeds: (1..=8).collect(),
            search_box: SearchBox::around([c[1], c[2], c[3]], if n == 6 { 8.0 } else { 4.0 }),
            bisection_steps: 24,
        })
    }

    pub fn validate(&self) -> Result<()> {
        crate::quadratic::check_dimension(self.n)?;
        if self.denominator_bound < 2 {
            return Err(out_of_range(
                "denominator bound (must be >= 2)",
                self.denominator_bound,
            ));
        }
        if self.budget < 1 {
            return Err(out_of_range("budget (must be >= 1)", self.budget));
        }
        if self.seeds.is_empty() {
            return Err(out_of_range("seed list (must be nonempty)", "[]"));
        }
        for (lo, hi) in [
            self.search_box.b,
            self.search_box.alpha,
            self.search_box.beta,
        ] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(out_of_range("search box range", format!("({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionStep {
    pub delta0: Rational,
    #[serde(with = "crate::hiprec::lossless_f64")]
    pub float_margin: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub n: u32,
    pub objective: Objective,
    pub best_params: ParamSet,
    pub certified: bool,
    pub epsilon: Option<Rational>,
    pub delta0: Rational,
    pub constraint_report: ConstraintReport,
    /// Built-in `delta0` minus found `delta0` (or found minus built-in `epsilon`).
    pub improvement_vs_reference: Option<Rational>,
    pub evaluations: u64,
    pub steps: Vec<BisectionStep>,
    /// Best floating normalized margins when nothing certified.
    pub margin_profile: Vec<ProfileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub constraint: String,
    #[serde(with = "crate::hiprec::lossless_f64")]
    pub normalized_margin: f64,
}

type Eval = dyn Fn(&[f64; 3]) -> f64 + Sync;

fn normalized_min(margins: &[f64; 9], scales: &[f64; 9]) -> f64 {
    margins
        .iter()
        .zip(scales)
        .map(|(m, s)| m / s)
        .fold(f64::INFINITY, f64::min)
}

/// Pattern search from `x0` in log coordinates: coordinate moves, then a few
/// random directions, halving the step when nothing improves.
fn descend<R: Rng>(
    f: &Eval,
    bounds: &[(f64, f64); 3],
    x0: [f64; 3],
    budget: u64,
    rng: &mut R,
) -> ([f64; 3], f64, u64) {
    let clamp = |x: &mut [f64; 3]| {
        for (xi, (lo, hi)) in x.iter_mut().zip(bounds) {
            *xi = xi.clamp(*lo, *hi);
        }
    };
    let mut x = x0;
    clamp(&mut x);
    let mut best = f(&x);
    let mut used = 1;
    let mut step = 0.25;
    while used < budget && step > 1e-12 {
        let mut improved = false;
        'coords: for i in 0..3 {
            for sign in [1.0, -1.0] {
                let mut y = x;
                y[i] += sign * step;
                clamp(&mut y);
                let v = f(&y);
                used += 1;
                if v > best {
                    (x, best, improved) = (y, v, true);
                    break 'coords;
                }
            }
        }
        if !improved {
            for _ in 0..4 {
                let mut dir = [0.0; 3];
                for d in dir.iter_mut() {
                    *d = rng.gen_range(-1.0..1.0);
                }
                let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-12);
                let mut y = x;
                for (yi, d) in y.iter_mut().zip(dir) {
                    *yi += step * d / norm;
                }
                clamp(&mut y);
                let v = f(&y);
                used += 1;
                if v > best {
                    (x, best, improved) = (y, v, true);
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, best, used)
}

/// Runs one descent per seed in parallel; the first seed starts at `warm`
/// when given, the rest at random points of the box. Ties go to the lower
/// seed index, so the outcome is independent of scheduling.
fn multistart(
    config: &SearchConfig,
    f: &Eval,
    warm: &[[f64; 3]],
    budget: u64,
) -> ([f64; 3], f64, u64) {
    let bounds = config.search_box.bounds();
    let per = (budget / config.seeds.len() as u64).max(1);
    let runs: Vec<_> = config
        .seeds
        .par_iter()
        .enumerate()
        .map(|(i, seed)| {
            let mut rng = chunk_rng(*seed, u64::from(config.n));
            let mut start = match warm.get(i) {
                Some(w) => *w,
                None => bounds.map(|(lo, hi)| rng.gen_range(lo..=hi)),
            };
            // restart from random points until this seed's share is spent
            let mut best = ([0.0; 3], f64::NEG_INFINITY, 0);
            while best.2 < per {
                let (x, v, used) = descend(f, &bounds, start, per - best.2, &mut rng);
                if v > best.1 {
                    best.0 = x;
                    best.1 = v;
                }
                best.2 += used;
                start = bounds.map(|(lo, hi)| rng.gen_range(lo..=hi));
            }
            best
        })
        .collect();
    let used = runs.iter().map(|r| r.2).sum();
    let (x, v, _) = runs
        .into_iter()
        .reduce(|best, r| if r.1 > best.1 { r } else { best })
        .expect("at least one seed");
    (x, v, used)
}

/// Denominator ladder tried during rounding, smallest first.
fn ladder(bound: u64) -> Vec<u64> {
    let mut out: Vec<u64> = [10u64, 100, 1_000, 10_000, 100_000, 1_000_000, 10_000_000]
        .into_iter()
        .filter(|d| *d < bound)
        .collect();
    out.push(bound);
    out
}

fn round_row(n: u32, delta0: &Rational, x: &[f64; 3], den: u64) -> Option<ParamSet> {
    let [b, alpha, beta] = x.map(|v| Rational::round_f64(v.exp(), den));
    ParamSet::from_delta0(n, delta0, b?, alpha?, beta?).ok()
}

/// Rounds a floating candidate and returns the first exactly certified row
/// along the denominator ladder.
pub fn rationalize(
    n: u32,
    delta0: &Rational,
    x: &[f64; 3],
    denominator_bound: u64,
) -> Option<(ParamSet, ConstraintReport)> {
    ladder(denominator_bound).into_iter().find_map(|den| {
        let p = round_row(n, delta0, x, den)?;
        let r = feasibility(&p);
        is_certified(&r).then_some((p, r))
    })
}

fn log_point(p: &ParamSet) -> [f64; 3] {
    [p.b(), p.alpha(), p.beta()].map(|v| v.to_f64().ln())
}

fn profile(n: u32, delta0: f64, x: &[f64; 3]) -> Vec<ProfileEntry> {
    let [b, alpha, beta] = x.map(f64::exp);
    let m = float_margins(n, delta0 * b, b, alpha, beta);
    let s = margin_scales(n);
    JUDGED
        .iter()
        .zip(m.iter().zip(s))
        .map(|(name, (m, s))| ProfileEntry {
            constraint: name.to_string(),
            normalized_margin: m / s,
        })
        .collect()
}

/// Smallest certified `delta0` found by bisection, never worse than the
/// built-in row when one exists.
pub fn minimize_delta0(config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    let n = config.n;
    let scales = margin_scales(n);
    let reference = reference_row(n).ok();
    let center = search_center(n)?;

    let mut best: Option<(ParamSet, ConstraintReport)> = reference.as_ref().and_then(|r| {
        let rep = feasibility(&r.params);
        is_certified(&rep).then(|| (r.params.clone(), rep))
    });
    let mut hi = match &best {
        Some((p, _)) => p.delta0().to_f64(),
        None => center[0].max(1.0),
    };
    let mut lo = 0.0;
    let mut warm: Vec<[f64; 3]> = match &best {
        Some((p, _)) => vec![log_point(p)],
        None => vec![[center[1], center[2], center[3]].map(f64::ln)],
    };
    let mut evaluations = 0;
    let mut steps = Vec::new();
    let mut best_uncertified: Option<([f64; 3], f64, f64)> = None;
    let step_budget = (config.budget / u64::from(config.bisection_steps + 1)).max(1);

    // An uncertified start first probes the top of the bracket itself.
    let mut probe_top = best.is_none();
    for _ in 0..config.bisection_steps {
        if evaluations >= config.budget || hi - lo < 1e-7 {
            break;
        }
        let target = if probe_top { hi } else { 0.5 * (lo + hi) };
        probe_top = false;
        let delta0 = Rational::round_f64(target, 10_000)
            .filter(|d| d.to_f64() > lo && d.to_f64() <= hi && d.is_positive())
            .or_else(|| Rational::round_f64(target, config.denominator_bound))
            .ok_or_else(|| out_of_range("bisection midpoint", target))?;
        let d0 = delta0.to_f64();
        let f = move |x: &[f64; 3]| {
            let [b, alpha, beta] = x.map(f64::exp);
            normalized_min(&float_margins(n, d0 * b, b, alpha, beta), &scales)
        };
        // with no certified row yet, the top of the bracket gets half the budget
        let share = if steps.is_empty() && best.is_none() {
            config.budget / 2
        } else {
            step_budget
        };
        let budget = share.min(config.budget - evaluations).max(1);
        let (x, value, used) = multistart(config, &f, &warm, budget);
        evaluations += used;
        let certified = if value > 0.0 {
            rationalize(n, &delta0, &x, config.denominator_bound)
        } else {
            None
        };
        steps.push(BisectionStep {
            delta0: delta0.clone(),
            float_margin: value,
            certified: certified.is_some(),
        });
        match certified {
            Some((p, r)) => {
                hi = d0;
                warm.insert(0, log_point(&p));
                warm.truncate(2);
                if best.as_ref().is_none_or(|(b, _)| p.delta0() < b.delta0()) {
                    best = Some((p, r));
                }
            }
            None => {
                if best_uncertified.as_ref().is_none_or(|(_, v, _)| value > *v) {
                    best_uncertified = Some((x, value, d0));
                }
                lo = d0;
            }
        }
    }

    let result = match best {
        Some((p, report)) => SearchResult {
            n,
            objective: Objective::MinimizeDelta0,
            epsilon: report.margin(EPSILON).cloned(),
            delta0: p.delta0(),
            improvement_vs_reference: reference.as_ref().map(|r| &r.delta0 - p.delta0()),
            best_params: p,
            certified: true,
            constraint_report: report,
            evaluations,
            steps,
            margin_profile: Vec::new(),
        },
        None => {
            let (x, _, d0) = best_uncertified.unwrap_or((
                [center[1], center[2], center[3]].map(f64::ln),
                f64::NEG_INFINITY,
                hi,
            ));
            let delta0 =
                Rational::round_f64(d0, config.denominator_bound).unwrap_or_else(Rational::one);
            let p = round_row(n, &delta0, &x, config.denominator_bound)
                .ok_or_else(|| Error::Infeasible("no representable candidate".into()))?;
            let report = feasibility(&p);
            SearchResult {
                n,
                objective: Objective::MinimizeDelta0,
                epsilon: report.margin(EPSILON).cloned(),
                delta0: p.delta0(),
                improvement_vs_reference: None,
                margin_profile: profile(n, d0, &x),
                certified: is_certified(&report),
                best_params: p,
                constraint_report: report,
                evaluations,
                steps,
            }
        }
    };
    Ok(result)
}

/// Largest certified `epsilon` at a fixed `delta0`, never below the built-in
/// row when its `delta0` matches.
///
/// `epsilon` is positively homogeneous of degree one in `(b, alpha, beta)` and
/// every margin keeps its sign under that scaling, so the search maximizes
/// `epsilon / beta` and reports candidates rescaled to the row's `beta`.
pub fn maximize_epsilon(config: &SearchConfig, delta0: &Rational) -> Result<SearchResult> {
    config.validate()?;
    if !delta0.is_positive() {
        return Err(out_of_range("delta0 (must be positive)", delta0));
    }
    let n = config.n;
    let scales = margin_scales(n);
    let center = search_center(n)?;
    let reference = reference_row(n).ok().filter(|r| r.delta0 == *delta0);
    let mut best: Option<(ParamSet, ConstraintReport)> = reference.as_ref().and_then(|r| {
        let rep = feasibility(&r.params);
        is_certified(&rep).then(|| (r.params.clone(), rep))
    });
    let eps_of = |r: &ConstraintReport| r.margin(EPSILON).cloned().unwrap_or_else(Rational::zero);

    let d0 = delta0.to_f64();
    let beta_ref = match &reference {
        Some(r) => r.params.beta().clone(),
        None => Rational::round_f64(center[3], 1000).unwrap_or_else(Rational::one),
    };
    let eps_scale = scales[3] / beta_ref.to_f64();
    let f = move |x: &[f64; 3]| {
        let [b, alpha, beta] = x.map(f64::exp);
        let m = float_margins(n, d0 * b, b, alpha, beta);
        let others = normalized_min(&m, &scales);
        if others > 0.0 {
            m[3] / beta / eps_scale
        } else {
            others - 1e6
        }
    };
    let mut warm = vec![[center[1], center[2], center[3]].map(f64::ln)];
    if let Some((p, _)) = &best {
        warm.insert(0, log_point(p));
    }
    // Two rounds: a wide search, then a refinement from the winner.
    let mut evaluations = 0;
    let mut last = None;
    for round in 0..2 {
        let budget = if round == 0 {
            config.budget / 2
        } else {
            config.budget - evaluations
        };
        let (x, value, used) = multistart(config, &f, &warm, budget.max(1));
        evaluations += used;
        if value > 0.0 {
            if let Some((p, r)) = rationalize(n, delta0, &x, config.denominator_bound)
                .and_then(|(p, _)| rescale_beta(&p, &beta_ref))
                .map(|p| {
                    let r = feasibility(&p);
                    (p, r)
                })
                .filter(|(_, r)| is_certified(r))
            {
                if best.as_ref().is_none_or(|(_, br)| eps_of(&r) > eps_of(br)) {
                    best = Some((p, r));
                }
            }
        }
        warm = vec![x];
        last = Some((x, value));
    }
    let result = match best {
        Some((p, report)) => {
            let eps = eps_of(&report);
            SearchResult {
                n,
                objective: Objective::MaximizeEpsilon,
                improvement_vs_reference: reference.as_ref().map(|r| &eps - &r.epsilon),
                epsilon: Some(eps),
                delta0: p.delta0(),
                best_params: p,
                certified: true,
                constraint_report: report,
                evaluations,
                steps: Vec::new(),
                margin_profile: Vec::new(),
            }
        }
        None => {
            let (x, _) = last.expect("two rounds ran");
            let p = round_row(n, delta0, &x, config.denominator_bound)
                .ok_or_else(|| Error::Infeasible("no representable candidate".into()))?;
            let report = feasibility(&p);
            SearchResult {
                n,
                objective: Objective::MaximizeEpsilon,
                epsilon: report.margin(EPSILON).cloned(),
                delta0: p.delta0(),
                improvement_vs_reference: None,
                margin_profile: profile(n, d0, &x),
                certified: is_certified(&report),
                best_params: p,
                constraint_report: report,
                evaluations,
                steps: Vec::new(),
            }
        }
    };
    Ok(result)
}

/// `p` scaled by `beta / p.beta()`; margins keep their signs.
pub fn rescale_beta(p: &ParamSet, beta: &Rational) -> Option<ParamSet> {
    let t = beta.checked_div(p.beta()).ok()?;
    ParamSet::new(p.n(), p.a() * &t, p.b() * &t, p.alpha() * &t, p.beta() * &t).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensitivityEntry {
    pub parameter: String,
    pub constraint: String,
    pub margin: Rational,
    /// `m(p + h) - m(p - h)`; `None` when either side leaves the chain's domain.
    pub delta: Option<Rational>,
    /// `delta / (2h)`, absent for `h = 0`.
    pub derivative: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub step: Rational,
    pub entries: Vec<SensitivityEntry>,
    /// Judged constraints with zero margin, or else the smallest one.
    pub binding: Vec<String>,
}

/// One-at-a-time symmetric differences of every margin in `a, b, alpha, beta`.
pub fn sensitivity_report(params: &ParamSet, step: &Rational) -> Result<SensitivityReport> {
    let base = feasibility(params);
    if !is_certified(&base) {
        return Err(Error::Infeasible("sensitivity needs a feasible row".into()));
    }
    type Setter = fn(&ParamSet, Rational) -> Result<ParamSet>;
    let setters: [(&str, &Rational, Setter); 4] = [
        ("a", params.a(), |p, v| {
            ParamSet::new(p.n(), v, p.b().clone(), p.alpha().clone(), p.beta().clone())
        }),
        ("b", params.b(), |p, v| p.with_b(v)),
        ("alpha", params.alpha(), |p, v| p.with_alpha(v)),
        ("beta", params.beta(), |p, v| p.with_beta(v)),
    ];
    let mut entries = Vec::new();
    for (name, value, set) in setters {
        let plus = set(params, value + step).ok().map(|p| feasibility(&p));
        let minus = set(params, value - step).ok().map(|p| feasibility(&p));
        for c in &base.constraints {
            let delta = match (&plus, &minus) {
                (Some(pl), Some(mi)) => match (pl.margin(&c.name), mi.margin(&c.name)) {
                    (Some(x), Some(y)) => Some(x - y),
                    _ => None,
                },
                _ => None,
            };
            let derivative = match &delta {
                Some(d) if !step.is_zero() => Some(d / (2 * step)),
                _ => None,
            };
            entries.push(SensitivityEntry {
                parameter: name.into(),
                constraint: c.name.clone(),
                margin: c.margin.clone(),
                delta,
                derivative,
            });
        }
    }
    let judged = base
        .constraints
        .iter()
        .filter(|c| c.rule != MarginRule::Informational);
    let zero: Vec<String> = judged
        .clone()
        .filter(|c| c.margin.is_zero())
        .map(|c| c.name.clone())
        .collect();
    let binding = if zero.is_empty() {
        base.min_margin()
            .map(|c| vec![c.name.clone()])
            .unwrap_or_default()
    } else {
        zero
    };
    Ok(SensitivityReport {
        step: step.clone(),
        entries,
        binding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn row(n: u32) -> ParamSet {
        reference_row(n).unwrap().params
    }

    #[test]
    fn reference_rows_are_feasible() {
        for n in [3, 4, 5] {
            let r = feasibility(&row(n));
            assert!(
                is_certified(&r),
                "n = {n}: {:?}",
                r.failing().collect::<Vec<_>>()
            );
            assert!(r.margin(HBAR).unwrap().is_zero());
        }
    }

    #[test]
    fn broken_rows_are_infeasible() {
        let p = row(3).with_alpha(ratio(3, 1)).unwrap();
        assert!(!is_certified(&feasibility(&p)));
        let p = row(3).with_b_fixed_delta0(ratio(1, 100)).unwrap();
        let r = feasibility(&p);
        assert!(!is_certified(&r));
    }

    #[test]
    fn float_mirror_tracks_exact_margins() {
        for n in [3, 4, 5] {
            let p = row(n);
            let exact = feasibility(&p);
            let fl = float_margins(
                n,
                p.a().to_f64(),
                p.b().to_f64(),
                p.alpha().to_f64(),
                p.beta().to_f64(),
            );
            for (name, v) in JUDGED.iter().zip(fl) {
                if let Some(m) = exact.margin(name) {
                    let m = m.to_f64();
                    assert!(
                        (m - v).abs() <= 1e-9 * (1.0 + m.abs()),
                        "{n} {name}: {m} vs {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn rounding_ladder_recovers_reference_row() {
        let p = row(5);
        let x = log_point(&p);
        let (q, r) = rationalize(5, &p.delta0(), &x, 1_000).unwrap();
        assert!(is_certified(&r));
        assert_eq!(q.delta0(), p.delta0());
    }

    #[test]
    fn small_search_dominates_witness() {
        let mut cfg = SearchConfig::new(3, Objective::MinimizeDelta0).unwrap();
        cfg.budget = 4_000;
        cfg.seeds = vec![1, 2, 3, 4];
        let r = minimize_delta0(&cfg).unwrap();
        assert!(r.certified);
        assert!(r.delta0 <= ratio(1, 3));
        assert!(is_certified(&feasibility(&r.best_params)));
        let again = minimize_delta0(&cfg).unwrap();
        assert_eq!(r.best_params, again.best_params);
    }

    #[test]
    fn epsilon_search_never_below_witness() {
        let mut cfg = SearchConfig::new(4, Objective::MaximizeEpsilon).unwrap();
        cfg.budget = 2_000;
        let r = maximize_epsilon(&cfg, &ratio(1, 2)).unwrap();
        assert!(r.certified);
        assert!(r.epsilon.unwrap() >= ratio(377, 5260));
    }

    #[test]
    fn sensitivity_basics() {
        let rep = sensitivity_report(&row(3), &ratio(1, 1000)).unwrap();
        assert!(rep.binding.contains(&HBAR.to_string()));
        let zero = sensitivity_report(&row(3), &Rational::zero()).unwrap();
        assert!(zero
            .entries
            .iter()
            .all(|e| e.delta.as_ref().is_none_or(Rational::is_zero)));
        assert!(zero.entries.iter().all(|e| e.derivative.is_none()));
        let eps_beta = rep
            .entries
            .iter()
            .find(|e| e.parameter == "beta" && e.constraint == EPSILON)
            .unwrap();
        assert!(eps_beta.delta.is_some());
    }

    #[test]
    fn config_validation() {
        let mut cfg = SearchConfig::new(3, Objective::MinimizeDelta0).unwrap();
        cfg.denominator_bound = 1;
        assert!(cfg.validate().is_err());
        assert!(SearchConfig::new(6, Objective::MinimizeDelta0).is_ok());
        assert!(SearchConfig::new(7, Objective::MinimizeDelta0).is_err());
    }
}
