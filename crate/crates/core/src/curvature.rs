//! The pointwise curvature estimate and its constant `epsilon(n)`.
//!
//! For a row `(n, a, b, alpha, beta)` with `Q = f_min / E^2` from
//! [`crate::quadratic`], the lower-bound function in `t = |dr|^2` is
//!
//! ```text
//! F(t) = 2(n-1) beta + 2(n-2) alpha - b n(n-2)/2
//!      + [(n^2-4)/4 b - (n beta + (n-1) alpha) - max{(n-2) beta - alpha, (n-3) alpha}] t
//!      + (1 - t) Q
//! ```
//!
//! It is affine in `t`, so `epsilon = min{F(0), F(1)}` bounds it on `[0, 1]`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};
use crate::params::ParamSet;
use crate::quadratic::{f_min_coefficient, hessian_conditions, HessianConditions};
use crate::rational::Rational;
use crate::report::{ConstraintReport, MarginRule, Violation};
use crate::sampling::{par_chunks, random_rational, random_unit_rational};

/// Which term attains `max{(n-2) beta - alpha, (n-3) alpha}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxBranch {
    /// `(n-2) beta - alpha`
    Beta,
    /// `(n-3) alpha`
    Alpha,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonResult {
    pub f_at_0: Rational,
    pub f_at_1: Rational,
    pub epsilon: Rational,
    pub max_branch: MaxBranch,
    pub f_min_coefficient: Rational,
}

/// The `max` term and the branch attaining it.
pub fn max_term(params: &ParamSet) -> (Rational, MaxBranch) {
    let n = params.nr();
    let beta_term = (&n - 2) * params.beta() - params.alpha();
    let alpha_term = (&n - 3) * params.alpha();
    match beta_term.cmp(&alpha_term) {
        Ordering::Greater => (beta_term, MaxBranch::Beta),
        Ordering::Less => (alpha_term, MaxBranch::Alpha),
        Ordering::Equal => (beta_term, MaxBranch::Both),
    }
}

fn constant_part(params: &ParamSet) -> Rational {
    let n = params.nr();
    2 * (&n - 1) * params.beta() + 2 * (&n - 2) * params.alpha() - params.b() * &n * (&n - 2) / 2
}

fn slope_part(params: &ParamSet) -> Rational {
    let n = params.nr();
    let (max, _) = max_term(params);
    (n.square() - 4) / 4 * params.b() - (&n * params.beta() + (&n - 1) * params.alpha()) - max
}

pub fn hessian(params: &ParamSet) -> Result<HessianConditions> {
    hessian_conditions(params.n(), params.a(), params.alpha(), params.beta())
}

/// `Q` for the row; fails unless the Hessian conditions hold.
pub fn f_min_for(params: &ParamSet) -> Result<Rational> {
    f_min_coefficient(params.n(), params.a(), params.alpha(), params.beta())
}

fn eval_with_q(params: &ParamSet, q: &Rational, t: &Rational) -> Rational {
    constant_part(params) + slope_part(params) * t + (1 - t) * q
}

/// `F(n, b, alpha, beta, t)` for `t` in `[0, 1]`.
pub fn f_eval(params: &ParamSet, t: &Rational) -> Result<Rational> {
    if t.is_negative() || *t > 1 {
        return Err(out_of_range("t = |dr|^2", t));
    }
    let q = f_min_for(params)?;
    Ok(eval_with_q(params, &q, t))
}

pub fn epsilon_of(params: &ParamSet) -> Result<EpsilonResult> {
    let q = f_min_for(params)?;
    let f_at_0 = eval_with_q(params, &q, &Rational::zero());
    let f_at_1 = eval_with_q(params, &q, &Rational::one());
    let epsilon = f_at_0.clone().min_of(f_at_1.clone());
    Ok(EpsilonResult {
        f_at_0,
        f_at_1,
        epsilon,
        max_branch: max_term(params).1,
        f_min_coefficient: q,
    })
}

/// `F(t) = (1-t) F(0) + t F(1)` at `samples` random rational `t`, plus the
/// endpoints and the midpoint.
pub fn linearity_check(params: &ParamSet, samples: u64, seed: u64) -> Result<bool> {
    let eps = epsilon_of(params)?;
    let q = eps.f_min_coefficient.clone();
    let affine = |t: &Rational| (1 - t) * &eps.f_at_0 + t * &eps.f_at_1;
    let fixed = [Rational::zero(), Rational::one(), Rational::new(1, 2)];
    if !fixed
        .iter()
        .all(|t| eval_with_q(params, &q, t) == affine(t))
    {
        return Ok(false);
    }
    let ok = par_chunks(samples, seed, |rng, count| {
        (0..count).all(|_| {
            let t = random_unit_rational(rng, 1000);
            eval_with_q(params, &q, &t) == affine(&t)
        })
    });
    Ok(ok.into_iter().all(|x| x))
}

/// Left side minus right side of the pointwise estimate
/// `a S + BiRic_12 + E[((n-2) beta - alpha) l1 + (n-3) alpha l2] >= E^2 Q`
/// with `BiRic_12 = -beta l1^2 - alpha (l1 l2 + l2^2)`.
pub fn pointwise_margin(
    params: &ParamSet,
    q: &Rational,
    lambda: &[Rational],
    e: &Rational,
) -> Rational {
    let n = params.nr();
    let (l1, l2) = (&lambda[0], &lambda[1]);
    let s: Rational = lambda.iter().map(Rational::square).sum();
    let biric = -(params.beta() * l1.square()) - params.alpha() * (l1 * l2 + l2.square());
    let linear =
        e * (((&n - 2) * params.beta() - params.alpha()) * l1 + (&n - 3) * params.alpha() * l2);
    params.a() * s + biric + linear - e.square() * q
}

/// Equality configuration: `(l1, l2)` at the stationary point of `f` for
/// linear scale `-e`, and the remaining curvatures equal.
fn tight_sample(params: &ParamSet, e: &Rational) -> Result<Vec<Rational>> {
    let input = crate::quadratic::QuadMinInput::new(
        params.n(),
        params.a().clone(),
        params.alpha().clone(),
        params.beta().clone(),
        -e,
    )?;
    let (x, y) = crate::quadratic::critical_point(&input)?;
    let rest = params.n() as i64 - 2;
    let fill = -(&x + &y) / rest;
    let mut lambda = vec![x, y];
    lambda.extend(std::iter::repeat_n(fill, rest as usize));
    Ok(lambda)
}

/// Randomized exact falsification test of the pointwise estimate over
/// trace-free principal curvatures. Every eighth sample is an equality
/// configuration (margin exactly zero). Both signs of `E` are checked.
pub fn pointwise_sampling_check(
    params: &ParamSet,
    sample_count: u64,
    seed: u64,
) -> Result<ConstraintReport> {
    let q = f_min_for(params)?;
    let n = params.n() as usize;
    let chunks = par_chunks(sample_count, seed, |rng, count| {
        let mut min_margin: Option<Rational> = None;
        let mut violations = Vec::new();
        for i in 0..count {
            let e = random_rational(rng, 40, 12);
            let lambda = if i % 8 == 0 {
                tight_sample(params, &e).expect("hessian checked")
            } else {
                let mut l: Vec<Rational> =
                    (0..n - 1).map(|_| random_rational(rng, 60, 15)).collect();
                let last = -l.iter().sum::<Rational>();
                l.push(last);
                l
            };
            for e_signed in [e.clone(), -&e] {
                let m = pointwise_margin(params, &q, &lambda, &e_signed);
                if m.is_negative() && violations.len() < 8 {
                    let witness = lambda
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(", ");
                    violations.push(Violation {
                        check: "pointwise curvature estimate".into(),
                        witness: format!("lambda = ({witness}), E = {e_signed}"),
                        margin: m.to_string(),
                    });
                }
                if min_margin.as_ref().is_none_or(|cur| m < *cur) {
                    min_margin = Some(m);
                }
            }
        }
        (min_margin, violations)
    });
    let mut report = ConstraintReport::new();
    report.samples = sample_count;
    let mut min_margin: Option<Rational> = None;
    for (m, v) in chunks {
        report.violations.extend(v);
        if let Some(m) = m {
            if min_margin.as_ref().is_none_or(|cur| m < *cur) {
                min_margin = Some(m);
            }
        }
    }
    if let Some(m) = min_margin {
        report.push(
            "pointwise estimate: least sampled margin",
            m,
            MarginRule::NonNegative,
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::reference_row;
    use crate::rational::ratio;

    fn row(n: u32) -> ParamSet {
        reference_row(n).unwrap().params
    }

    #[test]
    fn endpoint_values_row3() {
        let p = row(3);
        assert_eq!(f_eval(&p, &Rational::one()).unwrap(), ratio(9, 11));
        assert_eq!(f_eval(&p, &Rational::zero()).unwrap(), ratio(909, 176));
        let eps = epsilon_of(&p).unwrap();
        assert_eq!(eps.epsilon, ratio(9, 11));
        // beta - alpha = -3/22 < 0 = (n-3) alpha
        assert_eq!(eps.max_branch, MaxBranch::Alpha);
    }

    #[test]
    fn endpoint_values_row4() {
        let eps = epsilon_of(&row(4)).unwrap();
        assert_eq!(eps.f_at_1, ratio(3, 25));
        assert_eq!(eps.f_at_0, ratio(377, 5260));
        assert_eq!(eps.epsilon, ratio(377, 5260));
    }

    #[test]
    fn epsilon_row5() {
        let eps = epsilon_of(&row(5)).unwrap();
        assert_eq!(eps.epsilon, ratio(979826999, 65363627000));
        assert_eq!(eps.f_at_1, ratio(51, 280));
    }

    #[test]
    fn t_outside_unit_interval_rejected() {
        assert!(f_eval(&row(3), &ratio(3, 2)).is_err());
        assert!(f_eval(&row(3), &ratio(-1, 100)).is_err());
    }

    #[test]
    fn linearity_on_rows() {
        for n in [3, 4, 5] {
            assert!(linearity_check(&row(n), 100, 11).unwrap());
        }
        let p = row(5);
        let mid = f_eval(&p, &ratio(1, 2)).unwrap();
        let e = epsilon_of(&p).unwrap();
        assert_eq!(mid, (&e.f_at_0 + &e.f_at_1) / 2);
    }

    #[test]
    fn explicit_max_matches_both_branch_choices() {
        for n in [3, 4, 5] {
            let p = row(n);
            let nr = p.nr();
            let q = f_min_for(&p).unwrap();
            let base = constant_part(&p);
            let common = (nr.square() - 4) / 4 * p.b() - (&nr * p.beta() + (&nr - 1) * p.alpha());
            let b1 = &base + &common - ((&nr - 2) * p.beta() - p.alpha());
            let b2 = &base + &common - (&nr - 3) * p.alpha();
            // subtracting the max gives the smaller of the two branch values
            assert_eq!(eval_with_q(&p, &q, &Rational::one()), b1.min_of(b2));
        }
    }

    #[test]
    fn pointwise_margin_small_cases() {
        let p = row(3);
        let q = f_min_for(&p).unwrap();
        let z = Rational::zero();
        assert_eq!(
            pointwise_margin(&p, &q, &[z.clone(), z.clone(), z.clone()], &z),
            z
        );
        // lambda = (1, -1, 0), E = 0: 2a - beta = 20/11 - 3/2 = 7/22.
        let lambda = [ratio(1, 1), ratio(-1, 1), Rational::zero()];
        assert_eq!(pointwise_margin(&p, &q, &lambda, &z), ratio(7, 22));
    }

    #[test]
    fn tight_samples_have_zero_margin() {
        for n in [3, 4, 5] {
            let p = row(n);
            let q = f_min_for(&p).unwrap();
            let e = ratio(7, 3);
            let lambda = tight_sample(&p, &e).unwrap();
            assert!(lambda.iter().sum::<Rational>().is_zero());
            assert_eq!(pointwise_margin(&p, &q, &lambda, &e), Rational::zero());
        }
    }

    #[test]
    fn sampling_check_small_run() {
        let report = pointwise_sampling_check(&row(4), 2000, 5).unwrap();
        assert!(report.all_satisfied(), "{report:?}");
        assert_eq!(report.samples, 2000);
        // equality samples pin the least margin to zero
        assert_eq!(report.constraints[0].margin, Rational::zero());
    }

    #[test]
    fn sampling_check_finds_violations_for_a_wrong_q() {
        // Feeding a Q that is too large must be caught by the equality samples.
        let p = row(3);
        let q = f_min_for(&p).unwrap() + ratio(1, 100);
        let lambda = tight_sample(&p, &ratio(1, 1)).unwrap();
        assert!(pointwise_margin(&p, &q, &lambda, &ratio(1, 1)).is_negative());
    }
}
