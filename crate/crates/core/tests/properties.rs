use proptest::prelude::*;

use stabcert::bubble::{hbar_coefficient, l_max, surd_identities, x0_y0, LMax};
use stabcert::certificate::{exit_code, Certificate, Check, CheckKind, CheckStatus, Environment, ReferenceValue, Section};
use stabcert::curvature::{epsilon_of, f_eval as curvature_at};
use stabcert::iteration::{k_interval, recursion_exponents, recursion_exponents_closed};
use stabcert::quadratic::{critical_point, f_eval, f_min_coefficient, gradient, hessian_conditions, QuadMinInput};
use stabcert::sampling::{par_chunks, random_rational};
use stabcert::{reference_row, ParamSet, QuadSurd, Rational};

fn rational(max_num: i64, max_den: i64) -> impl Strategy<Value = Rational> {
    (-max_num..=max_num, 1..=max_den).prop_map(|(p, q)| Rational::new(p, q))
}

fn positive(max_num: i64, max_den: i64) -> impl Strategy<Value = Rational> {
    (1..=max_num, 1..=max_den).prop_map(|(p, q)| Rational::new(p, q))
}

/// Convex inputs: `(n, a, alpha, beta)` passing all three Hessian conditions.
fn convex() -> impl Strategy<Value = (u32, Rational, Rational, Rational)> {
    (3u32..=9, positive(80, 16), positive(40, 16), positive(40, 16))
        .prop_filter("Hessian conditions", |(n, a, al, be)| hessian_conditions(*n, a, al, be).unwrap().all())
}

/// Built-in row scaled by a positive factor and nudged in `alpha`.
fn near_row() -> impl Strategy<Value = ParamSet> {
    (3u32..=5, 1i64..=5, -20i64..=20).prop_map(|(n, t, nudge)| {
        let p = reference_row(n).unwrap().params;
        let t = Rational::from(t);
        let alpha = p.alpha() * &t * (Rational::one() + Rational::new(nudge, 1000));
        ParamSet::new(n, p.a() * &t, p.b() * &t, alpha, p.beta() * &t).unwrap()
    })
}

proptest! {
    #[test]
    fn rational_display_round_trips(x in rational(1_000_000, 1_000_000)) {
        let back: Rational = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn rational_field_laws(x in rational(1000, 50), y in rational(1000, 50), z in rational(1000, 50)) {
        prop_assert_eq!(&(&x + &y) * &z, &x * &z + &y * &z);
        prop_assert_eq!(&(&x - &y) + &y, x.clone());
        if !y.is_zero() {
            prop_assert_eq!(&(&x / &y) * &y, x);
        }
    }

    #[test]
    fn gradient_vanishes_at_critical_point((n, a, al, be) in convex(), e in rational(30, 7)) {
        let input = QuadMinInput::new(n, a, al, be, e).unwrap();
        let (x, y) = critical_point(&input).unwrap();
        let (gx, gy) = gradient(&input, &x, &y).unwrap();
        prop_assert!(gx.is_zero() && gy.is_zero());
    }

    #[test]
    fn minimum_is_a_lower_bound((n, a, al, be) in convex(), e in rational(30, 7), x in rational(100, 9), y in rational(100, 9)) {
        let fmin = e.square() * f_min_coefficient(n, &a, &al, &be).unwrap();
        let input = QuadMinInput::new(n, a, al, be, e).unwrap();
        let (xs, ys) = critical_point(&input).unwrap();
        prop_assert_eq!(f_eval(&input, &xs, &ys).unwrap(), fmin.clone());
        prop_assert!(f_eval(&input, &x, &y).unwrap() >= fmin);
    }

    #[test]
    fn hessian_determinant_is_the_discriminant((n, a, al, be) in convex()) {
        let h = hessian_conditions(n, &a, &al, &be).unwrap();
        prop_assert_eq!(h.determinant(), h.discriminant);
    }

    #[test]
    fn critical_point_is_linear_in_e((n, a, al, be) in convex(), e in rational(30, 7)) {
        let one = QuadMinInput::new(n, a.clone(), al.clone(), be.clone(), e.clone()).unwrap();
        let two = QuadMinInput::new(n, a, al, be, 2 * &e).unwrap();
        let (x1, y1) = critical_point(&one).unwrap();
        let (x2, y2) = critical_point(&two).unwrap();
        prop_assert_eq!(2 * &x1, x2);
        prop_assert_eq!(2 * &y1, y2);
    }

    #[test]
    fn curvature_function_is_affine(p in near_row(), t in (0i64..=64).prop_map(|k| Rational::new(k, 64))) {
        let f0 = curvature_at(&p, &Rational::zero()).unwrap();
        let f1 = curvature_at(&p, &Rational::one()).unwrap();
        let ft = curvature_at(&p, &t).unwrap();
        prop_assert_eq!(ft, &f0 + &t * (&f1 - &f0));
    }

    #[test]
    fn epsilon_is_homogeneous(n in 3u32..=5, t in positive(9, 4)) {
        let p = reference_row(n).unwrap().params;
        let scaled = ParamSet::new(n, p.a() * &t, p.b() * &t, p.alpha() * &t, p.beta() * &t).unwrap();
        prop_assert_eq!(epsilon_of(&scaled).unwrap().epsilon, &t * epsilon_of(&p).unwrap().epsilon);
    }

    #[test]
    fn l_max_zeroes_the_hbar_coefficient(p in near_row()) {
        if let LMax::Value(l) = l_max(&p).unwrap() {
            prop_assert!(hbar_coefficient(&p, &l).unwrap().is_zero());
        }
    }

    #[test]
    fn barrier_surd_identities_hold(al in positive(40, 9), be in positive(40, 9), eps in positive(40, 9), g in positive(40, 9)) {
        let (x0, y0) = x0_y0(&al, &be, &eps, &g).unwrap();
        prop_assert_eq!(surd_identities(&al, &be, &eps, &g, &x0, &y0).unwrap(), (true, true));
    }

    #[test]
    fn surd_square_is_exact(c in rational(50, 9), s in positive(500, 9)) {
        let x = QuadSurd::new(c.clone(), s.clone()).unwrap();
        prop_assert_eq!(x.square(), c.square() * s);
    }

    #[test]
    fn k_interval_endpoints_straddle_delta(n in 3u32..=10, num in 1i64..=400) {
        let delta = Rational::new(num, 100);
        let iv = k_interval(n, &delta).unwrap();
        if iv.is_nonempty() {
            let (lo, hi) = (iv.lower.clone().unwrap(), iv.upper.clone().unwrap());
            prop_assert!(lo.to_f64() <= delta.to_f64() + 1e-12 && delta.to_f64() <= hi.to_f64() + 1e-12);
            prop_assert!(iv.contains(&delta) || iv.radicand.is_zero());
        }
    }

    #[test]
    fn recursion_exponents_match_closed_form(n in 3u32..=12, l in 0u32..=30) {
        prop_assert_eq!(recursion_exponents(n, l), recursion_exponents_closed(n, l));
    }

    #[test]
    fn certificate_round_trips(vals in proptest::collection::vec((rational(1_000_000_000, 1_000_000_000), any::<bool>()), 1..8), strict in any::<bool>()) {
        let mut s = Section::new("random");
        for (i, (v, ok)) in vals.iter().enumerate() {
            s.value(format!("v{i}"), v);
            s.check(Check::new(format!("c{i}"), CheckKind::Exact, v, CheckStatus::from_bool(*ok)));
            s.reference(ReferenceValue::new(format!("r{i}"), v.clone(), if *ok { v.clone() } else { v + 1 }));
        }
        let mut env = Environment::default();
        env.set("seed", 1);
        let mut cert = Certificate::new("test", env);
        cert.sections.push(s);
        let cert = cert.finalize();
        let back = Certificate::from_json(&cert.to_json().unwrap()).unwrap();
        prop_assert_eq!(exit_code(&back, strict), exit_code(&cert, strict));
        prop_assert_eq!(back, cert);
    }
}

#[test]
fn sampling_is_independent_of_thread_count() {
    let draw = || par_chunks(5000, 9, |rng, count| (0..count).map(|_| random_rational(rng, 99, 99)).collect::<Vec<_>>());
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(draw);
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(draw);
    assert_eq!(single, many);
}
