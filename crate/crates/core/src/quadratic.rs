//! The two-variable quadratic
//!
//! ```text
//! f(x, y) = a[x^2 + y^2 + (x + y)^2/(n-2)] - beta x^2 - alpha (x y + y^2)
//!           - E[((n-2) beta - alpha) x + (n-3) alpha y]
//! ```
//!
//! its stationary point, and its closed-form minimum `f_min = E^2 Q`.
//!
//! The Hessian is constant: `f_xx = 2(n-1)a/(n-2) - 2 beta`,
//! `f_yy = 2(n-1)a/(n-2) - 2 alpha`, `f_xy = 2a/(n-2) - alpha`, and its
//! determinant equals the discriminant `D` exactly, so `f_xx > 0` together with
//! `D > 0` is positive definiteness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadMinInput {
    pub n: u32,
    pub a: Rational,
    pub alpha: Rational,
    pub beta: Rational,
    /// Scale of the linear term; enters `f_min` only through `E^2`.
    pub e: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HessianConditions {
    pub f_xx: Rational,
    pub f_yy: Rational,
    pub f_xy: Rational,
    pub discriminant: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadMinResult {
    pub x_star: Rational,
    pub y_star: Rational,
    /// `Q` with `f_min = E^2 Q`.
    pub f_min_coefficient: Rational,
    pub discriminant: Rational,
    pub hessian_ok: bool,
}

impl QuadMinInput {
    pub fn new(n: u32, a: Rational, alpha: Rational, beta: Rational, e: Rational) -> Result<Self> {
        check_dimension(n)?;
        Ok(QuadMinInput {
            n,
            a,
            alpha,
            beta,
            e,
        })
    }

    pub fn with_e(&self, e: Rational) -> Self {
        QuadMinInput { e, ..self.clone() }
    }

    /// Linear-term coefficients `(g_x, g_y)` so that `f = (1/2) z^T H z - g . z`.
    pub fn linear_coefficients(&self) -> (Rational, Rational) {
        let n = Rational::from(self.n);
        let gx = &self.e * ((&n - 2) * &self.beta - &self.alpha);
        let gy = &self.e * ((&n - 3) * &self.alpha);
        (gx, gy)
    }
}

impl HessianConditions {
    pub fn fxx_positive(&self) -> bool {
        self.f_xx.is_positive()
    }

    pub fn fyy_positive(&self) -> bool {
        self.f_yy.is_positive()
    }

    pub fn discriminant_positive(&self) -> bool {
        self.discriminant.is_positive()
    }

    pub fn triple(&self) -> (bool, bool, bool) {
        (
            self.fxx_positive(),
            self.fyy_positive(),
            self.discriminant_positive(),
        )
    }

    pub fn all(&self) -> bool {
        self.fxx_positive() && self.fyy_positive() && self.discriminant_positive()
    }

    pub fn determinant(&self) -> Rational {
        &self.f_xx * &self.f_yy - self.f_xy.square()
    }

    fn describe_failure(&self) -> String {
        let mut failed = Vec::new();
        if !self.fxx_positive() {
            failed.push(format!("f_xx = {}", self.f_xx));
        }
        if !self.fyy_positive() {
            failed.push(format!("f_yy = {}", self.f_yy));
        }
        if !self.discriminant_positive() {
            failed.push(format!("D = {}", self.discriminant));
        }
        failed.join(", ")
    }
}

pub(crate) fn check_dimension(n: u32) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(())
}

/// `D = 4n/(n-2) a^2 - 4((n-1)/(n-2) beta + alpha) a + (4 beta - alpha) alpha`.
pub fn discriminant(n: u32, a: &Rational, alpha: &Rational, beta: &Rational) -> Result<Rational> {
    check_dimension(n)?;
    let nr = Rational::from(n);
    let nm2 = &nr - 2;
    let quad = (4 * &nr) / &nm2 * a.square();
    let lin = 4 * (((&nr - 1) / &nm2) * beta + alpha) * a;
    let constant = (4 * beta - alpha) * alpha;
    Ok(quad - lin + constant)
}

pub fn hessian_conditions(
    n: u32,
    a: &Rational,
    alpha: &Rational,
    beta: &Rational,
) -> Result<HessianConditions> {
    let discriminant = discriminant(n, a, alpha, beta)?;
    let nr = Rational::from(n);
    let nm2 = &nr - 2;
    let diag = 2 * (&nr - 1) / &nm2 * a;
    Ok(HessianConditions {
        f_xx: &diag - 2 * beta,
        f_yy: &diag - 2 * alpha,
        f_xy: 2 * a / &nm2 - alpha,
        discriminant,
    })
}

pub fn f_eval(input: &QuadMinInput, x: &Rational, y: &Rational) -> Result<Rational> {
    check_dimension(input.n)?;
    let nm2 = Rational::from(input.n) - 2;
    let s = x + y;
    let quad = &input.a * (x.square() + y.square() + s.square() / &nm2);
    let (gx, gy) = input.linear_coefficients();
    Ok(quad - &input.beta * x.square() - &input.alpha * (x * y + y.square()) - gx * x - gy * y)
}

/// Exact gradient `(f_x, f_y)`.
pub fn gradient(input: &QuadMinInput, x: &Rational, y: &Rational) -> Result<(Rational, Rational)> {
    let h = hessian_conditions(input.n, &input.a, &input.alpha, &input.beta)?;
    let (gx, gy) = input.linear_coefficients();
    let fx = &h.f_xx * x + &h.f_xy * y - gx;
    let fy = &h.f_xy * x + &h.f_yy * y - gy;
    Ok((fx, fy))
}

/// Numerators `(X, Y)` of the stationary point `(E X / D, E Y / D)`.
fn critical_numerators(
    n: u32,
    a: &Rational,
    alpha: &Rational,
    beta: &Rational,
) -> (Rational, Rational) {
    let nr = Rational::from(n);
    let x_num = (&nr - 1) * alpha.square() - 2 * ((&nr - 2) * beta + 2 * a) * alpha
        + 2 * (&nr - 1) * a * beta;
    let y_num =
        2 * (&nr - 2) * a * alpha - (&nr - 4) * beta * alpha - alpha.square() - 2 * a * beta;
    (x_num, y_num)
}

/// The unique stationary point. Requires `D != 0`.
pub fn critical_point(input: &QuadMinInput) -> Result<(Rational, Rational)> {
    let d = discriminant(input.n, &input.a, &input.alpha, &input.beta)?;
    if d.is_zero() {
        return Err(Error::DegenerateQuadratic);
    }
    let (xn, yn) = critical_numerators(input.n, &input.a, &input.alpha, &input.beta);
    Ok((&input.e * xn / &d, &input.e * yn / &d))
}

/// Numerator of `Q`:
/// `(n-2) alpha^3 - [(n^2-5n+8) a + (3n-7) beta] alpha^2
///  + [(n-2)^2 alpha - (n-1)(n-2) a] beta^2 + 4(n-2) a alpha beta`.
pub fn f_min_numerator(n: u32, a: &Rational, alpha: &Rational, beta: &Rational) -> Rational {
    let nr = Rational::from(n);
    let nm2 = &nr - 2;
    let alpha2 = alpha.square();
    let t1 = &nm2 * &alpha2 * alpha;
    let t2 = ((nr.square() - 5 * &nr + 8) * a + (3 * &nr - 7) * beta) * &alpha2;
    let t3 = (nm2.square() * alpha - (&nr - 1) * &nm2 * a) * beta.square();
    let t4 = 4 * &nm2 * a * alpha * beta;
    t1 - t2 + t3 + t4
}

/// `Q = numerator / D`, the minimum of `f` per unit `E^2`. Requires a
/// positive-definite Hessian.
pub fn f_min_coefficient(
    n: u32,
    a: &Rational,
    alpha: &Rational,
    beta: &Rational,
) -> Result<Rational> {
    let h = hessian_conditions(n, a, alpha, beta)?;
    if h.discriminant.is_zero() {
        return Err(Error::DegenerateQuadratic);
    }
    if !h.all() {
        return Err(Error::NotConvex(h.describe_failure()));
    }
    Ok(f_min_numerator(n, a, alpha, beta) / &h.discriminant)
}

pub fn minimize(input: &QuadMinInput) -> Result<QuadMinResult> {
    let h = hessian_conditions(input.n, &input.a, &input.alpha, &input.beta)?;
    let q = f_min_coefficient(input.n, &input.a, &input.alpha, &input.beta)?;
    let (x_star, y_star) = critical_point(input)?;
    Ok(QuadMinResult {
        x_star,
        y_star,
        f_min_coefficient: q,
        hessian_ok: h.all(),
        discriminant: h.discriminant,
    })
}

/// Floating oracles, independent of the closed forms above.
pub mod oracle {
    use super::QuadMinInput;

    #[derive(Debug, Clone, Copy)]
    pub struct FloatQuad {
        n: f64,
        a: f64,
        alpha: f64,
        beta: f64,
        e: f64,
    }

    impl FloatQuad {
        pub fn new(input: &QuadMinInput) -> Self {
            FloatQuad {
                n: f64::from(input.n),
                a: input.a.to_f64(),
                alpha: input.alpha.to_f64(),
                beta: input.beta.to_f64(),
                e: input.e.to_f64(),
            }
        }

        pub fn eval(&self, x: f64, y: f64) -> f64 {
            let FloatQuad {
                n,
                a,
                alpha,
                beta,
                e,
            } = *self;
            a * (x * x + y * y + (x + y) * (x + y) / (n - 2.0))
                - beta * x * x
                - alpha * (x * y + y * y)
                - e * (((n - 2.0) * beta - alpha) * x + (n - 3.0) * alpha * y)
        }

        /// Stationary point by solving the 2x2 gradient system numerically.
        pub fn stationary_point(&self) -> (f64, f64) {
            let FloatQuad {
                n,
                a,
                alpha,
                beta,
                e,
            } = *self;
            let fxx = 2.0 * (n - 1.0) / (n - 2.0) * a - 2.0 * beta;
            let fyy = 2.0 * (n - 1.0) / (n - 2.0) * a - 2.0 * alpha;
            let fxy = 2.0 * a / (n - 2.0) - alpha;
            let gx = e * ((n - 2.0) * beta - alpha);
            let gy = e * (n - 3.0) * alpha;
            let det = fxx * fyy - fxy * fxy;
            ((gx * fyy - gy * fxy) / det, (fxx * gy - fxy * gx) / det)
        }
    }

    /// Minimum of `f` over a `steps x steps` grid of half-width `halfwidth`
    /// centred at `center`.
    pub fn grid_min(input: &QuadMinInput, center: (f64, f64), halfwidth: f64, steps: usize) -> f64 {
        assert!(steps >= 2, "grid needs at least two points per axis");
        let f = FloatQuad::new(input);
        let h = 2.0 * halfwidth / (steps - 1) as f64;
        let mut best = f64::INFINITY;
        for i in 0..steps {
            let x = center.0 - halfwidth + h * i as f64;
            for j in 0..steps {
                let y = center.1 - halfwidth + h * j as f64;
                best = best.min(f.eval(x, y));
            }
        }
        best
    }

    /// Brute-force minimum on a grid centred at the numerically solved
    /// stationary point.
    pub fn f_min_bruteforce(input: &QuadMinInput, halfwidth: f64, steps: usize) -> f64 {
        let center = FloatQuad::new(input).stationary_point();
        grid_min(input, center, halfwidth, steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn row3() -> (u32, Rational, Rational, Rational) {
        (3, ratio(10, 11), ratio(18, 11), ratio(3, 2))
    }

    fn row4() -> (u32, Rational, Rational, Rational) {
        (4, ratio(24, 25), ratio(51, 50), ratio(5, 4))
    }

    #[test]
    fn discriminant_values() {
        let (n, a, al, be) = row3();
        assert_eq!(discriminant(n, &a, &al, &be).unwrap(), ratio(24, 121));
        let (n, a, al, be) = row4();
        assert_eq!(discriminant(n, &a, &al, &be).unwrap(), ratio(789, 2500));
        let z = Rational::zero();
        assert_eq!(
            discriminant(3, &z, &z, &ratio(1, 1)).unwrap(),
            Rational::zero()
        );
        assert_eq!(discriminant(2, &z, &z, &z), Err(Error::InvalidDimension(2)));
    }

    #[test]
    fn hessian_triples() {
        let (n, a, al, be) = row3();
        assert_eq!(
            hessian_conditions(n, &a, &al, &be).unwrap().triple(),
            (true, true, true)
        );
        let h = hessian_conditions(3, &ratio(1, 2), &al, &be).unwrap();
        assert!(!h.fxx_positive());
        let (n, a, al, be) = row4();
        assert_eq!(
            hessian_conditions(n, &a, &al, &be).unwrap().triple(),
            (true, true, true)
        );
    }

    #[test]
    fn determinant_equals_discriminant_on_rows() {
        for (n, a, al, be) in [row3(), row4()] {
            let h = hessian_conditions(n, &a, &al, &be).unwrap();
            assert_eq!(h.determinant(), h.discriminant);
        }
    }

    #[test]
    fn f_min_values() {
        let (n, a, al, be) = row3();
        assert_eq!(f_min_numerator(n, &a, &al, &be), ratio(-9, 2662));
        assert_eq!(f_min_coefficient(n, &a, &al, &be).unwrap(), ratio(-3, 176));
        let (n, a, al, be) = row4();
        assert_eq!(
            f_min_coefficient(n, &a, &al, &be).unwrap(),
            ratio(-20137, 5260)
        );
        let z = Rational::zero();
        assert_eq!(f_min_numerator(4, &ratio(1, 1), &z, &z), Rational::zero());
    }

    #[test]
    fn f_min_rejects_bad_hessian() {
        let (n, _, al, be) = row3();
        assert!(matches!(
            f_min_coefficient(n, &ratio(1, 2), &al, &be),
            Err(Error::NotConvex(_))
        ));
        // a = alpha = 0, beta = 1 at n = 3: D = 0.
        let z = Rational::zero();
        assert_eq!(
            f_min_coefficient(3, &z, &z, &ratio(1, 1)),
            Err(Error::DegenerateQuadratic)
        );
    }

    #[test]
    fn stationary_point_zeroes_gradient() {
        let (n, a, al, be) = row3();
        let input = QuadMinInput::new(n, a, al, be, ratio(1, 1)).unwrap();
        let (x, y) = critical_point(&input).unwrap();
        assert_eq!((x.clone(), y.clone()), (ratio(-1, 4), ratio(1, 8)));
        let (fx, fy) = gradient(&input, &x, &y).unwrap();
        assert!(fx.is_zero() && fy.is_zero());
        let q = f_min_coefficient(n, &input.a, &input.alpha, &input.beta).unwrap();
        assert_eq!(f_eval(&input, &x, &y).unwrap(), q);
    }

    #[test]
    fn opposite_sign_y_numerator_is_not_stationary() {
        // The y-coordinate with the sign of its numerator flipped fails
        // stationarity on the n = 3 row, which pins the sign used above.
        let (n, a, al, be) = row3();
        let input = QuadMinInput::new(n, a, al, be, ratio(1, 1)).unwrap();
        let (x, y) = critical_point(&input).unwrap();
        let (fx, fy) = gradient(&input, &x, &(-&y)).unwrap();
        assert!(!(fx.is_zero() && fy.is_zero()));
    }

    #[test]
    fn zero_scale_gives_origin_and_linear_scaling() {
        let (n, a, al, be) = row4();
        let input = QuadMinInput::new(n, a, al, be, Rational::zero()).unwrap();
        assert_eq!(
            critical_point(&input).unwrap(),
            (Rational::zero(), Rational::zero())
        );
        let one = critical_point(&input.with_e(ratio(1, 1))).unwrap();
        let two = critical_point(&input.with_e(ratio(2, 1))).unwrap();
        assert_eq!(two.0, 2 * &one.0);
        assert_eq!(two.1, 2 * &one.1);
        assert_eq!(
            f_eval(&input, &Rational::zero(), &Rational::zero()).unwrap(),
            Rational::zero()
        );
    }

    #[test]
    fn brute_force_oracle_brackets_closed_form() {
        let (n, a, al, be) = row3();
        let input = QuadMinInput::new(n, a, al, be, ratio(1, 1)).unwrap();
        let q = f_min_coefficient(n, &input.a, &input.alpha, &input.beta)
            .unwrap()
            .to_f64();
        let fine = oracle::f_min_bruteforce(&input, 2.0, 401);
        assert!(
            fine - q >= -1e-12 && fine - q <= 1e-4,
            "fine grid gap {}",
            fine - q
        );
        let coarse = oracle::f_min_bruteforce(&input, 2.0, 11);
        assert!(coarse >= q - 1e-9);
        let zero = oracle::f_min_bruteforce(&input.with_e(Rational::zero()), 2.0, 101);
        assert!(zero.abs() < 1e-12);
    }

    #[test]
    fn offset_grid_converges_from_above() {
        let (n, a, al, be) = row4();
        let input = QuadMinInput::new(n, a, al, be, ratio(1, 1)).unwrap();
        let q = f_min_coefficient(n, &input.a, &input.alpha, &input.beta)
            .unwrap()
            .to_f64();
        let (cx, cy) = oracle::FloatQuad::new(&input).stationary_point();
        let center = (cx + 0.0137, cy - 0.0291);
        let mut last = f64::INFINITY;
        for steps in [21, 81, 321] {
            let m = oracle::grid_min(&input, center, 3.0, steps);
            assert!(m >= q - 1e-9);
            assert!(m <= last + 1e-12);
            last = m;
        }
        assert!(last - q < 1e-3);
    }
}
