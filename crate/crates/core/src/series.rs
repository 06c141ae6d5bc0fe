//! Exact small-`t` expansions: cumulants of `Σ 1/x_j` for the Laguerre
//! ensemble, the scaled limits `Y` (fixed `α`) and `F` (`α = n`), and the
//! auxiliary series `r`.
//!
//! The mgf `M_n(t)` has logarithmic derivative `y_n = t (ln M_n)'`, which
//! satisfies a second-order, second-degree equation in sigma form. Writing
//! `y_n = Σ_{p≥1} a_p t^p` gives `a_p = (-1)^p κ_p / (p-1)!`. The coefficient
//! equations are quadratic at every order past the first, with roots `0` and
//! the cumulant; the zero root continues the exact linear solution
//! `y = -n t / α` and is discarded ([`BranchRule::RejectTerminating`]).

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::numerics::formal::{solve_order_by_order, BranchRule, RationalSeries, Series};
use crate::numerics::ratfunc::RatFunc;
use crate::numerics::{certify, Certified, Field, PrecisionContext};

/// Cumulants `κ_1..κ_P` of `Σ_j 1/x_j` together with the coefficients of
/// `y_n`.
#[derive(Debug, Clone)]
pub struct CumulantSeries {
    pub n: Rational,
    pub alpha: Rational,
    pub order: usize,
    /// `kappa[p-1] = κ_p`.
    pub kappa: Vec<Rational>,
    /// `y_n` through `t^P`.
    pub y: RationalSeries,
    /// `valid[p-1]` is true when `κ_p` is finite for the ensemble (`α > p-1`).
    pub valid: Vec<bool>,
}

impl CumulantSeries {
    pub fn kappa(&self, p: usize) -> &Rational {
        &self.kappa[p - 1]
    }

    pub fn moments(&self) -> Vec<Rational> {
        moments_from_cumulants(&self.kappa)
    }
}

fn factorial(k: usize) -> Integer {
    Integer::from(Integer::factorial(k as u32))
}

/// Residual of the `y_n` equation
/// `(t y'')² - (n - (2n+α) y')² + 4 (n(n+α) + t y' - y) y' (y'-1)`.
pub fn h_residual<F: Field>(y: &Series<F>, n: &F, alpha: &F) -> Series<F> {
    let d1 = y.deriv();
    let d2 = d1.deriv();
    let one = n.one_like();
    let two_n_alpha = n.lift_i(2) * n.clone() + alpha.clone();
    let lin = d1.scale(&two_n_alpha).neg().add_const(n);
    let ham = d1
        .mul_t()
        .sub(y)
        .add_const(&(n.clone() * (n.clone() + alpha.clone())));
    let quart = ham.mul(&d1).mul(&d1.add_const(&-one)).scale(&n.lift_i(4));
    d2.mul_t().sq().sub(&lin.sq()).add(&quart)
}

/// Residual of `(tY'')² - 1 - α²Y'² - 2αY' + 4(tY' - Y)Y'²`.
pub fn y_residual<F: Field>(y: &Series<F>, alpha: &F) -> Series<F> {
    let d1 = y.deriv();
    let d2 = d1.deriv();
    let one = alpha.one_like();
    let d1sq = d1.sq();
    let quad = d1sq
        .scale(&(alpha.clone() * alpha.clone()))
        .add(&d1.scale(&(alpha.lift_i(2) * alpha.clone())))
        .add_const(&one);
    let cubic = d1.mul_t().sub(y).mul(&d1sq).scale(&one.lift_i(4));
    d2.mul_t().sq().sub(&quad).add(&cubic)
}

/// Residual of `s²r''² - 2s r'³ + ((8r-1)/4) r'² + 2α r' - 1`.
pub fn rs4_residual<F: Field>(r: &Series<F>, alpha: &F) -> Series<F> {
    let d1 = r.deriv();
    let d2 = d1.deriv();
    let one = alpha.one_like();
    let d1sq = d1.sq();
    let coef = r
        .scale(&one.lift_i(8))
        .add_const(&-one.clone())
        .scale(&one.lift_q(&Rational::from((1, 4))));
    d2.mul_t()
        .sq()
        .sub(&d1sq.mul(&d1).mul_t().scale(&one.lift_i(2)))
        .add(&coef.mul(&d1sq))
        .add(&d1.scale(&(alpha.lift_i(2) * alpha.clone())))
        .add_const(&-one)
}

/// Residual of `2s²r'r''' - s²r''² + 2s r'r'' - 4s r'³ + (2r - 1/4) r'² + 1`.
pub fn rs1_residual<F: Field>(r: &Series<F>) -> Series<F> {
    let d1 = r.deriv();
    let d2 = d1.deriv();
    let d3 = d2.deriv();
    let Some(one) = r.coeffs().first().map(|c| c.one_like()) else {
        return r.clone();
    };
    let d1sq = d1.sq();
    let a = d1.mul(&d3.mul_t().mul_t()).scale(&one.lift_i(2));
    let b = d2.mul_t().sq();
    let c = d1.mul(&d2).mul_t().scale(&one.lift_i(2));
    let d = d1sq.mul(&d1).mul_t().scale(&one.lift_i(4));
    let e = r
        .scale(&one.lift_i(2))
        .add_const(&-one.lift_q(&Rational::from((1, 4))))
        .mul(&d1sq);
    a.sub(&b).add(&c).sub(&d).add(&e).add_const(&one)
}

/// Residual of `2F + F' - 4tF' - 6tF'² + 4FF' - 1`.
pub fn ff_residual<F: Field>(f: &Series<F>) -> Series<F> {
    let d1 = f.deriv();
    let Some(one) = f.coeffs().first().map(|c| c.one_like()) else {
        return f.clone();
    };
    f.scale(&one.lift_i(2))
        .add(&d1)
        .sub(&d1.mul_t().scale(&one.lift_i(4)))
        .sub(&d1.sq().mul_t().scale(&one.lift_i(6)))
        .add(&f.mul(&d1).scale(&one.lift_i(4)))
        .add_const(&-one)
}

/// Residual of `(1 - F')² - 4F'(F'+1)(tF' - F)`.
pub fn ff2_residual<F: Field>(f: &Series<F>) -> Series<F> {
    let d1 = f.deriv();
    let Some(one) = f.coeffs().first().map(|c| c.one_like()) else {
        return f.clone();
    };
    let lead = d1.neg().add_const(&one).sq();
    let tail = d1
        .mul(&d1.add_const(&one))
        .mul(&d1.mul_t().sub(f))
        .scale(&one.lift_i(4));
    lead.sub(&tail)
}

/// Residual of `(4 - 8F)F' - F'² - 4FF'² + 4tF'² - 3`.
pub fn ff3_residual<F: Field>(f: &Series<F>) -> Series<F> {
    let d1 = f.deriv();
    let Some(one) = f.coeffs().first().map(|c| c.one_like()) else {
        return f.clone();
    };
    let d1sq = d1.sq();
    f.scale(&-one.lift_i(8))
        .add_const(&one.lift_i(4))
        .mul(&d1)
        .sub(&d1sq)
        .sub(&f.mul(&d1sq).scale(&one.lift_i(4)))
        .add(&d1sq.mul_t().scale(&one.lift_i(4)))
        .add_const(&-one.lift_i(3))
}

/// Coefficients of `y_n` through `t^p` over any exact field, e.g. rational
/// functions of `n`.
pub fn y_n_series<F: Field>(n: &F, alpha: &F, p: usize) -> Result<Series<F>> {
    solve_order_by_order(&[n.zero_like()], p, BranchRule::RejectTerminating, |y| {
        h_residual(y, n, alpha)
    })
}

/// Exact cumulants `κ_1..κ_P`. With `strict`, orders at which the cumulant
/// is infinite (`α ≤ p-1`) are rejected up front; otherwise they are
/// returned as the formal continuation and flagged in `valid`.
pub fn cumulants_exact(
    n: &Rational,
    alpha: &Rational,
    p: usize,
    strict: bool,
) -> Result<CumulantSeries> {
    if p == 0 {
        return Err(Error::domain("series order must be at least 1"));
    }
    if *n <= 0 || !crate::numerics::is_integer(n) {
        return Err(Error::domain(format!(
            "n must be a positive integer, got {n}"
        )));
    }
    if *alpha <= -1 {
        return Err(Error::domain(format!("alpha must exceed -1, got {alpha}")));
    }
    let valid: Vec<bool> = (1..=p).map(|k| *alpha > (k as i64 - 1)).collect();
    if strict {
        if let Some(k) = valid.iter().position(|v| !v) {
            return Err(Error::domain(format!(
                "kappa_{} is infinite for alpha = {alpha}; need alpha > {}",
                k + 1,
                k
            )));
        }
    }
    let y = y_n_series(n, alpha, p)?;
    let kappa = (1..=p)
        .map(|k| {
            let c = Rational::from(y.coeff(k) * factorial(k - 1));
            if k % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .collect();
    Ok(CumulantSeries {
        n: n.clone(),
        alpha: alpha.clone(),
        order: p,
        kappa,
        y,
        valid,
    })
}

/// Moments `m_1..m_P` from cumulants `κ_1..κ_P`.
pub fn moments_from_cumulants(kappa: &[Rational]) -> Vec<Rational> {
    let p = kappa.len();
    let mut g = vec![Rational::new(); p + 1];
    for (i, k) in kappa.iter().enumerate() {
        let j = i + 1;
        g[j] = Rational::from(k / factorial(j));
    }
    let m = Series::new(g).exp().expect("zero constant term");
    (1..=p)
        .map(|j| Rational::from(m.coeff(j) * factorial(j)))
        .collect()
}

/// `Y(s)`, the limit of `y_n(s/n)` at fixed `α`, through `s^p`.
pub fn y_limit_series(alpha: &Rational, p: usize) -> Result<RationalSeries> {
    solve_order_by_order(&[Rational::new()], p, BranchRule::RejectTerminating, |y| {
        y_residual(y, alpha)
    })
}

/// `F(t)`, the limit of `n^{-2} y_n(-n² t)` at `α = n`, through `t^p`.
pub fn f_limit_series(p: usize) -> Result<RationalSeries> {
    solve_order_by_order(&[Rational::new()], p, BranchRule::Strict, ff_residual)
}

/// `r(0) = (1 - 4α²)/8`.
pub fn r_initial(alpha: &Rational) -> Rational {
    (1 - (4 * alpha.clone().square())) / 8
}

/// `r(s)` through `s^p`, solved from its own first-order equation.
pub fn r_series(alpha: &Rational, p: usize) -> Result<RationalSeries> {
    solve_order_by_order(&[r_initial(alpha)], p, BranchRule::RejectTerminating, |r| {
        rs4_residual(r, alpha)
    })
}

/// `r(s) = -2 Y(s/2) + r(0)`.
pub fn r_from_y(y: &RationalSeries, alpha: &Rational) -> RationalSeries {
    y.rescale(&Rational::from((1, 2)))
        .scale(&Rational::from(-2))
        .add_const(&r_initial(alpha))
}

/// `Y(s) = (1 - 4α² - 8 r(2s)) / 16`.
pub fn y_from_r(r: &RationalSeries, alpha: &Rational) -> RationalSeries {
    let c = 1 - (4 * alpha.clone().square());
    r.rescale(&Rational::from(2))
        .scale(&Rational::from(-8))
        .add_const(&c)
        .scale(&Rational::from((1, 16)))
}

/// `y_n` coefficients as rational functions of `n` at fixed `α`.
pub fn y_n_symbolic(alpha: &Rational, p: usize) -> Result<Series<RatFunc>> {
    y_n_series(&RatFunc::var(), &RatFunc::constant(alpha.clone()), p)
}

/// `y_n` coefficients as rational functions of `n` along `α = n`.
pub fn y_n_symbolic_diagonal(p: usize) -> Result<Series<RatFunc>> {
    let n = RatFunc::var();
    y_n_series(&n, &n, p)
}

/// `lim_{n→∞} a_p n^{-p}` for `p = 1..P`, from the exact coefficients.
pub fn y_limit_from_cumulants(alpha: &Rational, p: usize) -> Result<Vec<Rational>> {
    let s = y_n_symbolic(alpha, p)?;
    (1..=p)
        .map(|k| {
            s.coeff(k)
                .limit_scaled(-(k as i64))
                .ok_or_else(|| Error::Series(format!("a_{k} n^-{k} diverges as n grows")))
        })
        .collect()
}

/// `lim_{n→∞} (-1)^p a_p(n, n) n^{2p-2}` for `p = 1..P`.
pub fn f_limit_from_cumulants(p: usize) -> Result<Vec<Rational>> {
    let s = y_n_symbolic_diagonal(p)?;
    (1..=p)
        .map(|k| {
            let l = s.coeff(k).limit_scaled(2 * k as i64 - 2).ok_or_else(|| {
                Error::Series(format!("a_{k}(n,n) n^{} diverges as n grows", 2 * k - 2))
            })?;
            Ok(if k % 2 == 1 { -l } else { l })
        })
        .collect()
}

/// `exp(∫_0^t Y(ξ)/ξ dξ)`, the large-`n` limit of `M_n(t/n)`, from a
/// truncated series.
#[derive(Debug, Clone)]
pub struct LimitMgf {
    pub value: Certified<Float>,
    /// Highest power of `Y` used; below the request when a coefficient is
    /// infinite for this `α`.
    pub order: usize,
    /// `|Y_P t^P / P|`, a size estimate for the truncation error of the
    /// exponent.
    pub last_term: f64,
    /// True when `last_term` exceeds the tolerance.
    pub truncation_warning: bool,
}

pub fn limit_mgf(
    alpha: &Rational,
    t: &Rational,
    p: usize,
    ctx: &PrecisionContext,
) -> Result<LimitMgf> {
    if p == 0 {
        return Err(Error::domain("series order must be at least 1"));
    }
    // Y_p is finite only while α > p - 1
    let mut order = p;
    let y = loop {
        match y_limit_series(alpha, order) {
            Ok(y) => break y,
            Err(Error::DenominatorVanishing { .. }) if order > 1 => order -= 1,
            Err(e) => return Err(e),
        }
    };
    let order = order.min(y.order());
    let mut expo = vec![Rational::new(); order + 1];
    for (k, e) in expo.iter_mut().enumerate().skip(1) {
        *e = Rational::from(y.coeff(k) / k as u32);
    }
    let expo = RationalSeries::from_rationals(&expo);
    let last = &expo.coeffs()[order] * rug::ops::Pow::pow(t.clone(), order as i32);
    let last_term = last.to_f64().abs();
    let value = certify(ctx, "limit mgf", |bits| {
        let x = Float::with_val(bits, t);
        Ok(expo.eval_float(&x).exp())
    })?;
    Ok(LimitMgf {
        value,
        order,
        last_term,
        truncation_warning: last_term > ctx.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    #[test]
    fn first_two_cumulants() {
        let c = cumulants_exact(&q(3, 1), &q(5, 2), 2, true).unwrap();
        let (n, a) = (q(3, 1), q(5, 2));
        assert_eq!(c.kappa[0], Rational::from(&n / &a));
        let k2 = Rational::from(&n * &n) + Rational::from(&n * &a);
        let d = Rational::from(&a * &a) * (Rational::from(&a * &a) - 1);
        assert_eq!(c.kappa[1], k2 / d);
    }

    #[test]
    fn single_particle_moments() {
        // n = 1: E[x^-k] = Γ(α+1-k)/Γ(α+1)
        let c = cumulants_exact(&q(1, 1), &q(7, 1), 4, true).unwrap();
        let m = c.moments();
        assert_eq!(m, vec![q(1, 7), q(1, 42), q(1, 210), q(1, 840)]);
    }

    #[test]
    fn strict_rejects_infinite_cumulants() {
        assert!(cumulants_exact(&q(2, 1), &q(3, 2), 3, true).is_err());
        let c = cumulants_exact(&q(2, 1), &q(3, 2), 3, false).unwrap();
        assert_eq!(c.valid, vec![true, true, false]);
    }

    #[test]
    fn pole_reports_vanishing_denominator() {
        let e = cumulants_exact(&q(2, 1), &q(1, 1), 2, false).unwrap_err();
        assert!(matches!(e, Error::DenominatorVanishing { .. }), "{e}");
    }

    #[test]
    fn f_series_leading_terms() {
        let f = f_limit_series(3).unwrap();
        assert_eq!(f.coeff(1), &q(1, 1));
        assert!(ff2_residual(&f).is_zero_through(2));
        assert!(ff3_residual(&f).is_zero_through(2));
    }

    #[test]
    fn r_and_y_agree() {
        let a = q(7, 2);
        let y = y_limit_series(&a, 5).unwrap();
        let r = r_series(&a, 5).unwrap();
        assert_eq!(r_from_y(&y, &a), r);
        assert_eq!(y_from_r(&r, &a), y);
    }

    #[test]
    fn limit_mgf_drops_infinite_orders() {
        let ctx = PrecisionContext::new(128, 1e-25, 1024).unwrap();
        let m = limit_mgf(&q(2, 1), &q(1, 10), 5, &ctx).unwrap();
        assert_eq!(m.order, 2);
        assert!(m.truncation_warning);
    }
}
