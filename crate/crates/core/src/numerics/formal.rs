//! Truncated power series over any [`Field`].
//!
//! A `Series` with coefficients `c_0..c_P` is known through order `P`; every
//! operation propagates the order honestly (a product is known to the smaller
//! order, a derivative loses one order, multiplication by `t` gains one).

use rug::{Float, Rational};

use super::field::Field;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series<F> {
    coeffs: Vec<F>,
}

/// Exact rational series.
pub type RationalSeries = Series<Rational>;

impl<F: Field> Series<F> {
    /// Series known through order `coeffs.len() - 1`. Must be non-empty.
    pub fn new(coeffs: Vec<F>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a series needs at least one coefficient"
        );
        Series { coeffs }
    }

    /// `c` as a series known through order `p`.
    pub fn constant(c: F, p: usize) -> Self {
        let z = c.zero_like();
        let mut coeffs = vec![z; p + 1];
        coeffs[0] = c;
        Series { coeffs }
    }

    /// The identity series `t` known through order `p` (`p >= 1`).
    pub fn variable(one: &F, p: usize) -> Self {
        let mut coeffs = vec![one.zero_like(); p + 1];
        if p >= 1 {
            coeffs[1] = one.one_like();
        }
        Series { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &F {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<F> {
        self.coeffs
    }

    pub fn truncate(&self, p: usize) -> Self {
        let p = p.min(self.order());
        Series {
            coeffs: self.coeffs[..=p].to_vec(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().min(o.coeffs.len());
        Series {
            coeffs: (0..n)
                .map(|i| self.coeffs[i].clone() + o.coeffs[i].clone())
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().min(o.coeffs.len());
        Series {
            coeffs: (0..n)
                .map(|i| self.coeffs[i].clone() - o.coeffs[i].clone())
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Series {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.coeffs.len().min(o.coeffs.len());
        let coeffs = (0..n)
            .map(|m| {
                let mut acc = self.coeffs[0].clone() * o.coeffs[m].clone();
                for i in 1..=m {
                    if self.coeffs[i].is_zero() || o.coeffs[m - i].is_zero() {
                        continue;
                    }
                    acc = acc + self.coeffs[i].clone() * o.coeffs[m - i].clone();
                }
                acc
            })
            .collect();
        Series { coeffs }
    }

    pub fn sq(&self) -> Self {
        self.mul(self)
    }

    pub fn scale(&self, c: &F) -> Self {
        Series {
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    /// `self / o` for `o(0) != 0`, known to the smaller order.
    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.coeffs[0].is_zero() {
            return Err(Error::Series("division by a series with c_0 = 0".into()));
        }
        let n = self.coeffs.len().min(o.coeffs.len());
        let mut q: Vec<F> = Vec::with_capacity(n);
        for m in 0..n {
            let mut acc = self.coeffs[m].clone();
            for i in 1..=m {
                acc = acc - o.coeffs[i].clone() * q[m - i].clone();
            }
            q.push(acc / o.coeffs[0].clone());
        }
        Ok(Series { coeffs: q })
    }

    pub fn add_const(&self, c: &F) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].clone() + c.clone();
        out
    }

    /// `d/dt`; loses one order. The derivative of an order-0 series is the
    /// order-0 zero series (no information is invented beyond that).
    pub fn deriv(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Series {
                coeffs: vec![self.coeffs[0].zero_like()],
            };
        }
        Series {
            coeffs: (1..self.coeffs.len())
                .map(|i| self.coeffs[i].clone() * self.coeffs[i].lift_i(i as i64))
                .collect(),
        }
    }

    /// `t · f`; gains one order.
    pub fn mul_t(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(self.coeffs[0].zero_like());
        coeffs.extend(self.coeffs.iter().cloned());
        Series { coeffs }
    }

    /// `f / t` for a series with vanishing constant term; loses one order.
    pub fn div_t(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Series(
                "division by t of a series with c_0 != 0".into(),
            ));
        }
        if self.coeffs.len() == 1 {
            return Ok(self.clone());
        }
        Ok(Series {
            coeffs: self.coeffs[1..].to_vec(),
        })
    }

    /// `∫_0^t f`; gains one order.
    pub fn integrate(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(self.coeffs[0].zero_like());
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.clone() / c.lift_i(i as i64 + 1));
        }
        Series { coeffs }
    }

    /// `f(c t)`.
    pub fn rescale(&self, c: &F) -> Self {
        let mut pw = c.one_like();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for x in &self.coeffs {
            coeffs.push(x.clone() * pw.clone());
            pw = pw * c.clone();
        }
        Series { coeffs }
    }

    /// `exp(f)` for `f(0) = 0`, via `g' = f' g`.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Series("exp of a series with c_0 != 0".into()));
        }
        let one = self.coeffs[0].one_like();
        let mut g = vec![one];
        for m in 1..self.coeffs.len() {
            let mut acc = self.coeffs[0].zero_like();
            for k in 1..=m {
                if self.coeffs[k].is_zero() {
                    continue;
                }
                acc = acc
                    + self.coeffs[k].lift_i(k as i64) * self.coeffs[k].clone() * g[m - k].clone();
            }
            g.push(acc / self.coeffs[0].lift_i(m as i64));
        }
        Ok(Series { coeffs: g })
    }

    /// `log(f)` for `f(0) = 1`, via `f g' = f'`.
    pub fn log(&self) -> Result<Self> {
        let one = self.coeffs[0].one_like();
        if !(self.coeffs[0].clone() - one).is_zero() {
            return Err(Error::Series("log of a series with c_0 != 1".into()));
        }
        // g_m = f_m - (1/m) Σ_{k=1}^{m-1} k g_k f_{m-k}
        let mut g = vec![self.coeffs[0].zero_like()];
        for m in 1..self.coeffs.len() {
            let mut acc = self.coeffs[0].zero_like();
            for k in 1..m {
                acc = acc
                    + self.coeffs[0].lift_i(k as i64) * g[k].clone() * self.coeffs[m - k].clone();
            }
            g.push(self.coeffs[m].clone() - acc / self.coeffs[0].lift_i(m as i64));
        }
        Ok(Series { coeffs: g })
    }

    /// Order of the first non-zero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero_through(&self, p: usize) -> bool {
        self.coeffs.iter().take(p + 1).all(|c| c.is_zero())
    }
}

impl RationalSeries {
    pub fn from_rationals(c: &[Rational]) -> Self {
        Series::new(c.to_vec())
    }

    /// Horner evaluation at `x`.
    pub fn eval_float(&self, x: &Float) -> Float {
        let p = x.prec();
        let mut acc = Float::new(p);
        for c in self.coeffs.iter().rev() {
            acc = acc * x + Float::with_val(p, c);
        }
        acc
    }
}

/// How the order-by-order solver picks a root when a coefficient equation is
/// quadratic with two distinct roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchRule {
    /// Always fail with [`Error::BranchObstruction`].
    Strict,
    /// When one root is `0` and choosing it makes the series so far an exact
    /// polynomial solution, take the other root; otherwise fail.
    RejectTerminating,
}

/// Solve `residual(y) = 0` for `y = Σ a_k t^k` order by order.
///
/// `seeds` fixes `a_0..a_{s-1}`; the solver determines `a_s..a_p`. At residual
/// order `m` the coefficient equation is treated as a polynomial in the
/// lowest undetermined coefficient, which must not be coupled to the next
/// one. Linear equations are solved, double roots are taken, and distinct
/// roots go through `rule`.
pub fn solve_order_by_order<F, R>(
    seeds: &[F],
    p: usize,
    rule: BranchRule,
    residual: R,
) -> Result<Series<F>>
where
    F: Field,
    R: Fn(&Series<F>) -> Series<F>,
{
    assert!(
        !seeds.is_empty(),
        "at least the constant term must be seeded"
    );
    let zero = seeds[0].zero_like();
    let mut known: Vec<F> = seeds.to_vec();
    // residual of the polynomial with given trailing coefficients, read at order m
    let eval = |known: &[F], tail: &[F], m: usize| -> F {
        let len = (known.len() + tail.len()).max(m + 1) + 4;
        let mut c = known.to_vec();
        c.extend(tail.iter().cloned());
        c.resize(len, zero.clone());
        let r = residual(&Series::new(c));
        r.coeffs.get(m).cloned().unwrap_or_else(|| zero.clone())
    };
    let one = zero.one_like();
    let minus = -one.clone();
    let mut m = 0usize;
    let max_orders = 4 * (p + 2);
    while known.len() <= p {
        if m > max_orders {
            return Err(Error::Series(format!(
                "no coefficient equation for a_{} within {max_orders} orders",
                known.len()
            )));
        }
        let k = known.len();
        let e0 = eval(&known, std::slice::from_ref(&zero), m);
        let ep = eval(&known, std::slice::from_ref(&one), m);
        let em = eval(&known, std::slice::from_ref(&minus), m);
        // coupling to a_{k+1}
        let coupled = !(eval(&known, &[zero.clone(), one.clone()], m) - e0.clone()).is_zero();
        let c2 = (ep.clone() + em.clone()) / zero.lift_i(2) - e0.clone();
        let c1 = (ep.clone() - em.clone()) / zero.lift_i(2);
        let c0 = e0;
        if coupled && !(c1.is_zero() && c2.is_zero()) {
            return Err(Error::Series(format!(
                "order {m} couples a_{k} and a_{}",
                k + 1
            )));
        }
        // cubic or higher dependence is not supported
        let e2 = eval(&known, &[zero.lift_i(2)], m);
        let quad_at_2 = c0.clone() + c1.clone() * zero.lift_i(2) + c2.clone() * zero.lift_i(4);
        if !(e2 - quad_at_2).is_zero() {
            return Err(Error::Series(format!(
                "order {m} equation has degree > 2 in a_{k}"
            )));
        }
        if c1.is_zero() && c2.is_zero() {
            if coupled {
                // a_k does not enter; the equation constrains a_{k+1} alone
                return Err(Error::Series(format!(
                    "order {m} skips a_{k} and determines a_{}",
                    k + 1
                )));
            }
            if !c0.is_zero() {
                // the coefficient that would fix a_k has vanished
                return Err(Error::DenominatorVanishing {
                    order: m,
                    detail: format!("a_{k} drops out of a non-trivial order-{m} equation"),
                });
            }
            m += 1;
            continue;
        }
        // does the known part already solve the equation exactly?
        let terminates = || {
            let mut c = known.clone();
            c.resize(3 * (k + 2), zero.clone());
            let r = residual(&Series::new(c));
            r.is_zero_through(r.order())
        };
        let root = if c2.is_zero() {
            if rule == BranchRule::RejectTerminating && c0.is_zero() && terminates() {
                // the non-terminating root has run off to infinity
                return Err(Error::DenominatorVanishing {
                    order: m,
                    detail: format!("a_{k}: only the terminating root 0 remains"),
                });
            }
            -c0 / c1
        } else {
            let disc = c1.clone() * c1.clone() - zero.lift_i(4) * c2.clone() * c0.clone();
            if disc.is_zero() {
                -c1 / (zero.lift_i(2) * c2)
            } else if rule == BranchRule::RejectTerminating && c0.is_zero() {
                // roots {0, -c1/c2}; 0 must continue an exact polynomial solution
                if terminates() {
                    -c1 / c2
                } else {
                    return Err(Error::BranchObstruction {
                        order: m,
                        detail: format!("a_{k} has roots 0 and {:?}", -c1 / c2),
                    });
                }
            } else {
                return Err(Error::BranchObstruction {
                    order: m,
                    detail: format!(
                        "a_{k}: quadratic {c2:?} x^2 + {c1:?} x + {c0:?} has distinct roots"
                    ),
                });
            }
        };
        known.push(root);
        m += 1;
    }
    Ok(Series::new(known))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    fn s(c: &[(i64, i64)]) -> RationalSeries {
        Series::new(c.iter().map(|&(a, b)| q(a, b)).collect())
    }

    #[test]
    fn product_order_is_minimum() {
        let a = s(&[(1, 1), (2, 1), (3, 1)]);
        let b = s(&[(1, 1), (-1, 1)]);
        let c = a.mul(&b);
        assert_eq!(c.order(), 1);
        assert_eq!(c.coeffs(), &[q(1, 1), q(1, 1)]);
    }

    #[test]
    fn division_inverts_product() {
        let a = s(&[(3, 1), (1, 2), (-2, 5), (7, 1)]);
        let b = s(&[(2, 1), (0, 1), (1, 3), (-1, 1)]);
        assert_eq!(a.mul(&b).div(&b).unwrap(), a);
        assert!(a.div(&s(&[(0, 1), (1, 1)])).is_err());
    }

    #[test]
    fn exp_log_roundtrip() {
        let f = s(&[(0, 1), (1, 2), (-1, 3), (2, 7), (1, 1)]);
        let g = f.exp().unwrap();
        assert_eq!(g.coeff(1), &q(1, 2));
        // exp(t/2 - t²/3) coefficient of t² = 1/8 - 1/3
        assert_eq!(g.coeff(2), &(q(1, 8) - q(1, 3)));
        assert_eq!(g.log().unwrap(), f);
    }

    #[test]
    fn derivative_and_integral() {
        let f = s(&[(5, 1), (1, 1), (3, 1), (4, 1)]);
        let d = f.deriv();
        assert_eq!(d.coeffs(), &[q(1, 1), q(6, 1), q(12, 1)]);
        assert_eq!(d.integrate().add_const(&q(5, 1)), f);
        assert_eq!(f.mul_t().div_t().unwrap(), f);
    }

    #[test]
    fn solver_linear_ode() {
        // y' = y, y(0) = 1 → 1/k!
        let y =
            solve_order_by_order(&[q(1, 1)], 6, BranchRule::Strict, |y| y.deriv().sub(y)).unwrap();
        let mut fact = 1i64;
        for k in 0..=6 {
            if k > 0 {
                fact *= k;
            }
            assert_eq!(y.coeff(k as usize), &q(1, fact));
        }
    }

    #[test]
    fn solver_double_root() {
        // (y' - 1)^2 = t^2 ... y(0)=0 : order 0 gives (a1 - 1)^2 = 0
        let y = solve_order_by_order(&[q(0, 1)], 3, BranchRule::Strict, |y| {
            let d = y.deriv().add_const(&q(-1, 1));
            d.sq()
        })
        .unwrap();
        assert_eq!(y.coeff(1), &q(1, 1));
    }

    #[test]
    fn solver_reports_distinct_roots() {
        // (y')^2 = 1 has roots ±1 at order 0
        let err = solve_order_by_order(&[q(0, 1)], 2, BranchRule::RejectTerminating, |y| {
            y.deriv().sq().add_const(&q(-1, 1))
        })
        .unwrap_err();
        assert!(matches!(err, Error::BranchObstruction { order: 0, .. }));
    }
}
