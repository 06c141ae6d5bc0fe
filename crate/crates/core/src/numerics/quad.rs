//! Double-exponential quadrature for vector-valued integrands.
//!
//! Two maps are provided:
//!
//! * [`Domain::HalfLine`]: `x = exp((π/2) sinh s)` on `(0, ∞)`. This is the
//!   log substitution `x = e^u` followed by a sinh stretch.
//! * [`Domain::UnitInterval`]: `x = 1 / (1 + exp(-π sinh s))` on `(0, 1)`.
//!   Both `x` and `1 - x` are formed directly, so integrands with
//!   `(1 - x)^β` factors never suffer cancellation near the right end.
//!
//! The trapezoid step is halved until successive levels agree to the
//! requested tolerance. Every component of a vector integrand shares the same
//! nodes, which is what makes whole moment sequences cheap.

use rug::float::Constant;
use rug::Float;

use super::{certify, Certified, PrecisionContext};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    HalfLine,
    UnitInterval,
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub values: Vec<Float>,
    /// Largest relative change between the last two refinement levels.
    pub err_est: f64,
    pub levels: u32,
    pub nodes: usize,
}

const MAX_LEVELS: u32 = 14;
const S_MAX: f64 = 8.0;

struct Walker<'a, F> {
    domain: Domain,
    wp: u32,
    f: &'a mut F,
    acc: Vec<Float>,
    max_term: Vec<Float>,
    nodes: usize,
}

impl<F> Walker<'_, F>
where
    F: FnMut(&Float, &Float) -> Vec<Float>,
{
    /// Evaluate the weighted integrand at `s`; `None` when the node falls
    /// outside the representable range.
    fn node(&mut self, s: &Float) -> Option<Vec<Float>> {
        let wp = self.wp;
        let pi = Float::with_val(wp, Constant::Pi);
        let sh = Float::with_val(wp, s.sinh_ref());
        let ch = Float::with_val(wp, s.cosh_ref());
        let (x, xc, w) = match self.domain {
            Domain::HalfLine => {
                let u = Float::with_val(wp, &pi * &sh) / 2u32;
                let x = u.exp();
                let w = Float::with_val(wp, &pi * &ch) / 2u32 * &x;
                (x.clone(), x, w)
            }
            Domain::UnitInterval => {
                let u = Float::with_val(wp, &pi * &sh);
                let em = Float::with_val(wp, -&u).exp();
                let ep = u.exp();
                let x = Float::with_val(wp, 1) / (em + 1u32);
                let xc = Float::with_val(wp, 1) / (ep + 1u32);
                let w = Float::with_val(wp, &pi * &ch) * &x * &xc;
                (x, xc, w)
            }
        };
        if x.is_zero() || xc.is_zero() || !x.is_finite() || !w.is_normal() {
            return None;
        }
        self.nodes += 1;
        let vals = (self.f)(&x, &xc);
        Some(vals.into_iter().map(|v| v * &w).collect())
    }

    /// Add the terms at `s = k·h` for `k = start, start+step, ...` in one
    /// direction until they become negligible.
    fn sweep(&mut self, h: &Float, start: i64, step: i64) -> Result<()> {
        let wp = self.wp;
        let mut k = start;
        let mut quiet = 0;
        loop {
            let s = Float::with_val(wp, h * k);
            if s.clone().abs() > S_MAX {
                return Ok(());
            }
            let Some(terms) = self.node(&s) else {
                return Ok(());
            };
            let mut negligible = true;
            for (c, term) in terms.into_iter().enumerate() {
                if !term.is_finite() {
                    return Err(Error::Quadrature(format!(
                        "non-finite integrand at s = {}",
                        s.to_f64()
                    )));
                }
                let mag = Float::with_val(wp, term.abs_ref());
                if mag > self.max_term[c] {
                    self.max_term[c] = mag.clone();
                }
                let thresh = Float::with_val(wp, &self.max_term[c] >> (wp as i32 + 4));
                if mag > thresh {
                    negligible = false;
                }
                self.acc[c] += term;
            }
            if negligible && s.clone().abs() > 1 {
                quiet += 1;
                if quiet >= 2 {
                    return Ok(());
                }
            } else {
                quiet = 0;
            }
            k += step;
        }
    }
}

/// Integrate a vector of functions over `domain` at working precision `prec`.
///
/// The closure receives `(x, 1 - x)` for the unit interval and `(x, x)` on
/// the half line. Refinement stops when successive levels agree to `tol`
/// (relative, per component).
pub fn integrate_vec<F>(
    domain: Domain,
    prec: u32,
    tol: f64,
    dim: usize,
    mut f: F,
) -> Result<QuadResult>
where
    F: FnMut(&Float, &Float) -> Vec<Float>,
{
    let wp = prec + 24;
    let mut w = Walker {
        domain,
        wp,
        f: &mut f,
        acc: vec![Float::new(wp); dim],
        max_term: vec![Float::new(wp); dim],
        nodes: 0,
    };
    let mut h = Float::with_val(wp, 0.5);
    let centre = w
        .node(&Float::new(wp))
        .ok_or_else(|| Error::Quadrature("integrand undefined at the centre node".into()))?;
    for (c, term) in centre.into_iter().enumerate() {
        w.max_term[c] = Float::with_val(wp, term.abs_ref());
        w.acc[c] += term;
    }
    w.sweep(&h, 1, 1)?;
    w.sweep(&h, -1, -1)?;
    let mut prev: Vec<Float> = w.acc.iter().map(|a| Float::with_val(wp, a * &h)).collect();
    let mut err = f64::INFINITY;
    for level in 1..=MAX_LEVELS {
        h /= 2u32;
        w.sweep(&h, 1, 2)?;
        w.sweep(&h, -1, -2)?;
        let cur: Vec<Float> = w.acc.iter().map(|a| Float::with_val(wp, a * &h)).collect();
        err = cur
            .iter()
            .zip(&prev)
            .map(|(a, b)| super::rel_diff_float(a, b))
            .fold(0.0, f64::max);
        // a level must have seen at least a few halvings before agreement counts
        if level >= 3 && err <= tol {
            return Ok(QuadResult {
                values: cur.into_iter().map(|v| Float::with_val(prec, v)).collect(),
                err_est: err,
                levels: level,
                nodes: w.nodes,
            });
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "no agreement after {MAX_LEVELS} levels (last relative change {err:e})"
    )))
}

/// Scalar convenience wrapper.
pub fn integrate<F>(domain: Domain, prec: u32, tol: f64, mut f: F) -> Result<(Float, f64)>
where
    F: FnMut(&Float, &Float) -> Float,
{
    let r = integrate_vec(domain, prec, tol, 1, |x, xc| vec![f(x, xc)])?;
    Ok((r.values.into_iter().next().unwrap(), r.err_est))
}

/// Certified `∫_0^∞ f(x) dx`. The closure is called with the working
/// precision and the node.
pub fn integrate_zero_to_infinity<F>(ctx: &PrecisionContext, f: F) -> Result<Certified<Float>>
where
    F: Fn(u32, &Float) -> Float,
{
    certify(ctx, "integral over (0, inf)", |bits| {
        let tol = PrecisionContext::eps_at(bits);
        integrate(Domain::HalfLine, bits, tol, |x, _| f(bits, x)).map(|(v, _)| v)
    })
}

/// Certified `∫_0^1 f(x) dx`; the closure receives `(prec, x, 1 - x)`.
pub fn integrate_unit_interval<F>(ctx: &PrecisionContext, f: F) -> Result<Certified<Float>>
where
    F: Fn(u32, &Float, &Float) -> Float,
{
    certify(ctx, "integral over (0, 1)", |bits| {
        let tol = PrecisionContext::eps_at(bits);
        integrate(Domain::UnitInterval, bits, tol, |x, xc| f(bits, x, xc)).map(|(v, _)| v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rel_diff_float;
    use rug::ops::Pow;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(128, 1e-30, 1024).unwrap()
    }

    #[test]
    fn exponential_integrals() {
        let one = Float::with_val(64, 1);
        let r = integrate_zero_to_infinity(&ctx(), |p, x| Float::with_val(p, -x).exp()).unwrap();
        assert!(rel_diff_float(&r.value, &one) < 1e-30);
        let r =
            integrate_zero_to_infinity(&ctx(), |p, x| Float::with_val(p, -x).exp() * x).unwrap();
        assert!(rel_diff_float(&r.value, &one) < 1e-30);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫ x^{-1/2} e^{-x} = √π
        let r = integrate_zero_to_infinity(&ctx(), |p, x| {
            Float::with_val(p, -x).exp() / Float::with_val(p, x.sqrt_ref())
        })
        .unwrap();
        let sp = Float::with_val(200, Constant::Pi).sqrt();
        assert!(rel_diff_float(&r.value, &sp) < 1e-30);
    }

    #[test]
    fn beta_integral_with_complement() {
        // ∫_0^1 x^{-1/2} (1-x)^{-1/2} = π
        let r = integrate_unit_interval(&ctx(), |p, x, xc| {
            Float::with_val(p, 1)
                / (Float::with_val(p, x.sqrt_ref()) * Float::with_val(p, xc.sqrt_ref()))
        })
        .unwrap();
        let pi = Float::with_val(200, Constant::Pi);
        assert!(rel_diff_float(&r.value, &pi) < 1e-30);
        // Beta(2, 2) = 1/6
        let r =
            integrate_unit_interval(&ctx(), |_, x, xc| Float::with_val(x.prec(), x * xc)).unwrap();
        let sixth = Float::with_val(200, 1) / 6u32;
        assert!(rel_diff_float(&r.value, &sixth) < 1e-30);
    }

    #[test]
    fn vector_integrand_gamma_moments() {
        // ∫ x^j e^{-x} = j!
        let r = integrate_vec(Domain::HalfLine, 192, 1e-45, 8, |x, _| {
            let e = Float::with_val(x.prec(), -x).exp();
            (0..8)
                .map(|j| Float::with_val(x.prec(), x.pow(j as u32)) * &e)
                .collect()
        })
        .unwrap();
        let mut fact = 1u64;
        for (j, v) in r.values.iter().enumerate() {
            if j > 0 {
                fact *= j as u64;
            }
            assert!(
                rel_diff_float(v, &Float::with_val(64, fact)) < 1e-45,
                "j = {j}"
            );
        }
    }

    #[test]
    fn strongly_peaked_near_origin() {
        // ∫ x^{-3} e^{-x - t/x} with tiny t has its mass near x ≈ t/3
        let t = Float::with_val(128, 1e-9);
        let (v, _) = integrate(Domain::HalfLine, 128, 1e-30, |x, _| {
            let p = x.prec();
            let arg = Float::with_val(p, -x) - Float::with_val(p, &t / x);
            arg.exp() / Float::with_val(p, x.pow(3u32))
        })
        .unwrap();
        // exact: 2 t^{-1} K_2(2 √t) ≈ 1/t² - 1/(2t) + ... for small t (leading 1/t²)
        let lead = Float::with_val(128, 1) / Float::with_val(128, t.square_ref());
        assert!(rel_diff_float(&v, &lead) < 1e-8);
    }
}
