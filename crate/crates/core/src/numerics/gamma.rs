//! Gamma function by Spouge's approximation.
//!
//! For `Re z > 0`,
//!
//! ```text
//! Γ(z + 1) = (z + a)^(z + 1/2) e^-(z + a) [ c_0 + Σ_{k=1}^{a-1} c_k / (z + k) + ε ]
//! ```
//!
//! with `|ε| < a^(-1/2) (2π)^-(a + 1/2)`, so `a ≈ 0.377·bits` terms reach a
//! given precision. The coefficients alternate in sign and are large, which
//! costs roughly `1.5·a` bits of cancellation; they are computed with that
//! many guard bits and cached per `(a, working precision)`.

use std::cell::RefCell;
use std::collections::HashMap;

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use super::{certify, Certified, PrecisionContext};
use crate::error::{Error, Result};

thread_local! {
    static SPOUGE_CACHE: RefCell<HashMap<(u32, u32), Vec<Float>>> = RefCell::new(HashMap::new());
}

fn spouge_terms(bits: u32) -> u32 {
    // (2π)^-a < 2^-bits  <=>  a > bits ln2 / ln(2π)
    (bits as f64 * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI).ln()).ceil() as u32 + 2
}

fn spouge_coefficients(a: u32, wp: u32) -> Vec<Float> {
    SPOUGE_CACHE.with(|cache| {
        if let Some(c) = cache.borrow().get(&(a, wp)) {
            return c.clone();
        }
        let mut coeffs = Vec::with_capacity(a as usize);
        let two_pi = Float::with_val(wp, Constant::Pi) * 2u32;
        coeffs.push(two_pi.sqrt());
        let mut fact = Float::with_val(wp, 1); // (k-1)!
        for k in 1..a {
            if k > 1 {
                fact *= k - 1;
            }
            let base = Float::with_val(wp, a - k);
            let pw = base.clone().pow(Float::with_val(wp, k) - 0.5f64);
            let ex = Float::with_val(wp, a - k).exp();
            let mut c = pw * ex / &fact;
            if k % 2 == 0 {
                c = -c;
            }
            coeffs.push(c);
        }
        cache.borrow_mut().insert((a, wp), coeffs.clone());
        coeffs
    })
}

/// Γ(x) at working precision `prec` (no certification).
pub fn gamma_raw(x: &Float, prec: u32) -> Result<Float> {
    if x.is_integer() && *x <= 0 {
        return Err(Error::Pole(format!("{}", x.to_f64())));
    }
    if !x.is_finite() {
        return Err(Error::domain("gamma of non-finite argument"));
    }
    let a = spouge_terms(prec);
    let wp = prec + (a as f64 * 1.6) as u32 + 40;
    let x = Float::with_val(wp, x);
    if x < 0.5f64 {
        // Γ(x) Γ(1 - x) = π / sin(πx)
        let one_minus = Float::with_val(wp, 1) - &x;
        let g = gamma_raw(&one_minus, prec + 16)?;
        let g = Float::with_val(wp, &g);
        let pi = Float::with_val(wp, Constant::Pi);
        let s = Float::with_val(wp, &pi * &x).sin();
        return Ok(Float::with_val(prec, pi / (s * g)));
    }
    // Γ(x) = Γ(z + 1) with z = x - 1
    let z = x - 1u32;
    let coeffs = spouge_coefficients(a, wp);
    let mut sum = coeffs[0].clone();
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        sum += Float::with_val(wp, c / Float::with_val(wp, &z + k as u32));
    }
    let za = Float::with_val(wp, &z + a);
    let lead = Float::with_val(wp, za.ln_ref()) * (Float::with_val(wp, &z + 0.5f64)) - &za;
    Ok(Float::with_val(prec, lead.exp() * sum))
}

/// Certified Γ(x) for rational `x`.
pub fn gamma(x: &Rational, ctx: &PrecisionContext) -> Result<Certified<Float>> {
    if *x.denom() == 1 && *x <= 0 {
        return Err(Error::Pole(x.to_string()));
    }
    certify(ctx, "gamma", |bits| {
        let xf = Float::with_val(bits, x);
        gamma_raw(&xf, bits)
    })
}

/// Γ(1 + α) (1 + α)_j products: returns Γ(j + α) for j = 1..=n.
fn gamma_ladder(n: usize, alpha: &Rational, prec: u32) -> Result<Vec<Float>> {
    let base = Float::with_val(prec + 16, Rational::from(alpha + 1u32));
    let mut g = gamma_raw(&base, prec + 16)?;
    let mut out = Vec::with_capacity(n);
    for j in 1..=n {
        if j > 1 {
            g *= Float::with_val(prec + 16, Rational::from(alpha + (j as u32 - 1)));
        }
        out.push(g.clone());
    }
    Ok(out)
}

/// `D_n(0) = (1/n!) Π_{j=1}^n j! Γ(j + α)` at working precision `prec`.
pub fn lue_normalization_raw(n: usize, alpha: &Rational, prec: u32) -> Result<Float> {
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    if *alpha <= -1 {
        return Err(Error::domain(format!("alpha must exceed -1, got {alpha}")));
    }
    let wp = prec + 16;
    let gammas = gamma_ladder(n, alpha, prec)?;
    let mut prod = Float::with_val(wp, 1);
    let mut fact = Integer::from(1);
    for (j, g) in (1..=n).zip(gammas) {
        fact *= j as u32;
        prod *= Float::with_val(wp, &fact) * g;
    }
    prod /= Float::with_val(wp, &fact);
    Ok(Float::with_val(prec, prod))
}

pub fn lue_normalization(
    n: usize,
    alpha: &Rational,
    ctx: &PrecisionContext,
) -> Result<Certified<Float>> {
    certify(ctx, "lue_normalization", |bits| {
        lue_normalization_raw(n, alpha, bits)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rel_diff_float;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(128, 1e-35, 1024).unwrap()
    }

    #[test]
    fn small_integer_values() {
        let g1 = gamma(&Rational::from(1), &ctx()).unwrap().value;
        assert!(rel_diff_float(&g1, &Float::with_val(64, 1)) < 1e-35);
        let g5 = gamma(&Rational::from(5), &ctx()).unwrap().value;
        assert!(rel_diff_float(&g5, &Float::with_val(64, 24)) < 1e-35);
    }

    #[test]
    fn half_is_sqrt_pi() {
        let g = gamma(&Rational::from((1, 2)), &ctx()).unwrap().value;
        let sqrt_pi = Float::with_val(300, Constant::Pi).sqrt();
        assert!(rel_diff_float(&g, &sqrt_pi) < 1e-35);
    }

    #[test]
    fn poles_are_rejected() {
        assert!(matches!(
            gamma(&Rational::from(0), &ctx()),
            Err(Error::Pole(_))
        ));
        assert!(matches!(
            gamma(&Rational::from(-3), &ctx()),
            Err(Error::Pole(_))
        ));
        assert!(gamma_raw(&Float::with_val(64, -2), 64).is_err());
    }

    #[test]
    fn functional_equation() {
        for x in ["1/2", "13/10", "29/4"] {
            let x: Rational = x.parse().unwrap();
            let g = gamma(&x, &ctx()).unwrap().value;
            let g1 = gamma(&Rational::from(&x + 1u32), &ctx()).unwrap().value;
            let rhs = Float::with_val(300, &x) * g;
            assert!(rel_diff_float(&g1, &rhs) < 1e-34, "x = {x}");
        }
    }

    #[test]
    fn agrees_with_mpfr_gamma() {
        for bits in [64u32, 256, 1024] {
            for x in [-2.5f64, -0.3, 0.1, 0.5, 1.7, 3.25, 17.5, 101.125] {
                let xf = Float::with_val(bits, x);
                let ours = gamma_raw(&xf, bits).unwrap();
                let reference = Float::with_val(bits + 64, xf.gamma_ref());
                let d = rel_diff_float(&ours, &reference);
                let bound = 2f64.powi(-(bits.min(1000) as i32) + 12);
                assert!(d < bound, "x = {x}, bits = {bits}: {d:e}");
            }
        }
    }

    #[test]
    fn normalization_examples() {
        let c = ctx();
        let d = lue_normalization(1, &Rational::from(0), &c).unwrap().value;
        assert!(rel_diff_float(&d, &Float::with_val(64, 1)) < 1e-35);
        // direct product oracle: (1!Γ(1) · 2!Γ(2)) / 2! = 1
        // with α = 0 : Π j! Γ(j) / n! = (1·1)(2·1)/2 = 1 ... n = 2 gives 1·(2!·1!)/2! = 1
        let d2 = lue_normalization(2, &Rational::from(0), &c).unwrap().value;
        let oracle = Float::with_val(64, 2) / 2u32;
        assert!(rel_diff_float(&d2, &oracle) < 1e-35);
        // n = 3, α = 1: (1!·1!)(2!·2!)(3!·3!)/3! = 1·4·36/6 = 24
        let d3 = lue_normalization(3, &Rational::from(1), &c).unwrap().value;
        assert!(rel_diff_float(&d3, &Float::with_val(64, 24)) < 1e-35);
    }

    #[test]
    fn normalization_rejects_bad_alpha() {
        assert!(lue_normalization(2, &Rational::from(-1), &ctx()).is_err());
        assert!(lue_normalization(0, &Rational::from(1), &ctx()).is_err());
    }
}
