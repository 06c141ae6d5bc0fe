//! Precision management and the numerical primitives every other module builds
//! on: gamma function, double-exponential quadrature, pivoted elimination,
//! exact rational series and rational functions.
//!
//! Every floating computation runs at an explicit binary precision. A result
//! is *certified* at tolerance `tol` when recomputing it at twice the working
//! precision moves it by at most `tol` (relative); [`certify`] drives the
//! doubling until that holds or `max_bits` is reached.

pub mod field;
pub mod formal;
pub mod gamma;
pub mod linalg;
pub mod quad;
pub mod ratfunc;

use rug::{Float, Rational};

use crate::error::{Error, Result};
pub use field::{rel_diff_cplx, rel_diff_float, Cplx, Field, Numeric};

/// Working precision policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionContext {
    pub bits: u32,
    pub tol: f64,
    pub max_bits: u32,
}

impl PrecisionContext {
    pub fn new(bits: u32, tol: f64, max_bits: u32) -> Result<Self> {
        if bits < 64 {
            return Err(Error::domain(format!("bits must be >= 64, got {bits}")));
        }
        if max_bits < bits {
            return Err(Error::domain(format!(
                "max_bits ({max_bits}) must be >= bits ({bits})"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::domain(format!("tol must be positive, got {tol}")));
        }
        Ok(PrecisionContext {
            bits,
            tol,
            max_bits,
        })
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        PrecisionContext {
            bits,
            max_bits: self.max_bits.max(bits),
            ..*self
        }
    }

    pub fn with_tol(&self, tol: f64) -> Self {
        PrecisionContext { tol, ..*self }
    }

    /// Tolerance implied by a working precision: a few bits above unit roundoff.
    pub fn eps_at(bits: u32) -> f64 {
        2f64.powi(-(bits.min(1000) as i32) + 8)
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            bits: 256,
            tol: 1e-30,
            max_bits: 4096,
        }
    }
}

/// A value together with the evidence that it meets its tolerance.
#[derive(Debug, Clone)]
pub struct Certified<T> {
    pub value: T,
    /// Precision of the returned value.
    pub bits: u32,
    /// Relative change between the last two precision levels.
    pub tol_achieved: f64,
}

impl<T> Certified<T> {
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Certified<U> {
        Certified {
            value: f(self.value),
            bits: self.bits,
            tol_achieved: self.tol_achieved,
        }
    }
}

/// Relative distance between two evaluations of the same quantity.
pub trait Agreement {
    fn rel_diff(&self, other: &Self) -> f64;
}

impl Agreement for Float {
    fn rel_diff(&self, other: &Self) -> f64 {
        rel_diff_float(self, other)
    }
}

impl Agreement for Cplx {
    fn rel_diff(&self, other: &Self) -> f64 {
        rel_diff_cplx(self, other)
    }
}

impl<T: Agreement> Agreement for Vec<T> {
    fn rel_diff(&self, other: &Self) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.iter()
            .zip(other)
            .map(|(a, b)| a.rel_diff(b))
            .fold(0.0, f64::max)
    }
}

impl<A: Agreement, B: Agreement> Agreement for (A, B) {
    fn rel_diff(&self, other: &Self) -> f64 {
        self.0.rel_diff(&other.0).max(self.1.rel_diff(&other.1))
    }
}

/// Evaluate `f` at increasing precision until two consecutive levels agree to
/// `ctx.tol`. Precision-sensitive errors (near-zero pivots, quadrature
/// stalls) trigger escalation instead of failing immediately.
pub fn certify<T, F>(ctx: &PrecisionContext, what: &str, mut f: F) -> Result<Certified<T>>
where
    T: Agreement,
    F: FnMut(u32) -> Result<T>,
{
    let mut bits = ctx.bits;
    let mut lo = loop {
        match f(bits) {
            Ok(v) => break v,
            Err(e) if e.is_precision_sensitive() && bits * 2 <= ctx.max_bits => bits *= 2,
            Err(e) => return Err(e),
        }
    };
    let mut last = f64::INFINITY;
    while bits * 2 <= ctx.max_bits {
        let hi_bits = bits * 2;
        let hi = match f(hi_bits) {
            Ok(v) => v,
            Err(e) if e.is_precision_sensitive() && hi_bits * 2 <= ctx.max_bits => {
                bits = hi_bits;
                continue;
            }
            Err(e) => return Err(e),
        };
        let d = lo.rel_diff(&hi);
        if d <= ctx.tol {
            return Ok(Certified {
                value: hi,
                bits: hi_bits,
                tol_achieved: d,
            });
        }
        last = d;
        lo = hi;
        bits = hi_bits;
    }
    Err(Error::Certification {
        what: what.to_string(),
        achieved: last,
        tol: ctx.tol,
        bits,
    })
}

/// Parse `"7/10"`, `"-3"`, `"0.25"`, `"1e-3"` or `"2.5e2"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.contains('/') {
        return s
            .parse::<Rational>()
            .map_err(|e| Error::domain(format!("bad rational {s:?}: {e}")));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..]
                .parse()
                .map_err(|_| Error::domain(format!("bad exponent in {s:?}")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(i) => (&digits[..i], &digits[i + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
    {
        return Err(Error::domain(format!("bad number {s:?}")));
    }
    let all: String = format!("{int_part}{frac_part}");
    let num: rug::Integer = all
        .parse()
        .map_err(|_| Error::domain(format!("bad number {s:?}")))?;
    let scale = exp - frac_part.len() as i32;
    let mut r = Rational::from(num);
    let ten = Rational::from(10);
    if scale >= 0 {
        for _ in 0..scale {
            r *= &ten;
        }
    } else {
        for _ in 0..(-scale) {
            r /= &ten;
        }
    }
    Ok(if neg { -r } else { r })
}

/// `true` when `r` is an integer.
pub fn is_integer(r: &Rational) -> bool {
    *r.denom() == 1
}

/// Integer value of `r` when it is a (small) integer.
pub fn as_i64(r: &Rational) -> Option<i64> {
    if is_integer(r) {
        r.numer().to_i64()
    } else {
        None
    }
}

pub fn float(prec: u32, q: &Rational) -> Float {
    Float::with_val(prec, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_decimal_forms() {
        assert_eq!(parse_rational("0.25").unwrap(), Rational::from((1, 4)));
        assert_eq!(parse_rational("-7/10").unwrap(), Rational::from((-7, 10)));
        assert_eq!(parse_rational("1e-3").unwrap(), Rational::from((1, 1000)));
        assert_eq!(parse_rational("2.5e2").unwrap(), Rational::from(250));
        assert_eq!(parse_rational("5").unwrap(), Rational::from(5));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn context_validation() {
        assert!(PrecisionContext::new(32, 1e-10, 256).is_err());
        assert!(PrecisionContext::new(256, 1e-10, 128).is_err());
        assert!(PrecisionContext::new(256, 0.0, 512).is_err());
        assert!(PrecisionContext::new(256, 1e-10, 512).is_ok());
    }

    #[test]
    fn certify_escalates_until_agreement() {
        let ctx = PrecisionContext::new(64, 1e-40, 1024).unwrap();
        let c = certify(&ctx, "pi", |bits| {
            Ok(Float::with_val(bits, rug::float::Constant::Pi))
        })
        .unwrap();
        assert!(c.bits >= 256);
        assert!(c.tol_achieved <= 1e-40);
    }

    #[test]
    fn certify_reports_failure_at_ceiling() {
        let ctx = PrecisionContext::new(64, 1e-10, 256).unwrap();
        // a "computation" that never settles
        let err = certify(&ctx, "drift", |bits| Ok(Float::with_val(bits, bits))).unwrap_err();
        assert!(matches!(err, Error::Certification { .. }));
    }
}
