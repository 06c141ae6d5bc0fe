//! Scalar abstractions shared by the exact-rational and extended-precision
//! code paths.
//!
//! [`Field`] is the minimal arithmetic surface used by generic formula code
//! (Hamiltonians, ODE residuals, jet transforms, formal series). It is
//! implemented for [`rug::Rational`] (exact), [`rug::Float`] (real, fixed
//! working precision), [`Cplx`] (complex pair of floats) and the rational
//! functions of [`super::ratfunc`].
//!
//! [`Numeric`] adds what pivoted elimination needs and is only implemented
//! by the two floating types.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::{Float, Rational};

pub trait Field:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Integer constant carrying the same precision/context as `self`.
    fn lift_i(&self, v: i64) -> Self;
    /// Rational constant carrying the same precision/context as `self`.
    fn lift_q(&self, q: &Rational) -> Self;
    fn is_zero(&self) -> bool;
    /// Absolute value (modulus) as a double; saturates to `inf`.
    fn abs_f64(&self) -> f64;

    fn zero_like(&self) -> Self {
        self.lift_i(0)
    }

    fn one_like(&self) -> Self {
        self.lift_i(1)
    }

    fn sq(&self) -> Self {
        self.clone() * self.clone()
    }
}

/// Floating scalars usable in pivoted elimination.
pub trait Numeric: Field {
    fn prec(&self) -> u32;
    /// Pivot magnitude (|x| for reals, |re| + |im| for complex).
    fn pivot_norm(&self) -> Float;
    fn from_float(x: Float) -> Self;
    fn to_cplx(&self) -> Cplx;
}

impl Field for Rational {
    fn lift_i(&self, v: i64) -> Self {
        Rational::from(v)
    }
    fn lift_q(&self, q: &Rational) -> Self {
        q.clone()
    }
    fn is_zero(&self) -> bool {
        *self.numer() == 0
    }
    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Field for Float {
    fn lift_i(&self, v: i64) -> Self {
        Float::with_val(self.prec(), v)
    }
    fn lift_q(&self, q: &Rational) -> Self {
        Float::with_val(self.prec(), q)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn abs_f64(&self) -> f64 {
        Float::with_val(53, self.abs_ref()).to_f64()
    }
}

impl Numeric for Float {
    fn prec(&self) -> u32 {
        Float::prec(self)
    }
    fn pivot_norm(&self) -> Float {
        Float::with_val(Float::prec(self), self.abs_ref())
    }
    fn from_float(x: Float) -> Self {
        x
    }
    fn to_cplx(&self) -> Cplx {
        Cplx::from_real(self.clone())
    }
}

/// Complex number carried as a pair of extended-precision floats.
#[derive(Clone, PartialEq)]
pub struct Cplx {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Cplx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e} + {:e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl Cplx {
    pub fn new(re: Float, im: Float) -> Self {
        Cplx { re, im }
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        Cplx { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Cplx::from_real(Float::new(prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn conj(&self) -> Self {
        Cplx::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sq(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: &Float) -> Self {
        let p = self.prec();
        Cplx::new(
            Float::with_val(p, &self.re * s),
            Float::with_val(p, &self.im * s),
        )
    }

    /// `|im| <= rel * |re|` (or both vanish).
    pub fn is_real_within(&self, rel: f64) -> bool {
        let im = self.im.abs_f64();
        let re = self.re.abs_f64();
        im <= rel * re || im == 0.0
    }

    /// Relative size of the imaginary part, `|im| / |z|`.
    pub fn imag_residue(&self) -> f64 {
        let a = self.abs_f64();
        if a == 0.0 {
            0.0
        } else {
            self.im.abs_f64() / a
        }
    }

    /// `e^{r pi i}` for rational `r`, exact at multiples of one half.
    pub fn exp_i_pi(r: &Rational, prec: u32) -> Self {
        // reduce r modulo 2 exactly
        let two = Rational::from(2);
        let k = Rational::from(r / &two).floor();
        let red = Rational::from(r - &(k * &two));
        let half = Rational::from((1, 2));
        let quarter_turns = Rational::from(&red / &half);
        if *quarter_turns.denom() == 1 {
            let q = quarter_turns.numer().to_i32().unwrap_or(0).rem_euclid(4);
            let (c, s) = match q {
                0 => (1, 0),
                1 => (0, 1),
                2 => (-1, 0),
                _ => (0, -1),
            };
            return Cplx::new(Float::with_val(prec, c), Float::with_val(prec, s));
        }
        let angle = Float::with_val(prec, Constant::Pi) * Float::with_val(prec, &red);
        let (s, c) = angle.sin_cos(Float::new(prec));
        Cplx::new(c, s)
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        let p = self.prec();
        let m = self.abs().ln();
        let arg = Float::with_val(p, self.im.atan2_ref(&self.re));
        Cplx::new(m, arg)
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        Cplx::new(Float::with_val(p, &m * &c), m * s)
    }
}

impl Add for Cplx {
    type Output = Cplx;
    fn add(self, o: Cplx) -> Cplx {
        Cplx::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Cplx {
    type Output = Cplx;
    fn sub(self, o: Cplx) -> Cplx {
        Cplx::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Cplx {
    type Output = Cplx;
    fn mul(self, o: Cplx) -> Cplx {
        let p = self.prec();
        let rr = Float::with_val(p, &self.re * &o.re);
        let ii = Float::with_val(p, &self.im * &o.im);
        let ri = Float::with_val(p, &self.re * &o.im);
        let ir = Float::with_val(p, &self.im * &o.re);
        Cplx::new(rr - ii, ri + ir)
    }
}

impl Div for Cplx {
    type Output = Cplx;
    fn div(self, o: Cplx) -> Cplx {
        let d = o.norm_sq();
        let num = self * o.conj();
        Cplx::new(num.re / &d, num.im / &d)
    }
}

impl Neg for Cplx {
    type Output = Cplx;
    fn neg(self) -> Cplx {
        Cplx::new(-self.re, -self.im)
    }
}

impl Field for Cplx {
    fn lift_i(&self, v: i64) -> Self {
        Cplx::from_real(Float::with_val(self.prec(), v))
    }
    fn lift_q(&self, q: &Rational) -> Self {
        Cplx::from_real(Float::with_val(self.prec(), q))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn abs_f64(&self) -> f64 {
        // avoid overflow of |z|^2 in the double range
        let a = self.re.abs_f64();
        let b = self.im.abs_f64();
        a.hypot(b)
    }
}

impl Numeric for Cplx {
    fn prec(&self) -> u32 {
        self.re.prec()
    }
    fn pivot_norm(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.abs_ref()) + Float::with_val(p, self.im.abs_ref())
    }
    fn from_float(x: Float) -> Self {
        Cplx::from_real(x)
    }
    fn to_cplx(&self) -> Cplx {
        self.clone()
    }
}

/// Relative distance `|a - b| / max(|a|, |b|)` evaluated at the lower of the two
/// precisions.
pub fn rel_diff_float(a: &Float, b: &Float) -> f64 {
    let p = a.prec().min(b.prec());
    let d = Float::with_val(p, a - b);
    let scale = if a.cmp_abs(b) == Some(std::cmp::Ordering::Less) {
        Float::with_val(p, b.abs_ref())
    } else {
        Float::with_val(p, a.abs_ref())
    };
    if scale.is_zero() {
        return if d.is_zero() { 0.0 } else { f64::INFINITY };
    }
    Float::with_val(53, d.abs() / scale).to_f64()
}

pub fn rel_diff_cplx(a: &Cplx, b: &Cplx) -> f64 {
    let p = a.prec().min(b.prec());
    let d = Cplx::new(
        Float::with_val(p, &a.re - &b.re),
        Float::with_val(p, &a.im - &b.im),
    );
    let sa = a.abs();
    let sb = b.abs();
    let scale = if sa > sb { sa } else { sb };
    if scale.is_zero() {
        return if d.is_zero() { 0.0 } else { f64::INFINITY };
    }
    Float::with_val(53, d.abs() / scale).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_i_pi_exact_quarter_turns() {
        let z = Cplx::exp_i_pi(&Rational::from((1, 2)), 128);
        assert!(z.re.is_zero());
        assert_eq!(z.im, 1);
        let z = Cplx::exp_i_pi(&Rational::from(-3), 128);
        assert_eq!(z.re, -1);
        assert!(z.im.is_zero());
        let z = Cplx::exp_i_pi(&Rational::from((7, 2)), 128);
        assert_eq!(z.im, -1);
    }

    #[test]
    fn exp_i_pi_generic_angle() {
        let z = Cplx::exp_i_pi(&Rational::from((1, 3)), 200);
        let half = Float::with_val(200, 0.5);
        assert!(rel_diff_float(&z.re, &half) < 1e-55);
    }

    #[test]
    fn complex_division_roundtrip() {
        let p = 128;
        let a = Cplx::new(Float::with_val(p, 3), Float::with_val(p, -2));
        let b = Cplx::new(Float::with_val(p, 0.5), Float::with_val(p, 7));
        let back = (a.clone() / b.clone()) * b;
        assert!(rel_diff_cplx(&a, &back) < 1e-35);
    }

    #[test]
    fn ln_exp_inverse() {
        let p = 160;
        let a = Cplx::new(Float::with_val(p, -1.25), Float::with_val(p, 0.75));
        assert!(rel_diff_cplx(&a.ln().exp(), &a) < 1e-45);
    }
}
