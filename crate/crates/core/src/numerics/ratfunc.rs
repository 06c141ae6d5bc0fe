//! Univariate polynomials and rational functions over ℚ.
//!
//! Used to carry series coefficients as exact functions of a symbolic
//! parameter (typically `n`) so that `n → ∞` limits can be read off by degree
//! comparison.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::Rational;

use super::field::Field;

/// Coefficients low to high, without trailing zeros. The zero polynomial is
/// the empty vector.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly(Vec<Rational>);

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})n"),
                _ => format!("({c})n^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Poly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(|x| *x == 0) {
            c.pop();
        }
        Poly(c)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    /// The indeterminate `n`.
    pub fn var() -> Self {
        Poly::new(vec![Rational::new(), Rational::from(1)])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Rational {
        self.0.last().cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    fn scale(&self, c: &Rational) -> Poly {
        Poly::new(self.0.iter().map(|x| Rational::from(x * c)).collect())
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let l = Rational::from(1) / self.lead();
        self.scale(&l)
    }

    /// Euclidean division: `(quotient, remainder)`.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.degree().unwrap();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quo = vec![Rational::new(); r.len() - dd];
        let dl = d.lead();
        for i in (dd..r.len()).rev() {
            let c = Rational::from(&r[i] / &dl);
            if c == 0 {
                continue;
            }
            for (j, dc) in d.0.iter().enumerate() {
                r[i - dd + j] -= Rational::from(&c * dc);
            }
            quo[i - dd] = c;
        }
        r.truncate(dd);
        (Poly::new(quo), Poly::new(r))
    }

    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r;
        }
        x.monic()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let z = Rational::new();
        Poly::new(
            (0..n)
                .map(|i| Rational::from(self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z)))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let z = Rational::new();
        Poly::new(
            (0..n)
                .map(|i| Rational::from(self.0.get(i).unwrap_or(&z) - o.0.get(i).unwrap_or(&z)))
                .collect(),
        )
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Rational::new(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += Rational::from(a * b);
            }
        }
        Poly::new(c)
    }
}

/// Reduced rational function `num / den` with monic denominator.
#[derive(Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "({:?}) / ({:?})", self.num, self.den)
        }
    }
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFunc {
                num,
                den: Poly::constant(Rational::from(1)),
            };
        }
        let g = Poly::gcd(&num, &den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let l = Rational::from(1) / den.lead();
        RatFunc {
            num: num.scale(&l),
            den: den.scale(&l),
        }
    }

    pub fn constant(c: Rational) -> Self {
        RatFunc::new(Poly::constant(c), Poly::constant(Rational::from(1)))
    }

    pub fn var() -> Self {
        RatFunc::new(Poly::var(), Poly::constant(Rational::from(1)))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// Value at a rational point; `None` at a pole.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        if d == 0 {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    /// `lim_{n→∞} f(n) · n^k`, or `None` when it diverges.
    pub fn limit_scaled(&self, k: i64) -> Option<Rational> {
        let Some(dn) = self.num.degree() else {
            return Some(Rational::new());
        };
        let dd = self.den.degree().unwrap();
        let excess = dn as i64 + k - dd as i64;
        match excess.cmp(&0) {
            std::cmp::Ordering::Less => Some(Rational::new()),
            std::cmp::Ordering::Equal => Some(self.num.lead() / self.den.lead()),
            std::cmp::Ordering::Greater => None,
        }
    }

    /// `f(n) n^k` has a finite limit as `n → ∞`.
    pub fn has_finite_limit_scaled(&self, k: i64) -> bool {
        self.limit_scaled(k).is_some()
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, o: RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::new(&self.num + &o.num, self.den);
        }
        RatFunc::new(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
    }
}

impl Sub for RatFunc {
    type Output = RatFunc;
    fn sub(self, o: RatFunc) -> RatFunc {
        self + (-o)
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: self.num.scale(&Rational::from(-1)),
            den: self.den,
        }
    }
}

impl Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, o: RatFunc) -> RatFunc {
        if self.num.is_zero() || o.num.is_zero() {
            return RatFunc::constant(Rational::new());
        }
        RatFunc::new(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Div for RatFunc {
    type Output = RatFunc;
    fn div(self, o: RatFunc) -> RatFunc {
        assert!(!o.num.is_zero(), "division by the zero rational function");
        RatFunc::new(&self.num * &o.den, &self.den * &o.num)
    }
}

impl Field for RatFunc {
    fn lift_i(&self, v: i64) -> Self {
        RatFunc::constant(Rational::from(v))
    }
    fn lift_q(&self, q: &Rational) -> Self {
        RatFunc::constant(q.clone())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    /// Not a norm: 0 for the zero function and 1 otherwise.
    fn abs_f64(&self) -> f64 {
        if self.num.is_zero() {
            0.0
        } else {
            1.0
        }
    }
}
