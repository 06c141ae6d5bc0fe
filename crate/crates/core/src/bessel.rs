//! Modified Bessel functions `I_v`, `K_v` of rational order and positive
//! argument, the combination `𝓛_v = a I_v + b e^{vπi} K_v`, its ladder
//! derivatives, and the exact table expressing `δ^m 𝓛_v(√t)` (with
//! `δ = t d/dt`) through `𝓛_{v+k}(√t)`.
//!
//! Evaluation strategy:
//!
//! * `I_v`: ascending series, or the large-argument expansion when its
//!   smallest term is below the working precision.
//! * `K_v`, `v ∉ ℤ`: `(π/2)(I_{-v} - I_v)/sin(vπ)` with enough guard bits to
//!   absorb the `e^{2x}` cancellation.
//! * `K_n`, `n ∈ ℤ`: the logarithmic series with harmonic numbers and Euler's
//!   constant.
//! * `K_v`, large `x`: the asymptotic expansion.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::numerics::gamma::gamma_raw;
use crate::numerics::ratfunc::Poly;
use crate::numerics::{certify, Certified, Cplx, PrecisionContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    I,
    K,
}

/// `𝓛_v(x) = a I_v(x) + b e^{vπi} K_v(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BesselCombination {
    pub a: Rational,
    pub b: Rational,
    pub v: Rational,
}

impl BesselCombination {
    pub fn new(a: Rational, b: Rational, v: Rational) -> Result<Self> {
        if a == 0 && b == 0 {
            return Err(Error::domain("(a, b) = (0, 0) is not a combination"));
        }
        Ok(BesselCombination { a, b, v })
    }

    pub fn pure_i(v: Rational) -> Self {
        BesselCombination {
            a: Rational::from(1),
            b: Rational::new(),
            v,
        }
    }

    pub fn pure_k(v: Rational) -> Self {
        BesselCombination {
            a: Rational::new(),
            b: Rational::from(1),
            v,
        }
    }

    /// Same `(a, b)`, base order moved to `v + k`.
    pub fn shifted(&self, k: &Rational) -> Self {
        BesselCombination {
            a: self.a.clone(),
            b: self.b.clone(),
            v: Rational::from(&self.v + k),
        }
    }

    /// Every `𝓛_{v+k}` is real: either `b = 0`, or `a = 0` (a constant
    /// phase), or `v` is an integer.
    pub fn is_real(&self) -> bool {
        self.b == 0 || *self.v.denom() == 1
    }

    /// All orders differ from `v` by integers and the phase is common to all
    /// entries of a determinant up to sign.
    pub fn is_pure_k(&self) -> bool {
        self.a == 0
    }
}

fn is_int(r: &Rational) -> bool {
    *r.denom() == 1
}

fn to_float(prec: u32, r: &Rational) -> Float {
    Float::with_val(prec, r)
}

fn check_x(x: &Float) -> Result<()> {
    if !(x.is_finite() && *x > 0) {
        return Err(Error::domain(format!(
            "Bessel argument must be positive, got {}",
            x.to_f64()
        )));
    }
    Ok(())
}

fn finite(v: Float, what: &str) -> Result<Float> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(what.to_string()))
    }
}

/// Bits lost to cancellation in `I_{-v} - I_v` and the log formula: about
/// `2x / ln 2`.
fn cancellation_bits(x: &Float) -> u32 {
    let xf = x.to_f64();
    (2.0 * xf * std::f64::consts::LOG2_E).ceil().max(0.0) as u32
}

/// Terms `a_k(v) / x^k` of the large-argument expansion, up to the point
/// where they drop below `2^-(wp+8)`. `None` if the terms start growing first.
fn asymptotic_terms(v: &Rational, x: &Float, wp: u32) -> Option<Vec<Float>> {
    let mu = Rational::from(v * v) * 4u32;
    let mut terms = vec![Float::with_val(wp, 1)];
    let eps = Float::with_val(wp, 1) >> (wp as i32 + 8);
    let mut k: u32 = 1;
    loop {
        let odd = Integer::from(2 * k - 1);
        let num = &mu - Rational::from(odd.square());
        let prev = terms.last().unwrap();
        if num == 0 {
            // terminating expansion (half-integer order)
            return Some(terms);
        }
        let ratio = to_float(wp, &num) / (Float::with_val(wp, x * (8 * k)));
        if Float::with_val(53, ratio.abs_ref()) >= 1 && k > 2 {
            return None;
        }
        let next = Float::with_val(wp, prev * &ratio);
        let small = Float::with_val(wp, next.abs_ref()) < eps;
        terms.push(next);
        if small {
            return Some(terms);
        }
        k += 1;
        if k > 20 * wp {
            return None;
        }
    }
}

/// `(x/2)^v` for rational `v`.
fn half_pow(x: &Float, v: &Rational, wp: u32) -> Float {
    let half = Float::with_val(wp, x / 2u32);
    if is_int(v) {
        if let Some(n) = v.numer().to_i32() {
            return half.pow(n);
        }
    }
    (half.ln() * to_float(wp, v)).exp()
}

/// Ascending series for `I_v(x)`; `v` must not be a negative integer.
fn i_series(v: &Rational, x: &Float, wp: u32) -> Result<Float> {
    let z = Float::with_val(wp, x.square_ref()) / 4u32;
    let g = gamma_raw(&to_float(wp, &Rational::from(v + 1u32)), wp)?;
    let mut term = half_pow(x, v, wp) / g;
    let mut sum = term.clone();
    let vf = to_float(wp, v);
    let xf = x.to_f64();
    let mut k: u32 = 0;
    loop {
        k += 1;
        let denom = Float::with_val(wp, &vf + k) * k;
        term *= &z;
        term /= denom;
        sum += &term;
        if (k as f64) > xf / 2.0 + 1.0 {
            let thresh = Float::with_val(wp, sum.abs_ref()) >> (wp as i32 + 4);
            if Float::with_val(wp, term.abs_ref()) <= thresh {
                break;
            }
        }
        if k > 1_000_000 {
            return Err(Error::Overflow("I_v series did not terminate".into()));
        }
    }
    Ok(sum)
}

fn exp_neg_x_over_sqrt(x: &Float, wp: u32, sign: i32, scale_pi: bool) -> Float {
    // sign = -1: sqrt(π/(2x)) e^{-x};  sign = +1: e^{x}/sqrt(2πx)
    let pi = Float::with_val(wp, Constant::Pi);
    let ex = if sign < 0 {
        Float::with_val(wp, -x).exp()
    } else {
        Float::with_val(wp, x.exp_ref())
    };
    let two_x = Float::with_val(wp, x * 2u32);
    let root = if scale_pi {
        (pi / two_x).sqrt()
    } else {
        (pi * two_x).sqrt().recip()
    };
    ex * root
}

/// `I_v(x)` at working precision `prec` (no certificate).
pub fn bessel_i_raw(v: &Rational, x: &Float, prec: u32) -> Result<Float> {
    check_x(x)?;
    let v = if is_int(v) && *v < 0 {
        Rational::from(-v)
    } else {
        v.clone()
    };
    let wp = prec + 32;
    let x = Float::with_val(wp, x);
    let exp_ok = x.to_f64() * 2.0 * std::f64::consts::LOG2_E > (wp + 8) as f64;
    if exp_ok {
        if let Some(terms) = asymptotic_terms(&v, &x, wp) {
            let mut s = Float::new(wp);
            for (k, t) in terms.iter().enumerate() {
                if k % 2 == 0 {
                    s += t;
                } else {
                    s -= t;
                }
            }
            let r = exp_neg_x_over_sqrt(&x, wp, 1, false) * s;
            return finite(Float::with_val(prec, r), "I_v");
        }
    }
    // negative non-integer orders alternate in sign for a few terms
    let extra = if v < -1 {
        (-v.to_f64()).log2().ceil() as u32 * 8 + 16
    } else {
        0
    };
    let r = i_series(&v, &x, wp + extra)?;
    finite(Float::with_val(prec, r), "I_v")
}

/// Integer-order `K_n(x)`, `n ≥ 0`, by the logarithmic series.
fn k_integer(n: u32, x: &Float, wp: u32) -> Result<Float> {
    let half = Float::with_val(wp, x / 2u32);
    let z = Float::with_val(wp, half.square_ref());
    // ½ (x/2)^{-n} Σ_{k<n} (n-k-1)!/k! (-z)^k
    let mut finite_part = Float::new(wp);
    if n > 0 {
        let mut fact_hi = Float::with_val(wp, Integer::from(Integer::factorial(n - 1))); // (n-k-1)!
        let mut fact_lo = Float::with_val(wp, 1); // k!
        let mut zk = Float::with_val(wp, 1);
        for k in 0..n {
            if k > 0 {
                fact_hi /= n - k;
                fact_lo *= k;
                zk *= &z;
                zk = -zk;
            }
            finite_part += Float::with_val(wp, &fact_hi / &fact_lo) * &zk;
        }
        finite_part /= half.clone().pow(n as i32);
        finite_part /= 2u32;
    }
    // (-1)^{n+1} ln(x/2) I_n(x)
    let i_n = i_series(&Rational::from(n), x, wp)?;
    let log_part = Float::with_val(wp, half.ln_ref()) * i_n;
    // (-1)^n ½ (x/2)^n Σ (ψ(k+1) + ψ(n+k+1)) z^k / (k! (n+k)!)
    let gamma_e = Float::with_val(wp, Constant::Euler);
    let mut h_k = Float::new(wp); // H_k
    let mut h_nk = Float::new(wp); // H_{n+k}
    for j in 1..=n {
        h_nk += Float::with_val(wp, 1) / j;
    }
    let mut coef = Float::with_val(wp, Integer::from(Integer::factorial(n))).recip(); // 1/(k!(n+k)!)
    let mut zk = Float::with_val(wp, 1);
    let mut sum = Float::new(wp);
    let xf = x.to_f64();
    let mut k: u32 = 0;
    loop {
        let psi = Float::with_val(wp, &h_k + &h_nk) - Float::with_val(wp, &gamma_e * 2u32);
        let term = Float::with_val(wp, &coef * &zk) * psi;
        sum += &term;
        k += 1;
        if (k as f64) > xf / 2.0 + 2.0 {
            let thresh = Float::with_val(wp, sum.abs_ref()) >> (wp as i32 + 4);
            if Float::with_val(wp, term.abs_ref()) <= thresh {
                break;
            }
        }
        h_k += Float::with_val(wp, 1) / k;
        h_nk += Float::with_val(wp, 1) / (n + k);
        coef /= Float::with_val(wp, k) * (n + k);
        zk *= &z;
        if k > 1_000_000 {
            return Err(Error::Overflow("K_n series did not terminate".into()));
        }
    }
    let series_part = half.pow(n as i32) * sum / 2u32;
    let mut r = finite_part;
    if n.is_multiple_of(2) {
        r -= log_part;
        r += series_part;
    } else {
        r += log_part;
        r -= series_part;
    }
    Ok(r)
}

/// `K_v(x)` at working precision `prec` (no certificate).
pub fn bessel_k_raw(v: &Rational, x: &Float, prec: u32) -> Result<Float> {
    check_x(x)?;
    let v = Rational::from(v.abs_ref());
    let base = prec + 32;
    let xw = Float::with_val(base, x);
    if xw.to_f64() > 2.0 {
        if let Some(terms) = asymptotic_terms(&v, &xw, base) {
            let mut s = Float::new(base);
            for t in &terms {
                s += t;
            }
            let r = exp_neg_x_over_sqrt(&xw, base, -1, true) * s;
            return finite(Float::with_val(prec, r), "K_v");
        }
    }
    let wp = base + cancellation_bits(x);
    let xw = Float::with_val(wp, x);
    let r = if is_int(&v) {
        let n = v
            .numer()
            .to_u32()
            .ok_or_else(|| Error::Overflow("K order too large".into()))?;
        k_integer(n, &xw, wp)?
    } else {
        // sin(vπ) may be small when v is close to an integer
        let frac = &v - Rational::from(v.floor_ref());
        let dist = frac.to_f64().min(1.0 - frac.to_f64());
        let extra = (-(dist.log2())).ceil().max(0.0) as u32 + 8;
        let wp = wp + extra;
        let xw = Float::with_val(wp, x);
        let i_neg = i_series(&Rational::from(-&v), &xw, wp + extra_neg(&v))?;
        let i_pos = i_series(&v, &xw, wp)?;
        let pi = Float::with_val(wp, Constant::Pi);
        let s = Float::with_val(wp, &pi * to_float(wp, &v)).sin();
        (i_neg - i_pos) * pi / (s * 2u32)
    };
    finite(Float::with_val(prec, r), "K_v")
}

fn extra_neg(v: &Rational) -> u32 {
    if *v > 1 {
        (v.to_f64().log2().ceil() as u32) * 8 + 16
    } else {
        0
    }
}

/// `K_ν(x)` for every `ν` in `orders`, sharing work through the stable
/// upward recurrence `K_{ν+1} = K_{ν-1} + (2ν/x) K_ν` within each residue
/// class of `|ν|` modulo 1.
pub fn bessel_k_orders(orders: &[Rational], x: &Float, prec: u32) -> Result<Vec<Float>> {
    check_x(x)?;
    let wp = prec + 24;
    let xw = Float::with_val(wp, x);
    let abs: Vec<Rational> = orders.iter().map(|o| Rational::from(o.abs_ref())).collect();
    let mut out: Vec<Option<Float>> = vec![None; orders.len()];
    let mut classes: Vec<(Rational, Rational, Rational)> = Vec::new(); // (frac, min, max)
    for a in &abs {
        let frac = a - Rational::from(a.floor_ref());
        match classes.iter_mut().find(|c| c.0 == frac) {
            Some(c) => {
                if *a < c.1 {
                    c.1 = a.clone();
                }
                if *a > c.2 {
                    c.2 = a.clone();
                }
            }
            None => classes.push((frac, a.clone(), a.clone())),
        }
    }
    for (frac, lo, hi) in classes {
        let span = Rational::from(&hi - &lo).numer().to_usize().unwrap_or(0);
        let mut ladder = Vec::with_capacity(span + 1);
        ladder.push(bessel_k_raw(&lo, &xw, wp)?);
        if span >= 1 {
            let next = Rational::from(&lo + 1u32);
            ladder.push(bessel_k_raw(&next, &xw, wp)?);
        }
        for k in 2..=span {
            let nu = Rational::from(&lo + (k as u32 - 1));
            let step = Float::with_val(wp, to_float(wp, &nu) * 2u32) / &xw;
            let val = Float::with_val(wp, &ladder[k - 2] + step * &ladder[k - 1]);
            ladder.push(val);
        }
        let _ = frac;
        for (i, a) in abs.iter().enumerate() {
            let d = Rational::from(a - &lo);
            if is_int(&d) && d >= 0 {
                if let Some(idx) = d.numer().to_usize() {
                    if idx <= span && out[i].is_none() {
                        out[i] = Some(finite(Float::with_val(prec, &ladder[idx]), "K ladder")?);
                    }
                }
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|o| o.expect("every order lies in a ladder"))
        .collect())
}

/// `I_ν(x)` for every `ν` in `orders`.
pub fn bessel_i_orders(orders: &[Rational], x: &Float, prec: u32) -> Result<Vec<Float>> {
    orders.iter().map(|o| bessel_i_raw(o, x, prec)).collect()
}

/// Certified `I_v(x)` or `K_v(x)`.
pub fn bessel(
    kind: BesselKind,
    v: &Rational,
    x: &Rational,
    ctx: &PrecisionContext,
) -> Result<Certified<Float>> {
    if *x <= 0 {
        return Err(Error::domain("Bessel argument must be positive"));
    }
    certify(ctx, "bessel", |bits| {
        let xf = to_float(bits, x);
        match kind {
            BesselKind::I => bessel_i_raw(v, &xf, bits),
            BesselKind::K => bessel_k_raw(v, &xf, bits),
        }
    })
}

/// `𝓛_{v+k}(x)` for each shift `k` (complex-carried).
pub fn combo_l_shifts(
    c: &BesselCombination,
    shifts: &[Rational],
    x: &Float,
    prec: u32,
) -> Result<Vec<Cplx>> {
    let orders: Vec<Rational> = shifts.iter().map(|k| Rational::from(&c.v + k)).collect();
    let is = if c.a != 0 {
        Some(bessel_i_orders(&orders, x, prec)?)
    } else {
        None
    };
    let ks = if c.b != 0 {
        Some(bessel_k_orders(&orders, x, prec)?)
    } else {
        None
    };
    let a = to_float(prec, &c.a);
    let b = to_float(prec, &c.b);
    Ok(orders
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let mut z = Cplx::zero(prec);
            if let Some(is) = &is {
                z.re += Float::with_val(prec, &is[i] * &a);
            }
            if let Some(ks) = &ks {
                let ph = Cplx::exp_i_pi(o, prec);
                let bk = Float::with_val(prec, &ks[i] * &b);
                z.re += Float::with_val(prec, &ph.re * &bk);
                z.im += Float::with_val(prec, &ph.im * &bk);
            }
            z
        })
        .collect())
}

pub fn combo_l_raw(c: &BesselCombination, k: &Rational, x: &Float, prec: u32) -> Result<Cplx> {
    Ok(combo_l_shifts(c, std::slice::from_ref(k), x, prec)?.remove(0))
}

/// Certified `𝓛_{v+k}(x)`.
pub fn combo_l(
    c: &BesselCombination,
    k: &Rational,
    x: &Rational,
    ctx: &PrecisionContext,
) -> Result<Certified<Cplx>> {
    if *x <= 0 {
        return Err(Error::domain("Bessel argument must be positive"));
    }
    certify(ctx, "combo_l", |bits| {
        combo_l_raw(c, k, &to_float(bits, x), bits)
    })
}

/// Which ladder relation to use for the derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    /// `𝓛_μ' = 𝓛_{μ+1} + (μ/x) 𝓛_μ`
    Raise,
    /// `𝓛_μ' = 𝓛_{μ-1} - (μ/x) 𝓛_μ`
    Lower,
}

pub fn l_derivative_raw(
    c: &BesselCombination,
    k: &Rational,
    x: &Float,
    prec: u32,
    ladder: Ladder,
) -> Result<Cplx> {
    let mu = Rational::from(&c.v + k);
    let step = match ladder {
        Ladder::Raise => Rational::from(k + 1u32),
        Ladder::Lower => Rational::from(k - 1u32),
    };
    let vals = combo_l_shifts(c, &[k.clone(), step], x, prec)?;
    let coef = to_float(prec, &mu) / x;
    let scaled = vals[0].scale(&coef);
    Ok(match ladder {
        Ladder::Raise => vals[1].clone() + scaled,
        Ladder::Lower => vals[1].clone() - scaled,
    })
}

/// Certified `d/dx 𝓛_{v+k}(x)` by the raising ladder relation.
pub fn l_derivative(
    c: &BesselCombination,
    k: &Rational,
    x: &Rational,
    ctx: &PrecisionContext,
) -> Result<Certified<Cplx>> {
    if *x <= 0 {
        return Err(Error::domain("Bessel argument must be positive"));
    }
    certify(ctx, "l_derivative", |bits| {
        l_derivative_raw(c, k, &to_float(bits, x), bits, Ladder::Raise)
    })
}

/// `δ^m 𝓛_v(u) = Σ_k c_{m,k}(u) 𝓛_{v+k}(u)` for `u ∝ √t`, `δ = t d/dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaExpansion {
    pub m: usize,
    pub v: Rational,
    /// `coeffs[k]` is `c_{m,k}` as a polynomial in `u`.
    pub coeffs: Vec<Poly>,
}

/// Build the table by iterating
/// `δ[c(u) 𝓛_μ] = (u/2) c'(u) 𝓛_μ + c(u) ((u/2) 𝓛_{μ+1} + (μ/2) 𝓛_μ)`.
pub fn delta_expansion(m: usize, v: &Rational) -> DeltaExpansion {
    let half = Rational::from((1, 2));
    let mut table = vec![Poly::constant(Rational::from(1))];
    for _ in 0..m {
        let mut next = vec![Poly::zero(); table.len() + 1];
        for (k, c) in table.iter().enumerate() {
            let mu_half = Rational::from(&(Rational::from(v + k as u32)) * &half);
            // (u/2) c'(u) = Σ (i/2) c_i u^i ; (μ/2) c(u)
            let own: Vec<Rational> = c
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, ci)| Rational::from(ci * &(Rational::from(i as u32) * &half + &mu_half)))
                .collect();
            next[k] = &next[k] + &Poly::new(own);
            // (u/2) c(u) 𝓛_{μ+1}
            let mut up = vec![Rational::new()];
            up.extend(c.coeffs().iter().map(|ci| Rational::from(ci * &half)));
            next[k + 1] = &next[k + 1] + &Poly::new(up);
        }
        table = next;
    }
    DeltaExpansion {
        m,
        v: v.clone(),
        coeffs: table,
    }
}

impl DeltaExpansion {
    /// `c_{m,k}(u)` evaluated at `u`.
    pub fn eval_coeffs(&self, u: &Float) -> Vec<Float> {
        let p = u.prec();
        self.coeffs
            .iter()
            .map(|c| {
                let mut acc = Float::new(p);
                for ci in c.coeffs().iter().rev() {
                    acc = acc * u + Float::with_val(p, ci);
                }
                acc
            })
            .collect()
    }

    /// Combine `values[k] = 𝓛_{v+k}(u)`, `k = 0..=m`.
    pub fn apply(&self, values: &[Cplx], u: &Float) -> Cplx {
        let c = self.eval_coeffs(u);
        let mut acc = Cplx::zero(u.prec());
        for (ck, vk) in c.iter().zip(values) {
            acc = acc + vk.scale(ck);
        }
        acc
    }
}

/// `δ^d 𝓛_μ(u)` for `d = 0..=d_max` and each base order `μ = v + shift`.
/// Returns `out[i][d]`.
pub fn delta_jets(
    c: &BesselCombination,
    shifts: &[Rational],
    d_max: usize,
    u: &Float,
    prec: u32,
) -> Result<Vec<Vec<Cplx>>> {
    // all orders v + shift + k, k = 0..=d_max
    let mut needed: Vec<Rational> = Vec::new();
    for s in shifts {
        for k in 0..=d_max {
            let o = Rational::from(s + k as u32);
            if !needed.contains(&o) {
                needed.push(o);
            }
        }
    }
    let vals = combo_l_shifts(c, &needed, u, prec)?;
    let lookup = |o: &Rational| -> Cplx {
        let i = needed.iter().position(|x| x == o).unwrap();
        vals[i].clone()
    };
    let mut out = Vec::with_capacity(shifts.len());
    for s in shifts {
        let mu = Rational::from(&c.v + s);
        let row_vals: Vec<Cplx> = (0..=d_max)
            .map(|k| lookup(&Rational::from(s + k as u32)))
            .collect();
        let mut row = Vec::with_capacity(d_max + 1);
        for d in 0..=d_max {
            let e = delta_expansion(d, &mu);
            row.push(e.apply(&row_vals[..=d], u));
        }
        out.push(row);
    }
    Ok(out)
}

/// Real `δ^d K_μ(x)` for `x ∝ √t`: `δ K_μ = -(x/2) K_{μ+1} + (μ/2) K_μ`, i.e.
/// the table of [`delta_expansion`] with `c_{m,k}` multiplied by `(-1)^k`.
pub fn delta_jets_k(
    orders: &[Rational],
    d_max: usize,
    x: &Float,
    prec: u32,
) -> Result<Vec<Vec<Float>>> {
    let mut needed: Vec<Rational> = Vec::new();
    for o in orders {
        for k in 0..=d_max {
            let q = Rational::from(o + k as u32);
            if !needed.contains(&q) {
                needed.push(q);
            }
        }
    }
    let vals = bessel_k_orders(&needed, x, prec)?;
    let mut out = Vec::with_capacity(orders.len());
    for o in orders {
        let row_vals: Vec<Float> = (0..=d_max)
            .map(|k| {
                let q = Rational::from(o + k as u32);
                vals[needed.iter().position(|x| *x == q).unwrap()].clone()
            })
            .collect();
        let mut row = Vec::with_capacity(d_max + 1);
        for d in 0..=d_max {
            let e = delta_expansion(d, o);
            let cs = e.eval_coeffs(x);
            let mut acc = Float::new(prec);
            for (k, (ck, vk)) in cs.iter().zip(&row_vals).enumerate() {
                let term = Float::with_val(prec, ck * vk);
                if k % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            row.push(acc);
        }
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{rel_diff_cplx, rel_diff_float};

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(128, 1e-30, 2048).unwrap()
    }

    #[test]
    fn half_integer_closed_forms() {
        // K_{1/2}(2) = sqrt(π/4) e^{-2}
        let k = bessel(BesselKind::K, &q(1, 2), &q(2, 1), &ctx())
            .unwrap()
            .value;
        let p = 300;
        let exact = (Float::with_val(p, Constant::Pi) / 4u32).sqrt() * Float::with_val(p, -2).exp();
        assert!(rel_diff_float(&k, &exact) < 1e-30);
        // I_{1/2}(x) = sqrt(2/(πx)) sinh x at x = 3
        let i = bessel(BesselKind::I, &q(1, 2), &q(3, 1), &ctx())
            .unwrap()
            .value;
        let x = Float::with_val(p, 3);
        let exact =
            (Float::with_val(p, 2) / (Float::with_val(p, Constant::Pi) * &x)).sqrt() * x.sinh();
        assert!(rel_diff_float(&i, &exact) < 1e-30);
    }

    #[test]
    fn i0_small_argument() {
        let i = bessel(BesselKind::I, &q(0, 1), &q(1, 100_000_000), &ctx())
            .unwrap()
            .value;
        assert!(rel_diff_float(&i, &Float::with_val(64, 1)) < 1e-15);
    }

    #[test]
    fn wronskian_across_integer_and_fractional_orders() {
        for x in [0.5f64, 2.0, 10.0, 40.0] {
            for v in [q(0, 1), q(1, 2), q(1, 1), q(27, 10)] {
                let p = 192;
                let xf = Float::with_val(p, x);
                let i = bessel_i_raw(&v, &xf, p).unwrap();
                let k = bessel_k_raw(&v, &xf, p).unwrap();
                let i1 = bessel_i_raw(&Rational::from(&v + 1u32), &xf, p).unwrap();
                let k1 = bessel_k_raw(&Rational::from(&v + 1u32), &xf, p).unwrap();
                // I_v K_{v+1} + I_{v+1} K_v = 1/x
                let w = i * k1 + i1 * k;
                let expect = Float::with_val(p, 1) / &xf;
                assert!(rel_diff_float(&w, &expect) < 1e-50, "v = {v}, x = {x}");
            }
        }
    }

    #[test]
    fn asymptotic_and_series_regions_agree() {
        // x = 120 uses the expansion at 128 bits but not at 512 bits
        let v = q(7, 3);
        let lo = bessel_k_raw(&v, &Float::with_val(128, 120), 128).unwrap();
        let hi = bessel_k_raw(&v, &Float::with_val(1024, 120), 1024).unwrap();
        assert!(rel_diff_float(&lo, &hi) < 1e-36);
        let lo = bessel_i_raw(&v, &Float::with_val(128, 120), 128).unwrap();
        let hi = bessel_i_raw(&v, &Float::with_val(1024, 120), 1024).unwrap();
        assert!(rel_diff_float(&lo, &hi) < 1e-36);
        let lo = bessel_k_raw(&q(3, 1), &Float::with_val(128, 150), 128).unwrap();
        let hi = bessel_k_raw(&q(3, 1), &Float::with_val(1024, 150), 1024).unwrap();
        assert!(rel_diff_float(&lo, &hi) < 1e-36);
    }

    #[test]
    fn k_symmetric_in_order() {
        let x = Float::with_val(160, 1.5);
        let a = bessel_k_raw(&q(5, 4), &x, 160).unwrap();
        let b = bessel_k_raw(&q(-5, 4), &x, 160).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn k_ladder_matches_direct() {
        let x = Float::with_val(256, 0.7);
        let orders: Vec<Rational> = (-4..12).map(|k| q(1, 3) + Rational::from(k)).collect();
        let lad = bessel_k_orders(&orders, &x, 256).unwrap();
        for (o, v) in orders.iter().zip(&lad) {
            let d = bessel_k_raw(o, &x, 256).unwrap();
            assert!(rel_diff_float(v, &d) < 1e-70, "order {o}");
        }
    }

    #[test]
    fn combination_phases() {
        let p = 128;
        let x = Float::with_val(p, 2);
        let c = BesselCombination::new(q(0, 1), q(1, 1), q(3, 1)).unwrap();
        let z = combo_l_raw(&c, &q(0, 1), &x, p).unwrap();
        let k3 = bessel_k_raw(&q(3, 1), &x, p).unwrap();
        assert!(rel_diff_float(&z.re, &(-k3)) < 1e-35);
        assert!(z.im.is_zero());
        // a = b = 1, v = 1/2: I_{1/2} + i K_{1/2}
        let c = BesselCombination::new(q(1, 1), q(1, 1), q(1, 2)).unwrap();
        let z = combo_l_raw(&c, &q(0, 1), &x, p).unwrap();
        let i = bessel_i_raw(&q(1, 2), &x, p).unwrap();
        let k = bessel_k_raw(&q(1, 2), &x, p).unwrap();
        assert!(rel_diff_cplx(&z, &Cplx::new(i, k)) < 1e-35);
        assert!(BesselCombination::new(q(0, 1), q(0, 1), q(1, 1)).is_err());
    }

    #[test]
    fn ladder_forms_agree() {
        let c = BesselCombination::new(q(2, 1), q(3, 1), q(3, 2)).unwrap();
        let x = Float::with_val(192, 2);
        let up = l_derivative_raw(&c, &q(0, 1), &x, 192, Ladder::Raise).unwrap();
        let down = l_derivative_raw(&c, &q(0, 1), &x, 192, Ladder::Lower).unwrap();
        assert!(rel_diff_cplx(&up, &down) < 1e-50);
    }

    #[test]
    fn delta_table_small_cases() {
        let v = q(3, 10);
        let e0 = delta_expansion(0, &v);
        assert_eq!(e0.coeffs, vec![Poly::constant(q(1, 1))]);
        let e1 = delta_expansion(1, &v);
        assert_eq!(e1.coeffs[0], Poly::constant(q(3, 20)));
        assert_eq!(e1.coeffs[1], Poly::new(vec![q(0, 1), q(1, 2)]));
        let e2 = delta_expansion(2, &v);
        assert_eq!(e2.coeffs[2], Poly::new(vec![q(0, 1), q(0, 1), q(1, 4)]));
    }
}
