//! Structured determinants and their logarithmic derivatives.
//!
//! Every routine returns the determinant together with the jet
//! `[δL, δ²L, δ³L]`, `L = log det`, `δ = t d/dt`, computed by the trace
//! formulas of [`crate::numerics::linalg`] from entrywise δ-derivatives that
//! are known in closed form:
//!
//! * moments `μ_j(t) = ∫ x^{j+α} e^{-x-t/x} dx` obey `μ_j' = -μ_{j-1}`;
//! * Bessel entries `𝓛_μ(c√t)` obey `δ𝓛_μ = (x/2)𝓛_{μ+1} + (μ/2)𝓛_μ`;
//! * gap entries `h_c(s) = ∫_0^∞ (s+x)^c e^{-s-x} x^μ dx` obey
//!   `h_c' = c h_{c-1} - h_c`.
//!
//! Ordinary derivatives are turned into δ-derivatives with Stirling numbers
//! of the second kind: `δ^d = Σ_i S(d, i) t^i (d/dt)^i`.

use rug::float::Constant;
use rug::{Float, Integer, Rational};

use crate::bessel::{self, BesselCombination};
use crate::error::{Error, Result};
use crate::numerics::gamma::{gamma_raw, lue_normalization_raw};
use crate::numerics::linalg::{det_with_jets, Matrix};
use crate::numerics::quad::{integrate_vec, Domain};
use crate::numerics::{certify, is_integer, Certified, Cplx, Field, Numeric, PrecisionContext};
use crate::painleve::JetPoint;

/// Ensemble size and exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleParams {
    pub n: usize,
    pub alpha: Rational,
    pub beta: Option<Rational>,
    pub mu: Option<Rational>,
}

impl EnsembleParams {
    pub fn laguerre(n: usize, alpha: Rational) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be >= 1"));
        }
        if alpha <= -1 {
            return Err(Error::domain(format!("alpha must exceed -1, got {alpha}")));
        }
        Ok(EnsembleParams {
            n,
            alpha,
            beta: None,
            mu: None,
        })
    }

    pub fn jacobi(n: usize, alpha: Rational, beta: Rational) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be >= 1"));
        }
        if alpha <= 0 || beta <= 0 {
            return Err(Error::domain("Jacobi exponents must be positive"));
        }
        Ok(EnsembleParams {
            n,
            alpha,
            beta: Some(beta),
            mu: None,
        })
    }

    pub fn gap(n: usize, alpha: Rational, mu: Rational) -> Result<Self> {
        let mut p = EnsembleParams::laguerre(n, alpha)?;
        if mu <= -1 {
            return Err(Error::domain(format!("mu must exceed -1, got {mu}")));
        }
        p.mu = Some(mu);
        Ok(p)
    }

    /// `κ_p` is a genuine cumulant only for `α > p - 1`.
    pub fn cumulant_valid(&self, p: usize) -> bool {
        self.alpha > p as i64 - 1
    }
}

/// Determinant value with logarithmic δ-jet and certificate.
#[derive(Debug, Clone)]
pub struct DetResult {
    pub value: Cplx,
    /// `[δL, δ²L, δ³L]` with `L = log value`.
    pub jet: Vec<Cplx>,
    pub t: Rational,
    pub method: &'static str,
    pub bits: u32,
    pub tol_achieved: f64,
}

impl DetResult {
    fn t_float(&self) -> Float {
        Float::with_val(self.value.prec(), &self.t)
    }

    /// `t d/dt log value`.
    pub fn log_deriv(&self) -> Cplx {
        self.jet[0].clone()
    }

    /// `d²/dt² log value = (δ²L - δL) / t²`.
    pub fn second_deriv(&self) -> Cplx {
        let t = self.t_float();
        let t2 = Float::with_val(t.prec(), t.square_ref());
        (self.jet[1].clone() - self.jet[0].clone()).scale(&t2.recip())
    }

    /// `d³/dt³ log value = (δ³L - 3δ²L + 2δL) / t³`.
    pub fn third_deriv(&self) -> Cplx {
        let t = self.t_float();
        let t3 = Float::with_val(t.prec(), t.square_ref()) * &t;
        let three = self.jet[0].lift_i(3);
        let two = self.jet[0].lift_i(2);
        (self.jet[2].clone() - three * self.jet[1].clone() + two * self.jet[0].clone())
            .scale(&t3.recip())
    }

    /// Jet of `y(t) = t d/dt log value`: `y' = δ²L/t`, `y'' = (δ³L - δ²L)/t²`.
    pub fn y_jet(&self) -> JetPoint<Cplx> {
        let t = self.t_float();
        let tc = Cplx::from_real(t.clone());
        let t2 = Cplx::from_real(Float::with_val(t.prec(), t.square_ref()));
        JetPoint {
            t: tc.clone(),
            f: self.jet[0].clone(),
            f1: self.jet[1].clone() / tc,
            f2: (self.jet[2].clone() - self.jet[1].clone()) / t2,
        }
    }

    /// Largest `|im| / |z|` over the value and the jet.
    pub fn imag_residue(&self) -> f64 {
        self.jet
            .iter()
            .map(Cplx::imag_residue)
            .fold(self.value.imag_residue(), f64::max)
    }

    pub fn real_value(&self) -> Float {
        self.value.re.clone()
    }
}

type Raw = (Cplx, Vec<Cplx>);

fn run_certified<F>(
    ctx: &PrecisionContext,
    what: &'static str,
    t: &Rational,
    f: F,
) -> Result<DetResult>
where
    F: FnMut(u32) -> Result<Raw>,
{
    let c = certify(ctx, what, f)?;
    let (value, jet) = c.value;
    if value.is_zero() {
        return Err(Error::NearZero {
            what: what.to_string(),
            magnitude: 0.0,
            bits: c.bits,
        });
    }
    Ok(DetResult {
        value,
        jet,
        t: t.clone(),
        method: what,
        bits: c.bits,
        tol_achieved: c.tol_achieved,
    })
}

fn stirling2(d: usize, i: usize) -> i64 {
    // S(d, i) for the small orders used here
    let mut s = vec![vec![0i64; d + 1]; d + 1];
    s[0][0] = 1;
    for a in 1..=d {
        for b in 1..=a {
            s[a][b] = b as i64 * s[a - 1][b] + s[a - 1][b - 1];
        }
    }
    s[d][i]
}

fn positive_t(t: &Rational) -> Result<()> {
    if *t <= 0 {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    Ok(())
}

fn fpow(prec: u32, base: &Float, e: &Rational) -> Float {
    if is_integer(e) {
        if let Some(k) = e.numer().to_i32() {
            return Float::with_val(prec, rug::ops::Pow::pow(base, k));
        }
    }
    (Float::with_val(prec, base.ln_ref()) * Float::with_val(prec, e)).exp()
}

/// Build a Hankel matrix `[g_{j+k}]` and its δ-derivative matrices from
/// ordinary derivatives `deriv(m, i) = (d/dt)^i g_m`.
fn hankel_with_jets<T: Numeric>(
    n: usize,
    t: &Float,
    jets: usize,
    deriv: impl Fn(usize, usize) -> T,
) -> (Matrix<T>, Vec<Matrix<T>>) {
    let prec = t.prec();
    let a = Matrix::from_fn(n, |j, k| deriv(j + k, 0));
    let mut ds = Vec::with_capacity(jets);
    for d in 1..=jets {
        let m = Matrix::from_fn(n, |j, k| {
            let mut acc = deriv(j + k, 0).zero_like();
            let mut tp = Float::with_val(prec, 1);
            for i in 1..=d {
                tp *= t;
                let c = stirling2(d, i);
                let term = deriv(j + k, i) * T::from_float(Float::with_val(prec, &tp * c));
                acc = acc + term;
            }
            acc
        });
        ds.push(m);
    }
    (a, ds)
}

fn as_cplx_raw(v: Float, jets: Vec<Float>) -> Raw {
    (
        Cplx::from_real(v),
        jets.into_iter().map(Cplx::from_real).collect(),
    )
}

// ---------------------------------------------------------------------------
// Laguerre moments

/// `μ_j(t) = 2 t^{(j+α+1)/2} K_{j+α+1}(2√t)` for `j = lo..=hi` (any sign).
pub fn moments_raw(lo: i64, hi: i64, alpha: &Rational, t: &Float, prec: u32) -> Result<Vec<Float>> {
    let wp = prec + 16;
    let t = Float::with_val(wp, t);
    let x = Float::with_val(wp, t.sqrt_ref()) * 2u32;
    let orders: Vec<Rational> = (lo..=hi).map(|j| Rational::from(alpha + (j + 1))).collect();
    let ks = bessel::bessel_k_orders(&orders, &x, wp)?;
    let lt = Float::with_val(wp, t.ln_ref());
    Ok(orders
        .iter()
        .zip(ks)
        .map(|(o, k)| {
            let pw = (Float::with_val(wp, &lt * Float::with_val(wp, o)) / 2u32).exp();
            Float::with_val(prec, pw * k * 2u32)
        })
        .collect())
}

/// Certified `μ_j(t)`.
pub fn moment_mu(
    j: i64,
    alpha: &Rational,
    t: &Rational,
    ctx: &PrecisionContext,
) -> Result<Certified<Float>> {
    positive_t(t)?;
    certify(ctx, "moment_mu", |bits| {
        let tf = Float::with_val(bits, t);
        Ok(moments_raw(j, j, alpha, &tf, bits)?.remove(0))
    })
}

fn hankel_moments_raw(p: &EnsembleParams, t: &Float, jets: usize) -> Result<(Float, Vec<Float>)> {
    let n = p.n;
    let prec = t.prec();
    let lo = -(jets as i64);
    let mom = moments_raw(lo, 2 * n as i64 - 2, &p.alpha, t, prec)?;
    let get = |m: usize, i: usize| -> Float {
        let idx = (m as i64 - i as i64 - lo) as usize;
        let v = mom[idx].clone();
        if i % 2 == 1 {
            -v
        } else {
            v
        }
    };
    let (a, ds) = hankel_with_jets(n, t, jets, get);
    det_with_jets(&a, &ds, "moment Hankel determinant")
}

/// `(-1)^{n(n-1)/2} 2^n t^{n(n+α)/2} det[K_{j-k+n+α}(2√t)]`.
fn hankel_toeplitz_raw(p: &EnsembleParams, t: &Float, jets: usize) -> Result<(Float, Vec<Float>)> {
    let n = p.n;
    let prec = t.prec();
    let v = Rational::from(&p.alpha + n as u32);
    let x = Float::with_val(prec, t.sqrt_ref()) * 2u32;
    let shifts: Vec<i64> = (-(n as i64) + 1..n as i64).collect();
    let orders: Vec<Rational> = shifts.iter().map(|s| Rational::from(&v + *s)).collect();
    let table = bessel::delta_jets_k(&orders, jets, &x, prec)?;
    let entry = |j: usize, k: usize, d: usize| -> Float {
        let idx = (j as i64 - k as i64 + n as i64 - 1) as usize;
        table[idx][d].clone()
    };
    let a = Matrix::from_fn(n, |j, k| entry(j, k, 0));
    let ds: Vec<Matrix<Float>> = (1..=jets)
        .map(|d| Matrix::from_fn(n, |j, k| entry(j, k, d)))
        .collect();
    let (det, mut jet) = det_with_jets(&a, &ds, "K Toeplitz determinant")?;
    let e = Rational::from(&Rational::from(n as u32) * &v) / 2u32;
    let mut pref = fpow(prec, t, &e) * Float::with_val(prec, Integer::from(1) << n as u32);
    if (n * (n - 1) / 2) % 2 == 1 {
        pref = -pref;
    }
    if let Some(j0) = jet.first_mut() {
        *j0 += Float::with_val(prec, &e);
    }
    Ok((det * pref, jet))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HankelMethod {
    Moments,
    Toeplitz,
}

/// `D_n(t) = det[μ_{j+k}(t)]` by moments or by the K-Bessel Toeplitz form.
pub fn hankel_det(
    p: &EnsembleParams,
    t: &Rational,
    ctx: &PrecisionContext,
    method: HankelMethod,
) -> Result<DetResult> {
    positive_t(t)?;
    let (name, f): (
        &'static str,
        fn(&EnsembleParams, &Float, usize) -> Result<(Float, Vec<Float>)>,
    ) = match method {
        HankelMethod::Moments => ("hankel_moments", hankel_moments_raw),
        HankelMethod::Toeplitz => ("hankel_toeplitz", hankel_toeplitz_raw),
    };
    run_certified(ctx, name, t, |bits| {
        let tf = Float::with_val(bits, t);
        let (v, j) = f(p, &tf, 3)?;
        Ok(as_cplx_raw(v, j))
    })
}

/// `D_n(t)` without jets at working precision `bits`.
pub fn hankel_value_raw(p: &EnsembleParams, t: &Float, method: HankelMethod) -> Result<Float> {
    Ok(match method {
        HankelMethod::Moments => hankel_moments_raw(p, t, 0)?.0,
        HankelMethod::Toeplitz => hankel_toeplitz_raw(p, t, 0)?.0,
    })
}

// ---------------------------------------------------------------------------
// general combination: Toeplitz and double Wronskian

fn toeplitz_l_raw(c: &BesselCombination, n: usize, t: &Float, jets: usize) -> Result<Raw> {
    let prec = t.prec();
    if n == 0 {
        return Ok((
            Cplx::from_real(Float::with_val(prec, 1)),
            vec![Cplx::zero(prec); jets],
        ));
    }
    let u = Float::with_val(prec, t.sqrt_ref());
    let shifts: Vec<Rational> = (-(n as i64) + 1..n as i64).map(Rational::from).collect();
    let table = bessel::delta_jets(c, &shifts, jets, &u, prec)?;
    let entry = |j: usize, k: usize, d: usize| -> Cplx { table[j + n - 1 - k][d].clone() };
    let a = Matrix::from_fn(n, |j, k| entry(j, k, 0));
    let ds: Vec<Matrix<Cplx>> = (1..=jets)
        .map(|d| Matrix::from_fn(n, |j, k| entry(j, k, d)))
        .collect();
    det_with_jets(&a, &ds, "L Toeplitz determinant")
}

/// `τ̂[n](t) = det[𝓛_{j-k+v}(√t)]_{j,k<n}`; `n = 0` gives 1.
pub fn toeplitz_l_det(
    c: &BesselCombination,
    n: usize,
    t: &Rational,
    ctx: &PrecisionContext,
) -> Result<DetResult> {
    positive_t(t)?;
    run_certified(ctx, "toeplitz_l", t, |bits| {
        toeplitz_l_raw(c, n, &Float::with_val(bits, t), 3)
    })
}

/// Value-only `τ̂[n]` at working precision.
pub fn toeplitz_l_value_raw(c: &BesselCombination, n: usize, t: &Float) -> Result<Cplx> {
    Ok(toeplitz_l_raw(c, n, t, 0)?.0)
}

/// `δ^m f` for `f = t^κ 𝓛_v(√t)`, `m = 0..=m_max`.
fn gauged_delta_series(
    c: &BesselCombination,
    kappa: &Rational,
    m_max: usize,
    t: &Float,
) -> Result<Vec<Cplx>> {
    let prec = t.prec();
    let u = Float::with_val(prec, t.sqrt_ref());
    let base = bessel::delta_jets(c, &[Rational::new()], m_max, &u, prec)?.remove(0);
    if *kappa == 0 {
        return Ok(base);
    }
    // δ^m (t^κ g) = t^κ Σ_i C(m,i) κ^{m-i} δ^i g
    let tk = fpow(prec, t, kappa);
    let kf = Float::with_val(prec, kappa);
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let mut acc = Cplx::zero(prec);
        for (i, gi) in base.iter().enumerate().take(m + 1) {
            let binom = Float::with_val(
                prec,
                &Integer::from(Integer::binomial_u(m as u32, i as u32)),
            );
            let kp = Float::with_val(prec, rug::ops::Pow::pow(&kf, (m - i) as i32));
            acc = acc + gi.scale(&(binom * kp));
        }
        out.push(acc.scale(&tk));
    }
    Ok(out)
}

/// `det[δ^{j+k} f]` with `f = t^κ 𝓛_v(√t)` at working precision.
pub fn wronskian_raw(
    c: &BesselCombination,
    n: usize,
    kappa: &Rational,
    t: &Float,
    jets: usize,
) -> Result<Raw> {
    let prec = t.prec();
    if n == 0 {
        return Ok((
            Cplx::from_real(Float::with_val(prec, 1)),
            vec![Cplx::zero(prec); jets],
        ));
    }
    let d = gauged_delta_series(c, kappa, 2 * n - 2 + jets, t)?;
    let a = Matrix::from_fn(n, |j, k| d[j + k].clone());
    let ds: Vec<Matrix<Cplx>> = (1..=jets)
        .map(|e| Matrix::from_fn(n, |j, k| d[j + k + e].clone()))
        .collect();
    det_with_jets(&a, &ds, "double Wronskian")
}

/// `det[δ^{j+k} 𝓛_v(√t)]_{j,k<n}`.
pub fn wronskian_det(
    c: &BesselCombination,
    n: usize,
    t: &Rational,
    ctx: &PrecisionContext,
) -> Result<DetResult> {
    wronskian_det_gauged(c, n, &Rational::new(), t, ctx)
}

/// Double Wronskian of `t^κ 𝓛_v(√t)`.
pub fn wronskian_det_gauged(
    c: &BesselCombination,
    n: usize,
    kappa: &Rational,
    t: &Rational,
    ctx: &PrecisionContext,
) -> Result<DetResult> {
    positive_t(t)?;
    run_certified(ctx, "wronskian", t, |bits| {
        wronskian_raw(c, n, kappa, &Float::with_val(bits, t), 3)
    })
}

// ---------------------------------------------------------------------------
// hard edge

fn hard_edge_raw(alpha: usize, mu: &Rational, t: &Float, jets: usize) -> Result<Raw> {
    let prec = t.prec();
    let c = BesselCombination::pure_i(mu.clone());
    let (det, mut jet) = toeplitz_l_raw(&c, alpha, t, jets)?;
    let quarter = Float::with_val(prec, t / 4u32);
    let e = Rational::from(mu * alpha as u32) / 2u32;
    let pref = Float::with_val(prec, -&quarter).exp() / fpow(prec, t, &e);
    for (d, j) in jet.iter_mut().enumerate() {
        // δ(-t/4) = -t/4 at every order; δ(-e log t) = -e once
        let mut shift = Float::with_val(prec, -&quarter);
        if d == 0 {
            shift -= Float::with_val(prec, &e);
        }
        j.re += shift;
    }
    Ok((det.scale(&pref), jet))
}

/// `e^{-t/4} t^{-μα/2} det[I_{j-k+μ}(√t)]_{j,k<α}`.
pub fn hard_edge_det(
    alpha: usize,
    mu: &Rational,
    t: &Rational,
    ctx: &PrecisionContext,
) -> Result<DetResult> {
    positive_t(t)?;
    if alpha == 0 {
        return Err(Error::domain("hard-edge determinant needs alpha >= 1"));
    }
    run_certified(ctx, "hard_edge", t, |bits| {
        hard_edge_raw(alpha, mu, &Float::with_val(bits, t), 3)
    })
}

// ---------------------------------------------------------------------------
// Jacobi weight

/// `∫_0^1 x^{j+α} (1-x)^β e^{-t/x} dx` for `j = lo..=hi`.
pub fn jacobi_moments_raw(
    lo: i64,
    hi: i64,
    alpha: &Rational,
    beta: &Rational,
    t: &Float,
    prec: u32,
) -> Result<Vec<Float>> {
    if t.is_zero() {
        // Beta integrals; negative j are never needed at t = 0
        return (lo..=hi)
            .map(|j| {
                let a = Rational::from(alpha + (j + 1));
                if a <= 0 {
                    return Ok(Float::new(prec));
                }
                beta_fn(&a, &Rational::from(beta + 1u32), prec)
            })
            .collect();
    }
    let dim = (hi - lo + 1) as usize;
    let tw = Float::with_val(prec + 24, t);
    let af = Float::with_val(prec + 24, Rational::from(alpha + lo));
    let bf = Float::with_val(prec + 24, beta);
    let r = integrate_vec(
        Domain::UnitInterval,
        prec,
        PrecisionContext::eps_at(prec),
        dim,
        |x, xc| {
            let wp = x.prec();
            let lx = Float::with_val(wp, x.ln_ref());
            let lxc = Float::with_val(wp, xc.ln_ref());
            let e = Float::with_val(wp, &af * &lx) + Float::with_val(wp, &bf * &lxc)
                - Float::with_val(wp, &tw / x);
            let mut w = e.exp();
            let mut out = Vec::with_capacity(dim);
            for _ in 0..dim {
                out.push(w.clone());
                w *= x;
            }
            out
        },
    )?;
    Ok(r.values)
}

fn beta_fn(a: &Rational, b: &Rational, prec: u32) -> Result<Float> {
    let wp = prec + 16;
    let ga = gamma_raw(&Float::with_val(wp, a), wp)?;
    let gb = gamma_raw(&Float::with_val(wp, b), wp)?;
    let gab = gamma_raw(&Float::with_val(wp, Rational::from(a + b)), wp)?;
    Ok(Float::with_val(prec, ga * gb / gab))
}

fn jacobi_raw(p: &EnsembleParams, t: &Float, jets: usize) -> Result<(Float, Vec<Float>)> {
    let beta = p
        .beta
        .as_ref()
        .ok_or_else(|| Error::domain("Jacobi determinant needs beta"))?;
    let n = p.n;
    let prec = t.prec();
    let lo = -(jets as i64);
    let mom = jacobi_moments_raw(lo, 2 * n as i64 - 2, &p.alpha, beta, t, prec)?;
    let get = |m: usize, i: usize| -> Float {
        let v = mom[(m as i64 - i as i64 - lo) as usize].clone();
        if i % 2 == 1 {
            -v
        } else {
            v
        }
    };
    let (a, ds) = hankel_with_jets(n, t, jets, get);
    det_with_jets(&a, &ds, "Jacobi Hankel determinant")
}

/// Hankel determinant for the weight `x^α (1-x)^β e^{-t/x}` on `[0, 1]`.
pub fn jacobi_hankel_det(
    p: &EnsembleParams,
    t: &Rational,
    ctx: &PrecisionContext,
) -> Result<DetResult> {
    if *t < 0 {
        return Err(Error::domain("t must be non-negative"));
    }
    if p.beta.is_none() {
        return Err(Error::domain("Jacobi determinant needs beta"));
    }
    run_certified(ctx, "jacobi_hankel", t, |bits| {
        let (v, j) = jacobi_raw(p, &Float::with_val(bits, t), 3)?;
        Ok(as_cplx_raw(v, j))
    })
}

// ---------------------------------------------------------------------------
// generalized gap probability

/// `h_c(s)` for `c = α + m`, `m = lo..=hi`.
fn gap_entries(
    lo: i64,
    hi: i64,
    alpha: &Rational,
    mu: &Rational,
    s: &Float,
    prec: u32,
) -> Result<Vec<Float>> {
    let wp = prec + 16;
    if is_integer(alpha) {
        // finite binomial sum: h_c = e^{-s} Σ_i C(c,i) s^{c-i} Γ(i+μ+1)
        let a = alpha.numer().to_i64().unwrap();
        let c_max = (a + hi).max(0) as u32;
        let g0 = gamma_raw(&Float::with_val(wp, Rational::from(mu + 1u32)), wp)?;
        let mut gam = Vec::with_capacity(c_max as usize + 1);
        let mut g = g0;
        for i in 0..=c_max {
            if i > 0 {
                g *= Float::with_val(wp, Rational::from(mu + i));
            }
            gam.push(g.clone());
        }
        let sw = Float::with_val(wp, s);
        let es = Float::with_val(wp, -&sw).exp();
        return (lo..=hi)
            .map(|m| {
                let c = a + m;
                if c < 0 {
                    // never multiplied by a non-zero coefficient
                    return Ok(Float::new(prec));
                }
                let c = c as u32;
                let mut acc = Float::new(wp);
                for i in 0..=c {
                    let b = Float::with_val(wp, &Integer::from(Integer::binomial_u(c, i)));
                    let sp = Float::with_val(wp, rug::ops::Pow::pow(&sw, c - i));
                    acc += b * sp * &gam[i as usize];
                }
                Ok(Float::with_val(prec, acc * &es))
            })
            .collect();
    }
    let dim = (hi - lo + 1) as usize;
    let sw = Float::with_val(wp, s);
    let c0 = Float::with_val(wp, Rational::from(alpha + lo));
    let muf = Float::with_val(wp, mu);
    let r = integrate_vec(
        Domain::HalfLine,
        prec,
        PrecisionContext::eps_at(prec),
        dim,
        |x, _| {
            let p = x.prec();
            let lam = Float::with_val(p, &sw + x);
            let e = Float::with_val(p, &c0 * Float::with_val(p, lam.ln_ref()))
                + Float::with_val(p, &muf * Float::with_val(p, x.ln_ref()))
                - &lam;
            let mut w = e.exp();
            let mut out = Vec::with_capacity(dim);
            for _ in 0..dim {
                out.push(w.clone());
                w *= &lam;
            }
            out
        },
    )?;
    Ok(r.values)
}

fn gap_raw(p: &EnsembleParams, s: &Float, jets: usize) -> Result<(Float, Vec<Float>)> {
    let mu =
        p.mu.as_ref()
            .ok_or_else(|| Error::domain("gap determinant needs mu"))?;
    let n = p.n;
    let prec = s.prec();
    let lo = -(jets as i64);
    let h = gap_entries(lo, 2 * n as i64 - 2, &p.alpha, mu, s, prec)?;
    let hval = |c_idx: i64| -> &Float { &h[(c_idx - lo) as usize] };
    // (d/ds)^i h_{α+m} = Σ_r C(i,r) (-1)^{i-r} (α+m)^{(r)} h_{α+m-r}
    let deriv = |m: usize, i: usize| -> Float {
        let mut acc = Float::new(prec);
        let c = Rational::from(&p.alpha + m as u32);
        let mut falling = Rational::from(1);
        for r in 0..=i {
            if r > 0 {
                falling *= Rational::from(&c - (r as u32 - 1));
            }
            if falling == 0 {
                break;
            }
            let coef =
                Rational::from(&falling * Integer::from(Integer::binomial_u(i as u32, r as u32)));
            let coef = if (i - r) % 2 == 1 { -coef } else { coef };
            acc += Float::with_val(prec, &coef) * hval(m as i64 - r as i64);
        }
        acc
    };
    let (a, ds) = hankel_with_jets(n, s, jets, deriv);
    let (det, jet) = det_with_jets(&a, &ds, "gap determinant")?;
    let d0 = lue_normalization_raw(n, &p.alpha, prec)?;
    Ok((det / d0, jet))
}

/// `E_n(s; α, μ) = det[h_{α+j+k}(s)] / D_n(0)`.
pub fn gap_det(p: &EnsembleParams, s: &Rational, ctx: &PrecisionContext) -> Result<DetResult> {
    positive_t(s)?;
    if p.mu.is_none() {
        return Err(Error::domain("gap determinant needs mu"));
    }
    run_certified(ctx, "gap", s, |bits| {
        let (v, j) = gap_raw(p, &Float::with_val(bits, s), 3)?;
        Ok(as_cplx_raw(v, j))
    })
}

// ---------------------------------------------------------------------------
// generating function

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgfMethod {
    Hankel,
    Toeplitz,
    Toda,
    Dpii,
    Quadrature,
}

impl MgfMethod {
    pub const ALL: [MgfMethod; 5] = [
        MgfMethod::Hankel,
        MgfMethod::Toeplitz,
        MgfMethod::Toda,
        MgfMethod::Dpii,
        MgfMethod::Quadrature,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MgfMethod::Hankel => "hankel",
            MgfMethod::Toeplitz => "toeplitz",
            MgfMethod::Toda => "toda",
            MgfMethod::Dpii => "dpii",
            MgfMethod::Quadrature => "quadrature",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        MgfMethod::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// `M_n(t) = D_n(t) / D_n(0)`.
pub fn mgf(
    p: &EnsembleParams,
    t: &Rational,
    ctx: &PrecisionContext,
    method: MgfMethod,
) -> Result<Certified<Float>> {
    positive_t(t)?;
    match method {
        MgfMethod::Quadrature => crate::oracle::mgf_quadrature(p, t, ctx),
        _ => certify(ctx, method.name(), |bits| {
            mgf_raw(p, &Float::with_val(bits, t), method)
        }),
    }
}

/// Uncertified `M_n(t)` at the precision of `t` (determinant routes only).
pub fn mgf_raw(p: &EnsembleParams, t: &Float, method: MgfMethod) -> Result<Float> {
    let prec = t.prec();
    let d = match method {
        MgfMethod::Hankel => hankel_value_raw(p, t, HankelMethod::Moments)?,
        MgfMethod::Toeplitz => hankel_value_raw(p, t, HankelMethod::Toeplitz)?,
        MgfMethod::Toda => crate::discrete::hankel_via_toda(p, t)?,
        MgfMethod::Dpii => crate::discrete::hankel_via_dpii(p, t)?,
        MgfMethod::Quadrature => {
            return Err(Error::domain(
                "quadrature route has no raw determinant form",
            ))
        }
    };
    Ok(d / lue_normalization_raw(p.n, &p.alpha, prec)?)
}

/// `π` at a given precision (shared helper for callers building phases).
pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rel_diff_float;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(128, 1e-25, 2048).unwrap()
    }

    #[test]
    fn stirling_numbers() {
        assert_eq!(stirling2(3, 1), 1);
        assert_eq!(stirling2(3, 2), 3);
        assert_eq!(stirling2(3, 3), 1);
        assert_eq!(stirling2(4, 2), 7);
    }

    #[test]
    fn one_by_one_routes_coincide() {
        let p = EnsembleParams::laguerre(1, q(1, 2)).unwrap();
        let a = hankel_det(&p, &q(3, 2), &ctx(), HankelMethod::Moments).unwrap();
        let b = hankel_det(&p, &q(3, 2), &ctx(), HankelMethod::Toeplitz).unwrap();
        assert!(rel_diff_float(&a.value.re, &b.value.re) < 1e-25);
        for d in 0..3 {
            assert!(
                rel_diff_float(&a.jet[d].re, &b.jet[d].re) < 1e-22,
                "jet {d}"
            );
        }
    }

    #[test]
    fn two_by_two_sign_and_agreement() {
        let p = EnsembleParams::laguerre(2, q(0, 1)).unwrap();
        let a = hankel_det(&p, &q(1, 1), &ctx(), HankelMethod::Moments).unwrap();
        let b = hankel_det(&p, &q(1, 1), &ctx(), HankelMethod::Toeplitz).unwrap();
        assert!(rel_diff_float(&a.value.re, &b.value.re) < 1e-25);
        assert!(a.value.re > 0);
    }

    #[test]
    fn toeplitz_l_trivial_sizes() {
        let c = BesselCombination::new(q(2, 1), q(-3, 1), q(7, 10)).unwrap();
        let e = toeplitz_l_det(&c, 0, &q(2, 1), &ctx()).unwrap();
        assert_eq!(e.value.re, 1);
        let one = toeplitz_l_det(&c, 1, &q(2, 1), &ctx()).unwrap();
        let direct =
            bessel::combo_l_raw(&c, &q(0, 1), &Float::with_val(256, 2).sqrt(), 256).unwrap();
        assert!(crate::numerics::rel_diff_cplx(&one.value, &direct) < 1e-25);
    }

    #[test]
    fn hard_edge_two_by_two() {
        let r = hard_edge_det(2, &q(1, 1), &q(1, 1), &ctx()).unwrap();
        let p = 256;
        let x = Float::with_val(p, 1);
        let i0 = bessel::bessel_i_raw(&q(0, 1), &x, p).unwrap();
        let i1 = bessel::bessel_i_raw(&q(1, 1), &x, p).unwrap();
        let i2 = bessel::bessel_i_raw(&q(2, 1), &x, p).unwrap();
        let det = Float::with_val(p, i1.square_ref()) - i2 * i0;
        let expect = det * Float::with_val(p, -0.25f64).exp();
        assert!(rel_diff_float(&r.value.re, &expect) < 1e-25);
    }

    #[test]
    fn gap_single_particle() {
        // n = 1, α = 0, μ = 0: e^{-s}
        let p = EnsembleParams::gap(1, q(0, 1), q(0, 1)).unwrap();
        let r = gap_det(&p, &q(3, 4), &ctx()).unwrap();
        let expect = Float::with_val(256, -0.75f64).exp();
        assert!(rel_diff_float(&r.value.re, &expect) < 1e-25);
        // μ = 1: ∫_s^∞ (λ-s) e^{-λ} = e^{-s}, normalised by Γ(1)
        let p = EnsembleParams::gap(1, q(0, 1), q(1, 1)).unwrap();
        let r = gap_det(&p, &q(3, 4), &ctx()).unwrap();
        assert!(rel_diff_float(&r.value.re, &expect) < 1e-25);
    }

    #[test]
    fn gap_quadrature_matches_closed_form() {
        // α = 1 uses the binomial sum; α = 1 + 10^-30 forces quadrature
        let s = q(1, 2);
        let a = gap_det(
            &EnsembleParams::gap(2, q(1, 1), q(1, 2)).unwrap(),
            &s,
            &ctx(),
        )
        .unwrap();
        let near =
            Rational::from(1) + Rational::from((1, 10i64.pow(18))) / Rational::from(10i64.pow(12));
        let b = gap_det(&EnsembleParams::gap(2, near, q(1, 2)).unwrap(), &s, &ctx()).unwrap();
        assert!(rel_diff_float(&a.value.re, &b.value.re) < 1e-24);
        assert!(rel_diff_float(&a.jet[0].re, &b.jet[0].re) < 1e-20);
    }

    #[test]
    fn jacobi_beta_moments() {
        let p = EnsembleParams::jacobi(1, q(1, 1), q(1, 1)).unwrap();
        let r = jacobi_hankel_det(&p, &q(0, 1), &ctx()).unwrap();
        assert!(rel_diff_float(&r.value.re, &(Float::with_val(256, 1) / 6u32)) < 1e-25);
        // t > 0 and the t = 0 Beta moments approach each other
        let r2 = jacobi_hankel_det(&p, &q(1, 10i64.pow(12)), &ctx()).unwrap();
        assert!(rel_diff_float(&r.value.re, &r2.value.re) < 1e-9);
    }
}
