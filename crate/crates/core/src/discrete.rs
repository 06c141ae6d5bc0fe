//! Toda-lattice τ recursion and the coupled `(p_n, q_n)` recurrences.
//!
//! For `𝓛_v = a I_v + b e^{vπi} K_v` the sequence
//! `τ̂[n](t) = det[𝓛_{j-k+v}(√t)]` is linked to the orbit by
//! `τ̂[n+1] τ̂[n-1] / τ̂[n]² |_{t → 4t} = p_n`, with
//!
//! ```text
//! p_{n+1} = (q_n²/t)(p_n - 1) - v q_n / t + 1
//! q_{n+1} = -t/q_n + (1+n) t / (q_n (q_n (p_n - 1) - v) + t)
//! p_0 = 0,  q_0 = √t 𝓛_{v+1}(2√t) / 𝓛_v(2√t)
//! ```
//!
//! The double Wronskian `W_n = det[δ^{j+k} f]`, `W_0 = 1`, obeys
//! `δ² ln W_n = W_{n+1} W_{n-1} / W_n²` for any `f`; this drives the Toda
//! route, run on truncated Taylor series in `ε` with `t = t₀ e^ε`.

use rug::{Float, Rational};

use crate::bessel::{self, BesselCombination, Ladder};
use crate::detkit::{toeplitz_l_value_raw, wronskian_raw, EnsembleParams};
use crate::error::{Error, Result};
use crate::numerics::formal::Series;
use crate::numerics::{certify, Certified, Cplx, Field, PrecisionContext};
use crate::painleve::{JetPoint, Residual};

/// One point `(p_n, q_n)` of the orbit at argument `t`.
#[derive(Debug, Clone)]
pub struct RecurrenceState {
    pub n: usize,
    pub p: Cplx,
    pub q: Cplx,
    pub t: Float,
    pub v: Rational,
    pub comb: BesselCombination,
}

fn too_small(d: &Cplx, scale: &Float, what: &str) -> Result<()> {
    let prec = d.prec();
    let cut = Float::with_val(prec, scale >> (prec / 2) as i32);
    if d.abs() <= cut {
        return Err(Error::NearZero {
            what: what.to_string(),
            magnitude: Float::with_val(53, d.abs() / scale).to_f64(),
            bits: prec,
        });
    }
    Ok(())
}

fn check_t(t: &Float) -> Result<()> {
    if !(t.is_finite() && *t > 0) {
        return Err(Error::domain("t must be positive"));
    }
    Ok(())
}

/// `p_0 = 0` and `q_0 = -v/2 + √t 𝓛_v'(2√t) / 𝓛_v(2√t)` by the raising
/// ladder relation.
pub fn init_state_raw(comb: &BesselCombination, t: &Float) -> Result<RecurrenceState> {
    check_t(t)?;
    let prec = t.prec();
    let rt = Float::with_val(prec, t.sqrt_ref());
    let x = Float::with_val(prec, &rt * 2u32);
    let zero = Rational::new();
    let l = bessel::combo_l_raw(comb, &zero, &x, prec)?;
    let dl = bessel::l_derivative_raw(comb, &zero, &x, prec, Ladder::Raise)?;
    let scale = l.abs() + dl.abs();
    too_small(&l, &scale, "seed L_v(2 sqrt t)")?;
    let half_v = Float::with_val(prec, &comb.v) / 2u32;
    let q = (dl / l).scale(&rt) - Cplx::from_real(half_v);
    Ok(RecurrenceState {
        n: 0,
        p: Cplx::zero(prec),
        q,
        t: t.clone(),
        v: comb.v.clone(),
        comb: comb.clone(),
    })
}

pub fn init_state(
    comb: &BesselCombination,
    t: &Rational,
    ctx: &PrecisionContext,
) -> Result<RecurrenceState> {
    if *t <= 0 {
        return Err(Error::domain("t must be positive"));
    }
    let c = certify(ctx, "init_state", |bits| {
        Ok(init_state_raw(comb, &Float::with_val(bits, t))?.q)
    })?;
    init_state_raw(comb, &Float::with_val(c.bits, t))
}

pub fn step_forward(s: &RecurrenceState) -> Result<RecurrenceState> {
    let prec = s.t.prec();
    let t = Cplx::from_real(s.t.clone());
    let one = t.one_like();
    let v = t.lift_q(&s.v);
    let rt = Float::with_val(prec, s.t.sqrt_ref());
    too_small(&s.q, &rt, &format!("q_{} in forward step", s.n))?;
    let pm1 = s.p.clone() - one.clone();
    let a = s.q.clone() * pm1.clone() - v.clone();
    let d = s.q.clone() * a + t.clone();
    let dscale = (s.q.sq() * pm1.clone()).abs() + (v.clone() * s.q.clone()).abs() + s.t.clone();
    too_small(&d, &dscale, &format!("q_n(q_n(p_n-1)-v)+t at n = {}", s.n))?;
    let p_next = s.q.sq() / t.clone() * pm1 - v * s.q.clone() / t.clone() + one;
    let q_next = -(t.clone() / s.q.clone()) + t.lift_i(s.n as i64 + 1) * t / d;
    Ok(RecurrenceState {
        n: s.n + 1,
        p: p_next,
        q: q_next,
        t: s.t.clone(),
        v: s.v.clone(),
        comb: s.comb.clone(),
    })
}

/// `q_{n-1} = t / (n/p_n - q_n)`; `p_{n-1}` by inverting the `p` update.
pub fn step_backward(s: &RecurrenceState) -> Result<RecurrenceState> {
    if s.n == 0 {
        return Err(Error::domain("backward step needs n >= 1"));
    }
    let prec = s.t.prec();
    let t = Cplx::from_real(s.t.clone());
    let one = t.one_like();
    let nn = t.lift_i(s.n as i64);
    let unit = Float::with_val(prec, 1);
    too_small(&s.p, &unit, &format!("p_{} in backward step", s.n))?;
    let ratio = nn / s.p.clone();
    let d = ratio.clone() - s.q.clone();
    too_small(
        &d,
        &(ratio.abs() + s.q.abs()),
        &format!("n/p_n - q_n at n = {}", s.n),
    )?;
    let q_prev = t.clone() / d;
    let v = t.lift_q(&s.v);
    // p_n - 1 = (q²/t)(p_{n-1} - 1) - v q / t
    let p_prev =
        (s.p.clone() - one.clone() + v * q_prev.clone() / t.clone()) * t / q_prev.sq() + one;
    Ok(RecurrenceState {
        n: s.n - 1,
        p: p_prev,
        q: q_prev,
        t: s.t.clone(),
        v: s.v.clone(),
        comb: s.comb.clone(),
    })
}

/// States `n = 0..=steps` at working precision.
pub fn orbit_raw(
    comb: &BesselCombination,
    t: &Float,
    steps: usize,
) -> Result<Vec<RecurrenceState>> {
    let mut out = vec![init_state_raw(comb, t)?];
    for _ in 0..steps {
        let next = step_forward(out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

fn flatten(states: &[RecurrenceState]) -> Vec<Cplx> {
    states
        .iter()
        .flat_map(|s| [s.p.clone(), s.q.clone()])
        .collect()
}

/// Certified orbit: every `p_n`, `q_n` agrees between two precisions.
pub fn orbit(
    comb: &BesselCombination,
    t: &Rational,
    steps: usize,
    ctx: &PrecisionContext,
) -> Result<Certified<Vec<RecurrenceState>>> {
    if *t <= 0 {
        return Err(Error::domain("t must be positive"));
    }
    let c = certify(ctx, "orbit", |bits| {
        Ok(flatten(&orbit_raw(comb, &Float::with_val(bits, t), steps)?))
    })?;
    let states = orbit_raw(comb, &Float::with_val(c.bits, t), steps)?;
    Ok(Certified {
        value: states,
        bits: c.bits,
        tol_achieved: c.tol_achieved,
    })
}

/// `(q_n, q_n', q_n'')` at `t` by five-point differences of the orbit, run at
/// twice the working precision with step `t·2^{-bits/3}`.
fn q_jet_raw(comb: &BesselCombination, n: usize, t: &Float) -> Result<Vec<Cplx>> {
    let bits = t.prec();
    let wp = 2 * bits;
    let h = Float::with_val(wp, t) >> (bits / 3) as i32;
    let mut f = Vec::with_capacity(5);
    for k in -2i32..=2 {
        let tk = Float::with_val(wp, t) + Float::with_val(wp, &h * k);
        f.push(orbit_raw(comb, &tk, n)?.pop().unwrap().q);
    }
    let hc = Cplx::from_real(h);
    let w = |v: i64| hc.lift_i(v);
    let d1 =
        (f[0].clone() - f[4].clone() + w(8) * (f[3].clone() - f[1].clone())) / (w(12) * hc.clone());
    let d2 = (w(16) * (f[1].clone() + f[3].clone())
        - f[0].clone()
        - f[4].clone()
        - w(30) * f[2].clone())
        / (w(12) * hc.clone() * hc.clone());
    let round = |z: Cplx| Cplx::new(Float::with_val(bits, &z.re), Float::with_val(bits, &z.im));
    Ok(vec![round(f[2].clone()), round(d1), round(d2)])
}

/// Certified 2-jet of `q_n(t)`, the input of the Painlevé III check with
/// `(v1, v2) = (v + n, n - v)`.
pub fn q_jet(
    comb: &BesselCombination,
    n: usize,
    t: &Rational,
    ctx: &PrecisionContext,
) -> Result<Certified<JetPoint<Cplx>>> {
    if *t <= 0 {
        return Err(Error::domain("t must be positive"));
    }
    let c = certify(ctx, "q_jet", |bits| {
        q_jet_raw(comb, n, &Float::with_val(bits, t))
    })?;
    let tf = Cplx::from_real(Float::with_val(c.bits, t));
    Ok(c.map(|v| JetPoint {
        t: tf,
        f: v[0].clone(),
        f1: v[1].clone(),
        f2: v[2].clone(),
    }))
}

/// `(1+n)/(q_n q_{n+1} + t) + n/(q_n q_{n-1} + t) - 1/q_n + q_n/t - (n-v)/t`.
/// At `n = 0` the second term is absent and `q_prev` is ignored.
pub fn alt_dp2_residual(
    q_prev: Option<&Cplx>,
    q_cur: &Cplx,
    q_next: &Cplx,
    n: usize,
    v: &Rational,
    t: &Float,
) -> Residual<Cplx> {
    let tc = Cplx::from_real(t.clone());
    let one = tc.one_like();
    let mut terms = vec![tc.lift_i(n as i64 + 1) / (q_cur.clone() * q_next.clone() + tc.clone())];
    if n > 0 {
        let qp = q_prev.expect("q_{n-1} is needed for n >= 1");
        terms.push(tc.lift_i(n as i64) / (q_cur.clone() * qp.clone() + tc.clone()));
    }
    terms.push(-(one / q_cur.clone()));
    terms.push(q_cur.clone() / tc.clone());
    terms.push(-(tc.lift_q(&(Rational::from(n as u32) - v)) / tc));
    let scale = terms.iter().map(Field::abs_f64).sum();
    let value = terms.into_iter().reduce(|a, b| a + b).unwrap();
    Residual { value, scale }
}

/// `q_{n+1} + t/q_n - (1+n)/p_{n+1}`, relative to the term sizes.
pub fn pqa_residual(cur: &RecurrenceState, next: &RecurrenceState) -> Residual<Cplx> {
    let t = Cplx::from_real(cur.t.clone());
    let terms = vec![
        next.q.clone(),
        t.clone() / cur.q.clone(),
        -(t.lift_i(cur.n as i64 + 1) / next.p.clone()),
    ];
    let scale = terms.iter().map(Field::abs_f64).sum();
    let value = terms.into_iter().reduce(|a, b| a + b).unwrap();
    Residual { value, scale }
}

// ---------------------------------------------------------------------------
// τ sequences

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauMethod {
    DirectDet,
    Toda,
    FromP,
}

impl TauMethod {
    pub fn name(&self) -> &'static str {
        match self {
            TauMethod::DirectDet => "direct_det",
            TauMethod::Toda => "toda",
            TauMethod::FromP => "from_p",
        }
    }
}

/// `τ̂[0..=N](t)`.
#[derive(Debug, Clone)]
pub struct TauSequence {
    pub values: Vec<Cplx>,
    pub method: TauMethod,
    pub t: Float,
}

/// `W_0..=W_N` of `f = 𝓛_v(√t)` at `t` through the Toda recursion on Taylor
/// series in `ε`, `t = t₀ e^ε`, where `δ` becomes `d/dε`.
pub fn wronskians_by_toda(comb: &BesselCombination, n_max: usize, t: &Float) -> Result<Vec<Cplx>> {
    check_t(t)?;
    let prec = t.prec();
    let mut out = vec![Cplx::from_real(Float::with_val(prec, 1))];
    if n_max == 0 {
        return Ok(out);
    }
    let order = 2 * (n_max - 1);
    let u = Float::with_val(prec, t.sqrt_ref());
    let jets = bessel::delta_jets(comb, &[Rational::new()], order, &u, prec)?.remove(0);
    // Taylor coefficients δ^k f / k!
    let mut fact = Float::with_val(prec, 1);
    let mut coeffs = Vec::with_capacity(order + 1);
    for (k, d) in jets.into_iter().enumerate() {
        if k > 0 {
            fact *= k as u32;
        }
        coeffs.push(d.scale(&Float::with_val(prec, fact.recip_ref())));
    }
    let mut prev = Series::constant(out[0].clone(), order);
    let mut cur = Series::new(coeffs);
    out.push(cur.coeff(0).clone());
    for _ in 1..n_max {
        let d1 = cur.deriv();
        let d2 = d1.deriv();
        let num = cur.mul(&d2).sub(&d1.sq());
        let next = num.div(&prev.truncate(num.order()))?;
        out.push(next.coeff(0).clone());
        prev = cur.truncate(next.order());
        cur = next;
    }
    Ok(out)
}

pub fn tau_sequence(
    comb: &BesselCombination,
    n_max: usize,
    t: &Float,
    method: TauMethod,
) -> Result<TauSequence> {
    check_t(t)?;
    let prec = t.prec();
    let values = match method {
        TauMethod::DirectDet => (0..=n_max)
            .map(|k| toeplitz_l_value_raw(comb, k, t))
            .collect::<Result<Vec<_>>>()?,
        TauMethod::Toda => {
            let w = wronskians_by_toda(comb, n_max, t)?;
            let quarter = Float::with_val(prec, t / 4u32);
            w.into_iter()
                .enumerate()
                .map(|(k, wk)| {
                    let e = (k * k.saturating_sub(1) / 2) as i32;
                    let f = Float::with_val(prec, rug::ops::Pow::pow(&quarter, -e));
                    wk.scale(&f)
                })
                .collect()
        }
        TauMethod::FromP => {
            let s = Float::with_val(prec, t / 4u32);
            let orbit = orbit_raw(comb, &s, n_max.saturating_sub(1))?;
            let mut vals = vec![Cplx::from_real(Float::with_val(prec, 1))];
            if n_max >= 1 {
                let u = Float::with_val(prec, t.sqrt_ref());
                vals.push(bessel::combo_l_raw(comb, &Rational::new(), &u, prec)?);
            }
            for k in 1..n_max {
                let next = orbit[k].p.clone() * vals[k].sq() / vals[k - 1].clone();
                vals.push(next);
            }
            vals
        }
    };
    Ok(TauSequence {
        values,
        method,
        t: t.clone(),
    })
}

/// `D_n(t) = (-1)^{n(n-1)/2} 2^n t^{nv/2} e^{-nvπi} τ̂[n](4t)` with
/// `v = n + α`, `𝓛 = e^{vπi} K_v`.
fn hankel_from_tau(p: &EnsembleParams, t: &Float, tau_n: &Cplx) -> Float {
    let prec = t.prec();
    let n = p.n;
    let v = Rational::from(&p.alpha + n as u32);
    let nv = Rational::from(&v * n as u32);
    let phase = Cplx::exp_i_pi(&Rational::from(-&nv), prec);
    let e = Float::with_val(prec, &nv) / 2u32;
    let pw = (Float::with_val(prec, t.ln_ref()) * e).exp();
    let mut val =
        (tau_n.clone() * phase).re * pw * Float::with_val(prec, rug::Integer::from(1) << n as u32);
    if (n * (n - 1) / 2) % 2 == 1 {
        val = -val;
    }
    val
}

fn mgf_combination(p: &EnsembleParams) -> BesselCombination {
    BesselCombination::pure_k(Rational::from(&p.alpha + p.n as u32))
}

/// `D_n(t)` from the Toda recursion of the double Wronskians.
pub fn hankel_via_toda(p: &EnsembleParams, t: &Float) -> Result<Float> {
    let c = mgf_combination(p);
    let big_t = Float::with_val(t.prec(), t * 4u32);
    let seq = tau_sequence(&c, p.n, &big_t, TauMethod::Toda)?;
    Ok(hankel_from_tau(p, t, &seq.values[p.n]))
}

/// `D_n(t)` from the `(p_n, q_n)` orbit.
pub fn hankel_via_dpii(p: &EnsembleParams, t: &Float) -> Result<Float> {
    let c = mgf_combination(p);
    let big_t = Float::with_val(t.prec(), t * 4u32);
    let seq = tau_sequence(&c, p.n, &big_t, TauMethod::FromP)?;
    Ok(hankel_from_tau(p, t, &seq.values[p.n]))
}

/// Left and right sides of `δ² ln τ̄[n] = τ̄[n-1] τ̄[n+1] / τ̄[n]²` with
/// `τ̄[m] = det[δ^{j+k} f]`, `f = t^κ 𝓛_v(√t)`.
pub fn toda_sides_raw(
    comb: &BesselCombination,
    n: usize,
    kappa: &Rational,
    t: &Float,
) -> Result<(Cplx, Cplx)> {
    if n == 0 {
        return Err(Error::domain("Toda check needs n >= 1"));
    }
    let (wm, _) = wronskian_raw(comb, n - 1, kappa, t, 0)?;
    let (w, jet) = wronskian_raw(comb, n, kappa, t, 2)?;
    let (wp, _) = wronskian_raw(comb, n + 1, kappa, t, 0)?;
    Ok((jet[1].clone(), wp * wm / w.sq()))
}

/// Relative Toda residual `|lhs - rhs| / (|lhs| + |rhs|)` from certified sides.
pub fn toda_verify(
    comb: &BesselCombination,
    n: usize,
    kappa: &Rational,
    t: &Rational,
    ctx: &PrecisionContext,
) -> Result<Certified<f64>> {
    if *t <= 0 {
        return Err(Error::domain("t must be positive"));
    }
    let c = certify(ctx, "toda_verify", |bits| {
        toda_sides_raw(comb, n, kappa, &Float::with_val(bits, t))
    })?;
    let (l, r) = c.value;
    let d = (l.clone() - r.clone()).abs();
    let s = l.abs() + r.abs();
    let rel = if s.is_zero() {
        0.0
    } else {
        Float::with_val(53, d / s).to_f64()
    };
    Ok(Certified {
        value: rel,
        bits: c.bits,
        tol_achieved: c.tol_achieved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rel_diff_cplx;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    #[test]
    fn q0_by_both_ladders() {
        let c = BesselCombination::pure_i(q(1, 1));
        let t = Float::with_val(256, 2);
        let s = init_state_raw(&c, &t).unwrap();
        let x = Float::with_val(256, t.sqrt_ref()) * 2u32;
        let l = bessel::combo_l_shifts(&c, &[q(0, 1), q(1, 1)], &x, 256).unwrap();
        let direct = (l[1].clone() / l[0].clone()).scale(&Float::with_val(256, t.sqrt_ref()));
        assert!(rel_diff_cplx(&s.q, &direct) < 1e-70);
        assert!(s.p.is_zero());
    }

    #[test]
    fn half_integer_seed() {
        // I_{1/2}(x) ∝ sinh x / √x, I_{3/2}(x) ∝ (cosh x - sinh x / x) / √x
        let c = BesselCombination::pure_i(q(1, 2));
        let t = Float::with_val(256, 1);
        let s = init_state_raw(&c, &t).unwrap();
        let x = Float::with_val(256, 2);
        let (sh, ch) = (
            Float::with_val(256, x.sinh_ref()),
            Float::with_val(256, x.cosh_ref()),
        );
        let expect = (ch - Float::with_val(256, &sh / &x)) / sh;
        assert!(rel_diff_cplx(&s.q, &Cplx::from_real(expect)) < 1e-70);
    }

    #[test]
    fn round_trip() {
        let c = BesselCombination::pure_i(q(1, 1));
        let s0 = init_state_raw(&c, &Float::with_val(256, 2)).unwrap();
        let s1 = step_forward(&s0).unwrap();
        let back = step_backward(&s1).unwrap();
        assert!(rel_diff_cplx(&back.q, &s0.q) < 1e-60);
        assert!(back.p.abs() < 1e-60);
        assert!(step_backward(&s0).is_err());
    }

    #[test]
    fn backward_needs_nonzero_p() {
        let c = BesselCombination::pure_i(q(1, 1));
        let mut s = init_state_raw(&c, &Float::with_val(256, 2)).unwrap();
        s.n = 1;
        assert!(matches!(step_backward(&s), Err(Error::NearZero { .. })));
    }

    #[test]
    fn p1_matches_tau_ratio() {
        let c = BesselCombination::pure_i(q(1, 1));
        let t = Float::with_val(256, 1);
        let o = orbit_raw(&c, &t, 1).unwrap();
        let big = Float::with_val(256, 4);
        let tau: Vec<Cplx> = (0..3)
            .map(|k| toeplitz_l_value_raw(&c, k, &big).unwrap())
            .collect();
        let ratio = tau[2].clone() * tau[0].clone() / tau[1].sq();
        assert!(rel_diff_cplx(&o[1].p, &ratio) < 1e-60);
    }

    #[test]
    fn tau_methods_agree() {
        let c = BesselCombination::new(q(1, 1), q(1, 1), q(3, 5)).unwrap();
        let t = Float::with_val(256, 3);
        let a = tau_sequence(&c, 4, &t, TauMethod::DirectDet).unwrap();
        let b = tau_sequence(&c, 4, &t, TauMethod::Toda).unwrap();
        let d = tau_sequence(&c, 4, &t, TauMethod::FromP).unwrap();
        for k in 0..=4 {
            assert!(
                rel_diff_cplx(&a.values[k], &b.values[k]) < 1e-50,
                "toda {k}"
            );
            assert!(
                rel_diff_cplx(&a.values[k], &d.values[k]) < 1e-50,
                "from_p {k}"
            );
        }
    }

    #[test]
    fn q_solves_piii() {
        use crate::painleve::{ode_residual, OdeKind};
        let ctx = PrecisionContext::new(128, 1e-20, 1024).unwrap();
        let c = BesselCombination::new(q(1, 1), q(2, 1), q(1, 3)).unwrap();
        for n in 0..3usize {
            let jet = q_jet(&c, n, &q(3, 2), &ctx).unwrap().value;
            let nn = Rational::from(n as u32);
            let good = OdeKind::PiiiQ {
                v1: Rational::from(&c.v + &nn),
                v2: Rational::from(&nn - &c.v),
            };
            let bad = OdeKind::PiiiQ {
                v1: Rational::from(&nn - &c.v),
                v2: Rational::from(&c.v + &nn),
            };
            assert!(ode_residual(&good, &jet).relative() < 1e-30);
            assert!(ode_residual(&bad, &jet).relative() > 1e-3);
        }
    }

    #[test]
    fn alt_dp2_sensitivity() {
        let c = BesselCombination::pure_i(q(1, 1));
        let t = Float::with_val(256, 1);
        let o = orbit_raw(&c, &t, 3).unwrap();
        let r = alt_dp2_residual(None, &o[0].q, &o[1].q, 0, &c.v, &t);
        assert!(r.relative() < 1e-60);
        let bumped = o[2].q.clone() + Cplx::from_real(Float::with_val(256, 1e-5));
        let r = alt_dp2_residual(Some(&o[0].q), &o[1].q, &bumped, 1, &c.v, &t);
        assert!(r.value.abs() > 1e-6);
    }
}
