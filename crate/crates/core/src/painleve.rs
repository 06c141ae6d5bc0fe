//! Hamiltonian and σ-form machinery for Painlevé III′ and V.
//!
//! Everything here is algebraic and generic over [`Field`], so the same code
//! evaluates exact rational identities (Bäcklund algebra, jet transforms) and
//! floating residuals on jets supplied by [`crate::detkit`].

use rug::{Float, Rational};

use crate::bessel::BesselCombination;
use crate::detkit::{toeplitz_l_det, DetResult};
use crate::error::{Error, Result};
use crate::numerics::{certify, Certified, Cplx, Field, PrecisionContext};

/// Parameters `(v1, v2)` of the PIII′ Hamiltonian and σ-form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaParameters {
    pub v1: Rational,
    pub v2: Rational,
}

impl SigmaParameters {
    pub fn new(v1: Rational, v2: Rational) -> Self {
        SigmaParameters { v1, v2 }
    }
}

/// Canonical point `(p, q)` at time `t` with parameters `(v1, v2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianState<F> {
    pub v1: F,
    pub v2: F,
    pub p: F,
    pub q: F,
    pub t: F,
}

/// `H = [p²q² - (q² + v1 q - t) p + ((v1+v2)/2) q] / t`.
pub fn hamiltonian<F: Field>(s: &HamiltonianState<F>) -> Result<F> {
    if s.t.is_zero() {
        return Err(Error::domain("hamiltonian needs t != 0"));
    }
    let half = s.t.lift_q(&Rational::from((1, 2)));
    let pq = s.p.clone() * s.q.clone();
    let th = pq.sq() - (s.q.sq() + s.v1.clone() * s.q.clone() - s.t.clone()) * s.p.clone()
        + half * (s.v1.clone() + s.v2.clone()) * s.q.clone();
    Ok(th / s.t.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backlund {
    S0,
    S1,
    S2,
    /// `s0` first, then `s2`, `s1`, `s2`; shifts `(v1, v2)` by `(+1, +1)`.
    T1,
}

impl Backlund {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "s0" => Some(Backlund::S0),
            "s1" => Some(Backlund::S1),
            "s2" => Some(Backlund::S2),
            "T1" | "t1" => Some(Backlund::T1),
            _ => None,
        }
    }
}

pub fn apply_backlund<F: Field>(
    op: Backlund,
    s: &HamiltonianState<F>,
) -> Result<HamiltonianState<F>> {
    match op {
        Backlund::S0 => {
            if s.q.is_zero() {
                return Err(Error::DenominatorVanishing {
                    order: 0,
                    detail: "s0 needs q != 0".into(),
                });
            }
            let half = s.t.lift_q(&Rational::from((1, 2)));
            let one = s.t.one_like();
            let inner =
                s.q.clone() * (s.p.clone() - one.clone()) - half * (s.v1.clone() - s.v2.clone());
            Ok(HamiltonianState {
                v1: -one.clone() - s.v2.clone(),
                v2: -one.clone() - s.v1.clone(),
                p: s.q.clone() / s.t.clone() * inner + one,
                q: -(s.t.clone() / s.q.clone()),
                t: s.t.clone(),
            })
        }
        Backlund::S1 => {
            let pm1 = s.p.clone() - s.p.one_like();
            if pm1.is_zero() {
                return Err(Error::DenominatorVanishing {
                    order: 0,
                    detail: "s1 needs p != 1".into(),
                });
            }
            let two = s.p.lift_i(2);
            Ok(HamiltonianState {
                v1: s.v2.clone(),
                v2: s.v1.clone(),
                p: s.p.clone(),
                q: s.q.clone() + (s.v2.clone() - s.v1.clone()) / (two * pm1),
                t: s.t.clone(),
            })
        }
        Backlund::S2 => Ok(HamiltonianState {
            v1: s.v1.clone(),
            v2: -s.v2.clone(),
            p: s.p.one_like() - s.p.clone(),
            q: -s.q.clone(),
            t: -s.t.clone(),
        }),
        Backlund::T1 => {
            let a = apply_backlund(Backlund::S0, s)?;
            let b = apply_backlund(Backlund::S2, &a)?;
            let c = apply_backlund(Backlund::S1, &b)?;
            apply_backlund(Backlund::S2, &c)
        }
    }
}

/// 2-jet `(f, f', f'')` of a function at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint<F> {
    pub t: F,
    pub f: F,
    pub f1: F,
    pub f2: F,
}

impl<F: Field> JetPoint<F> {
    pub fn map<G>(&self, g: impl Fn(&F) -> G) -> JetPoint<G> {
        JetPoint {
            t: g(&self.t),
            f: g(&self.f),
            f1: g(&self.f1),
            f2: g(&self.f2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OdeKind {
    /// `(tσ'')² - v1v2(σ')² + σ'(4σ'-1)(σ - tσ') - (v1-v2)²/4³ = 0`
    SigmaIii { v1: Rational, v2: Rational },
    /// `(th'')² + (4(h')²-1)(th'-h) + v1v2 h' - (v1²+v2²)/4 = 0`
    HForm { v1: Rational, v2: Rational },
    /// `(ty'')² = (n - (2n+α)y')² - 4(n(n+α) + ty' - y)y'(y'-1)`
    YForm { n: Rational, alpha: Rational },
    /// `q'' = q'²/q - q'/t + (q²/t²)(q - v2) - 1/q + (v1+1)/t`
    PiiiQ { v1: Rational, v2: Rational },
    /// `(tσ'')² - (σ - tσ' + 2(σ')² + Σν σ')² + 4Π(ν_l + σ') = 0`
    SigmaV { nu: [Rational; 4] },
    /// `(tH'')² = (n(n+α+β) - H + (α+t)H')² + 4H'(tH' - H)(β - H')`
    JacobiH {
        n: Rational,
        alpha: Rational,
        beta: Rational,
    },
}

impl OdeKind {
    pub fn name(&self) -> &'static str {
        match self {
            OdeKind::SigmaIii { .. } => "siii",
            OdeKind::HForm { .. } => "h",
            OdeKind::YForm { .. } => "y",
            OdeKind::PiiiQ { .. } => "piii",
            OdeKind::SigmaV { .. } => "sv",
            OdeKind::JacobiH { .. } => "jacobi",
        }
    }
}

/// Left-minus-right value with the sum of the absolute values of the
/// individual terms, for relative comparison. For the second-degree forms the
/// scale is at least `(|f| + |t f'| + |t² f''|)²`.
#[derive(Debug, Clone)]
pub struct Residual<F> {
    pub value: F,
    pub scale: f64,
}

impl<F: Field> Residual<F> {
    fn from_terms(terms: Vec<F>, floor: f64) -> Self {
        let scale = terms.iter().map(Field::abs_f64).sum::<f64>().max(floor);
        let mut it = terms.into_iter();
        let first = it.next().expect("at least one term");
        let value = it.fold(first, |a, b| a + b);
        Residual { value, scale }
    }

    /// `|value| / scale`, or `|value|` when every term vanishes.
    pub fn relative(&self) -> f64 {
        let v = self.value.abs_f64();
        if self.scale == 0.0 {
            v
        } else {
            v / self.scale
        }
    }
}

pub fn ode_residual<F: Field>(kind: &OdeKind, jet: &JetPoint<F>) -> Residual<F> {
    let JetPoint { t, f, f1, f2 } = jet;
    let c = |q: &Rational| t.lift_q(q);
    let i = |v: i64| t.lift_i(v);
    let terms = match kind {
        OdeKind::SigmaIii { v1, v2 } => {
            let d = Rational::from(v1 - v2);
            let k = Rational::from(&d * &d) / 64u32;
            vec![
                (t.clone() * f2.clone()).sq(),
                -(c(&Rational::from(v1 * v2)) * f1.sq()),
                f1.clone() * (i(4) * f1.clone() - i(1)) * (f.clone() - t.clone() * f1.clone()),
                -c(&k),
            ]
        }
        OdeKind::HForm { v1, v2 } => {
            let k = (Rational::from(v1 * v1) + Rational::from(v2 * v2)) / 4u32;
            vec![
                (t.clone() * f2.clone()).sq(),
                (i(4) * f1.sq() - i(1)) * (t.clone() * f1.clone() - f.clone()),
                c(&Rational::from(v1 * v2)) * f1.clone(),
                -c(&k),
            ]
        }
        OdeKind::YForm { n, alpha } => {
            let two_n_a = Rational::from(n * 2u32) + alpha;
            let nna = Rational::from(n * &Rational::from(n + alpha));
            vec![
                (t.clone() * f2.clone()).sq(),
                -(c(n) - c(&two_n_a) * f1.clone()).sq(),
                i(4) * (c(&nna) + t.clone() * f1.clone() - f.clone())
                    * f1.clone()
                    * (f1.clone() - i(1)),
            ]
        }
        OdeKind::PiiiQ { v1, v2 } => {
            let q = f;
            let t2 = t.sq();
            vec![
                f2.clone(),
                -(f1.sq() / q.clone()),
                f1.clone() / t.clone(),
                -(q.sq() / t2 * (q.clone() - c(v2))),
                i(1) / q.clone(),
                -(c(&Rational::from(v1 + 1u32)) / t.clone()),
            ]
        }
        OdeKind::SigmaV { nu } => {
            let s: Rational = nu.iter().sum();
            let inner = f.clone() - t.clone() * f1.clone() + i(2) * f1.sq() + c(&s) * f1.clone();
            let prod = nu.iter().fold(i(1), |acc, v| acc * (c(v) + f1.clone()));
            vec![(t.clone() * f2.clone()).sq(), -inner.sq(), i(4) * prod]
        }
        OdeKind::JacobiH { n, alpha, beta } => {
            let k = Rational::from(n * &(Rational::from(n + alpha) + beta));
            let a = c(&k) - f.clone() + (c(alpha) + t.clone()) * f1.clone();
            vec![
                (t.clone() * f2.clone()).sq(),
                -a.sq(),
                -(i(4)
                    * f1.clone()
                    * (t.clone() * f1.clone() - f.clone())
                    * (c(beta) - f1.clone())),
            ]
        }
    };
    // Quadratic forms can vanish term by term on elementary solutions; the
    // squared jet size keeps the relative figure meaningful there.
    let floor = match kind {
        OdeKind::PiiiQ { .. } => 0.0,
        _ => {
            let size =
                f.abs_f64() + (t.clone() * f1.clone()).abs_f64() + (t.sq() * f2.clone()).abs_f64();
            size * size
        }
    };
    Residual::from_terms(terms, floor)
}

// ---------------------------------------------------------------------------
// transforms

/// `(v1, v2) = (2n + α, -α)`.
pub fn params_mgf(n: &Rational, alpha: &Rational) -> SigmaParameters {
    SigmaParameters::new(Rational::from(n * 2u32) + alpha, Rational::from(-alpha))
}

/// `(v1, v2) = (α + μ, α - μ)`.
pub fn params_hardedge(alpha: &Rational, mu: &Rational) -> SigmaParameters {
    SigmaParameters::new(Rational::from(alpha + mu), Rational::from(alpha - mu))
}

/// Hard-edge exponents `(α, μ) = (n, n + α)` that reproduce [`params_mgf`].
pub fn hardedge_match(n: &Rational, alpha: &Rational) -> (Rational, Rational) {
    (n.clone(), Rational::from(n + alpha))
}

/// `ν = (0, -(n+α+β), n, -β)` for `H - n(n+α+β)` of the Jacobi weight.
pub fn params_jacobi(n: &Rational, alpha: &Rational, beta: &Rational) -> [Rational; 4] {
    [
        Rational::new(),
        -(Rational::from(n + alpha) + beta),
        n.clone(),
        Rational::from(-beta),
    ]
}

/// `ν = (0, -μ, n+α, n)` for `U_n = t (log E_n)' - μn`.
pub fn params_gap(n: &Rational, alpha: &Rational, mu: &Rational) -> [Rational; 4] {
    [
        Rational::new(),
        Rational::from(-mu),
        Rational::from(n + alpha),
        n.clone(),
    ]
}

/// `y(t) = h(t) + t/2 - α²/4`.
pub fn y_from_h<F: Field>(h: &JetPoint<F>, alpha: &Rational) -> JetPoint<F> {
    let half = h.t.lift_q(&Rational::from((1, 2)));
    JetPoint {
        t: h.t.clone(),
        f: h.f.clone() + half.clone() * h.t.clone()
            - h.t.lift_q(&(Rational::from(alpha * alpha) / 4u32)),
        f1: h.f1.clone() + half,
        f2: h.f2.clone(),
    }
}

/// `h(t) = y(t) - t/2 + α²/4`.
pub fn h_from_y<F: Field>(y: &JetPoint<F>, alpha: &Rational) -> JetPoint<F> {
    let half = y.t.lift_q(&Rational::from((1, 2)));
    JetPoint {
        t: y.t.clone(),
        f: y.f.clone() - half.clone() * y.t.clone()
            + y.t.lift_q(&(Rational::from(alpha * alpha) / 4u32)),
        f1: y.f1.clone() - half,
        f2: y.f2.clone(),
    }
}

/// From the `h`-jet at `s` to the σ-jet at `t = 4s`:
/// `σ(t) = -h(t/4) + t/8 + v1v2/4`.
pub fn sigma_from_h<F: Field>(h: &JetPoint<F>, p: &SigmaParameters) -> JetPoint<F> {
    let s = &h.t;
    let q = |a: i64, b: i64| s.lift_q(&Rational::from((a, b)));
    JetPoint {
        t: s.lift_i(4) * s.clone(),
        f: -h.f.clone() + q(1, 2) * s.clone() + s.lift_q(&(Rational::from(&p.v1 * &p.v2) / 4u32)),
        f1: -(h.f1.clone() * q(1, 4)) + q(1, 8),
        f2: -(h.f2.clone() * q(1, 16)),
    }
}

/// Inverse of [`sigma_from_h`].
pub fn h_from_sigma<F: Field>(sigma: &JetPoint<F>, p: &SigmaParameters) -> JetPoint<F> {
    let t = &sigma.t;
    let q = |a: i64, b: i64| t.lift_q(&Rational::from((a, b)));
    JetPoint {
        t: q(1, 4) * t.clone(),
        f: -sigma.f.clone()
            + q(1, 8) * t.clone()
            + t.lift_q(&(Rational::from(&p.v1 * &p.v2) / 4u32)),
        f1: -(sigma.f1.clone() * t.lift_i(4)) + q(1, 2),
        f2: -(sigma.f2.clone() * t.lift_i(16)),
    }
}

/// From the σ-jet at `s` to the σ̂-jet at `t = 4s`:
/// `σ̂_n(t) = -σ(t/4) + t/8 + (n² - v²)/4`.
pub fn sigmahat_from_sigma<F: Field>(
    sigma: &JetPoint<F>,
    n: &Rational,
    v: &Rational,
) -> JetPoint<F> {
    let s = &sigma.t;
    let q = |a: i64, b: i64| s.lift_q(&Rational::from((a, b)));
    let k = (Rational::from(n * n) - Rational::from(v * v)) / 4u32;
    JetPoint {
        t: s.lift_i(4) * s.clone(),
        f: -sigma.f.clone() + q(1, 2) * s.clone() + s.lift_q(&k),
        f1: -(sigma.f1.clone() * q(1, 4)) + q(1, 8),
        f2: -(sigma.f2.clone() * q(1, 16)),
    }
}

/// From the σ̂-jet at `T` (with `v = n + α`) to the `y`-jet at `t = T/4`:
/// `y(t) = -σ̂(4t) + t - (n+α)α/2`.
pub fn y_from_sigmahat<F: Field>(sh: &JetPoint<F>, n: &Rational, alpha: &Rational) -> JetPoint<F> {
    let big_t = &sh.t;
    let q = |a: i64, b: i64| big_t.lift_q(&Rational::from((a, b)));
    let k = Rational::from(n + alpha) * alpha / 2u32;
    JetPoint {
        t: q(1, 4) * big_t.clone(),
        f: -sh.f.clone() + q(1, 4) * big_t.clone() - big_t.lift_q(&k),
        f1: -(sh.f1.clone() * big_t.lift_i(4)) + q(1, 1),
        f2: -(sh.f2.clone() * big_t.lift_i(16)),
    }
}

/// σ̂-jet `-δ log(e^{-t/4} t^{v²/2} τ̂)` from a Toeplitz determinant result.
pub fn sigmahat_jet(det: &DetResult, v: &Rational) -> JetPoint<Cplx> {
    let prec = det.value.prec();
    let t = Float::with_val(prec, &det.t);
    let tc = Cplx::from_real(t.clone());
    let quarter = tc.lift_q(&Rational::from((1, 4)));
    let d1 = det.jet[0].clone();
    let d2 = det.jet[1].clone();
    let d3 = det.jet[2].clone();
    let t2 = tc.sq();
    JetPoint {
        t: tc.clone(),
        f: quarter.clone() * tc.clone() - tc.lift_q(&(Rational::from(v * v) / 2u32)) - d1,
        f1: quarter - d2.clone() / tc.clone(),
        f2: -((d3 - d2) / t2),
    }
}

/// `n²/4 - v²/2`.
pub fn boundary_constant_expected(n: usize, v: &Rational) -> Rational {
    Rational::from((n * n) as u64) / 4u32 - Rational::from(v * v) / 2u32
}

/// `σ̂_n(t; v) - t/4 - (n/2)√t` at a large `t`, for a pure-K combination.
pub fn boundary_constant(
    c: &BesselCombination,
    n: usize,
    ctx: &PrecisionContext,
    t_large: &Rational,
) -> Result<Certified<Float>> {
    if c.a != 0 {
        return Err(Error::domain("boundary constant needs a = 0"));
    }
    if *t_large < 10_000 {
        return Err(Error::domain("boundary constant needs t >= 1e4"));
    }
    let det = toeplitz_l_det(c, n, t_large, ctx)?;
    let prec = det.bits;
    certify(ctx, "boundary_constant", |bits| {
        let t = Float::with_val(bits.max(prec), t_large);
        // δ log of a constant phase vanishes, so the real part suffices
        let d1 = Float::with_val(t.prec(), &det.jet[0].re);
        let v2 = Float::with_val(t.prec(), Rational::from(&c.v * &c.v) / 2u32);
        let sh = Float::with_val(t.prec(), &t / 4u32) - v2 - d1;
        let rt = Float::with_val(t.prec(), t.sqrt_ref());
        Ok(sh - Float::with_val(t.prec(), &t / 4u32) - rt * n as u32 / 2u32)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    fn state(
        v1: Rational,
        v2: Rational,
        p: Rational,
        qq: Rational,
        t: Rational,
    ) -> HamiltonianState<Rational> {
        HamiltonianState {
            v1,
            v2,
            p,
            q: qq,
            t,
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let s = state(q(1, 1), q(0, 1), q(1, 1), q(1, 1), q(1, 1));
        assert_eq!(hamiltonian(&s).unwrap(), q(1, 2));
        let s = state(q(3, 2), q(-3, 2), q(0, 1), q(7, 3), q(2, 1));
        assert_eq!(hamiltonian(&s).unwrap(), q(0, 1));
        let s = state(q(1, 1), q(0, 1), q(1, 1), q(1, 1), q(0, 1));
        assert!(hamiltonian(&s).is_err());
    }

    #[test]
    fn involutions() {
        let s = state(q(1, 1), q(5, 1), q(1, 3), q(2, 1), q(3, 1));
        let s1 = apply_backlund(Backlund::S1, &s).unwrap();
        assert_eq!(apply_backlund(Backlund::S1, &s1).unwrap(), s);
        let s2 = apply_backlund(Backlund::S2, &s).unwrap();
        assert_eq!(apply_backlund(Backlund::S2, &s2).unwrap(), s);
    }

    #[test]
    fn mgf_jets_solve_y_and_h_forms() {
        use crate::detkit::{hankel_det, EnsembleParams, HankelMethod};
        let ctx = PrecisionContext::new(128, 1e-20, 1024).unwrap();
        let (n, a) = (q(2, 1), q(3, 2));
        let p = EnsembleParams::laguerre(2, a.clone()).unwrap();
        let d = hankel_det(&p, &q(3, 4), &ctx, HankelMethod::Moments).unwrap();
        let y = d.y_jet();
        let yk = OdeKind::YForm {
            n: n.clone(),
            alpha: a.clone(),
        };
        assert!(ode_residual(&yk, &y).relative() < 1e-30);
        let pm = params_mgf(&n, &a);
        let hk = OdeKind::HForm {
            v1: pm.v1.clone(),
            v2: pm.v2.clone(),
        };
        let h = h_from_y(&y, &a);
        assert!(ode_residual(&hk, &h).relative() < 1e-30);
        let sk = OdeKind::SigmaIii {
            v1: pm.v1.clone(),
            v2: pm.v2.clone(),
        };
        assert!(ode_residual(&sk, &sigma_from_h(&h, &pm)).relative() < 1e-30);
    }

    #[test]
    fn t1_shift() {
        let s = state(q(1, 1), q(0, 1), q(1, 2), q(3, 1), q(2, 1));
        let r = apply_backlund(Backlund::T1, &s).unwrap();
        assert_eq!((r.v1.clone(), r.v2.clone()), (q(2, 1), q(1, 1)));
        let shifted = state(q(2, 1), q(1, 1), s.p.clone(), s.q.clone(), s.t.clone());
        assert_eq!(hamiltonian(&r).unwrap(), hamiltonian(&shifted).unwrap());
    }

    #[test]
    fn guards() {
        let s = state(q(1, 1), q(0, 1), q(1, 1), q(0, 1), q(2, 1));
        assert!(matches!(
            apply_backlund(Backlund::S0, &s),
            Err(Error::DenominatorVanishing { .. })
        ));
        assert!(matches!(
            apply_backlund(Backlund::S1, &s),
            Err(Error::DenominatorVanishing { .. })
        ));
    }

    #[test]
    fn parameter_maps() {
        assert_eq!(
            params_mgf(&q(2, 1), &q(1, 1)),
            SigmaParameters::new(q(5, 1), q(-1, 1))
        );
        assert_eq!(
            params_hardedge(&q(2, 1), &q(3, 1)),
            SigmaParameters::new(q(5, 1), q(-1, 1))
        );
        let (a, m) = hardedge_match(&q(2, 1), &q(1, 1));
        assert_eq!(params_hardedge(&a, &m), params_mgf(&q(2, 1), &q(1, 1)));
    }

    #[test]
    fn h_and_sigma_forms_correspond() {
        // h = t/2 + d solves the h-form for any d when v1 = v2
        let p = SigmaParameters::new(q(3, 1), q(3, 1));
        let h = JetPoint {
            t: q(5, 7),
            f: q(11, 3),
            f1: q(1, 2),
            f2: q(0, 1),
        };
        let kind_h = OdeKind::HForm {
            v1: p.v1.clone(),
            v2: p.v2.clone(),
        };
        assert!(ode_residual(&kind_h, &h).value.is_zero());
        let s = sigma_from_h(&h, &p);
        let kind_s = OdeKind::SigmaIii {
            v1: p.v1.clone(),
            v2: p.v2.clone(),
        };
        assert!(ode_residual(&kind_s, &s).value.is_zero());
        assert_eq!(h_from_sigma(&s, &p), h);
    }

    #[test]
    fn y_and_h_roundtrip() {
        let y = JetPoint {
            t: q(3, 2),
            f: q(-1, 5),
            f1: q(2, 9),
            f2: q(7, 4),
        };
        assert_eq!(h_from_y(&y_from_h(&y, &q(5, 2)), &q(5, 2)), y);
    }

    #[test]
    fn residual_scale_is_term_sum() {
        let kind = OdeKind::YForm {
            n: q(1, 1),
            alpha: q(1, 1),
        };
        let jet = JetPoint {
            t: q(1, 1),
            f: q(0, 1),
            f1: q(0, 1),
            f2: q(0, 1),
        };
        let r = ode_residual(&kind, &jet);
        // only -(n)² survives
        assert_eq!(r.value, q(-1, 1));
        assert_eq!(r.scale, 1.0);
    }
}
