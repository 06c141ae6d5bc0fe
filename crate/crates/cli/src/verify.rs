//! Cross-check suites. `quick` covers every identity at small sizes; `full`
//! adds the large-`t`, large-`n` and Monte-Carlo checks.

use painleve_tau::bessel::BesselCombination;
use painleve_tau::detkit::{
    gap_det, hankel_det, hard_edge_det, jacobi_hankel_det, mgf, toeplitz_l_det, wronskian_det,
    EnsembleParams, HankelMethod, MgfMethod,
};
use painleve_tau::discrete::{alt_dp2_residual, orbit, pqa_residual, q_jet, toda_verify};
use painleve_tau::numerics::{rel_diff_cplx, rel_diff_float, Field, PrecisionContext};
use painleve_tau::oracle::{mgf_quadrature, sample_lue};
use painleve_tau::painleve::{
    apply_backlund, boundary_constant, boundary_constant_expected, h_from_y, hamiltonian,
    ode_residual, params_gap, params_jacobi, params_mgf, sigmahat_jet, Backlund, HamiltonianState,
    OdeKind,
};
use painleve_tau::series::{
    cumulants_exact, f_limit_series, ff2_residual, ff3_residual, limit_mgf, r_series, rs1_residual,
    rs4_residual, y_limit_from_cumulants, y_limit_series,
};
use painleve_tau::Result;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::args::Suite;
use crate::commands::{check_tol, CliResult};
use crate::report::Report;

type Outcome = Result<(bool, String)>;
type CheckFn = fn(&PrecisionContext) -> Outcome;

fn q(a: i64, b: i64) -> Rational {
    Rational::from((a, b))
}

fn worst(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn verdict(w: f64, lim: f64, what: &str) -> Outcome {
    Ok((w <= lim, format!("max {what} {w:e} (limit {lim:e})")))
}

fn consensus_on(
    ctx: &PrecisionContext,
    ns: &[usize],
    alphas: &[Rational],
    ts: &[Rational],
) -> Outcome {
    let mut w = 0.0f64;
    for &n in ns {
        for a in alphas {
            let p = EnsembleParams::laguerre(n, a.clone())?;
            for t in ts {
                let vals = [
                    MgfMethod::Hankel,
                    MgfMethod::Toeplitz,
                    MgfMethod::Toda,
                    MgfMethod::Dpii,
                    MgfMethod::Quadrature,
                ]
                .iter()
                .map(|m| mgf(&p, t, ctx, *m).map(|c| c.value))
                .collect::<Result<Vec<_>>>()?;
                for i in 0..vals.len() {
                    for j in i + 1..vals.len() {
                        w = w.max(rel_diff_float(&vals[i], &vals[j]));
                    }
                }
            }
        }
    }
    verdict(w, check_tol(ctx), "pairwise relative deviation")
}

fn consensus(ctx: &PrecisionContext) -> Outcome {
    consensus_on(
        ctx,
        &[1, 2, 3],
        &[q(0, 1), q(1, 2), q(5, 2)],
        &[q(1, 10), q(1, 1)],
    )
}

fn consensus_wide(ctx: &PrecisionContext) -> Outcome {
    consensus_on(
        ctx,
        &[4, 5, 6],
        &[q(0, 1), q(1, 2), q(1, 1), q(5, 2)],
        &[q(1, 10), q(1, 1), q(5, 1)],
    )
}

fn y_and_h_equations(ctx: &PrecisionContext) -> Outcome {
    let mut w = 0.0f64;
    for n in 1..=3usize {
        for a in [q(0, 1), q(1, 2), q(5, 2)] {
            let p = EnsembleParams::laguerre(n, a.clone())?;
            let d = hankel_det(&p, &q(1, 1), ctx, HankelMethod::Moments)?;
            let nn = Rational::from(n as u64);
            let y = d.y_jet();
            w = w.max(
                ode_residual(
                    &OdeKind::YForm {
                        n: nn.clone(),
                        alpha: a.clone(),
                    },
                    &y,
                )
                .relative(),
            );
            let pm = params_mgf(&nn, &a);
            let hk = OdeKind::HForm {
                v1: pm.v1,
                v2: pm.v2,
            };
            w = w.max(ode_residual(&hk, &h_from_y(&y, &a)).relative());
        }
    }
    verdict(w, check_tol(ctx), "relative residual")
}

fn sigma_hat(ctx: &PrecisionContext) -> Outcome {
    let mut w = 0.0f64;
    for (a, b) in [(1, 0), (0, 1), (1, 1), (2, -3)] {
        for n in 1..=2usize {
            let v = q(1, 2);
            let c = BesselCombination::new(q(a, 1), q(b, 1), v.clone())?;
            let d = toeplitz_l_det(&c, n, &q(1, 1), ctx)?;
            let nn = Rational::from(n as u64);
            let k = OdeKind::SigmaIii {
                v1: Rational::from(&v + &nn),
                v2: nn - &v,
            };
            w = w.max(ode_residual(&k, &sigmahat_jet(&d, &v)).relative());
        }
    }
    verdict(w, check_tol(ctx), "relative residual")
}

fn wronskian_identity(ctx: &PrecisionContext) -> Outcome {
    let mut w = 0.0f64;
    for c in [
        BesselCombination::pure_i(q(1, 3)),
        BesselCombination::pure_k(q(3, 2)),
        BesselCombination::new(q(1, 1), q(1, 1), q(2, 1))?,
    ] {
        for n in 2..=4usize {
            let t = q(3, 2);
            let wd = wronskian_det(&c, n, &t, ctx)?;
            let l = toeplitz_l_det(&c, n, &t, ctx)?;
            let f = Float::with_val(l.value.prec(), Rational::from(&t / 4u32))
                .pow((n * (n - 1) / 2) as u32);
            w = w.max(rel_diff_cplx(&wd.value, &l.value.scale(&f)));
        }
    }
    verdict(w, check_tol(ctx), "relative deviation")
}

fn toda(ctx: &PrecisionContext) -> Outcome {
    let mut w = 0.0f64;
    for c in [
        BesselCombination::pure_i(q(1, 2)),
        BesselCombination::new(q(1, 1), q(2, 1), q(3, 2))?,
    ] {
        for n in 1..=3usize {
            for kappa in [q(0, 1), q(2, 3)] {
                w = w.max(toda_verify(&c, n, &kappa, &q(2, 1), ctx)?.value);
            }
        }
    }
    verdict(w, check_tol(ctx), "relative residual")
}

fn cumulants(_: &PrecisionContext) -> Outcome {
    let mut ok = true;
    for (n, a) in [(q(1, 1), q(7, 3)), (q(3, 1), q(5, 2)), (q(8, 1), q(41, 5))] {
        let c = cumulants_exact(&n, &a, 2, true)?;
        let k2 = (Rational::from(&n * &n) + Rational::from(&n * &a))
            / (Rational::from(&a * &a) * (Rational::from(&a * &a) - 1));
        ok &= c.kappa[0] == Rational::from(&n / &a) && c.kappa[1] == k2;
    }
    // one particle: E[x^-k] = Γ(α+1-k)/Γ(α+1)
    let m = cumulants_exact(&q(1, 1), &q(7, 1), 3, true)?.moments();
    ok &= m == vec![q(1, 7), q(1, 42), q(1, 210)];
    Ok((
        ok,
        "kappa_1, kappa_2 closed forms and one-particle moments".into(),
    ))
}

fn discrete_orbits(ctx: &PrecisionContext) -> Outcome {
    let mut w = 0.0f64;
    for (c, t) in [
        (BesselCombination::pure_k(q(5, 2)), q(1, 1)),
        (BesselCombination::new(q(1, 1), q(1, 1), q(3, 2))?, q(1, 2)),
    ] {
        let o = orbit(&c, &t, 7, ctx)?.value;
        for n in 0..=6 {
            let prev = if n > 0 { Some(&o[n - 1].q) } else { None };
            w = w.max(alt_dp2_residual(prev, &o[n].q, &o[n + 1].q, n, &c.v, &o[0].t).relative());
            w = w.max(pqa_residual(&o[n], &o[n + 1]).relative());
        }
    }
    verdict(w, check_tol(ctx), "relative residual")
}

fn piii(ctx: &PrecisionContext) -> Outcome {
    let mut w = 0.0f64;
    let c = BesselCombination::new(q(1, 1), q(2, 1), q(1, 3))?;
    for n in 0..3usize {
        let j = q_jet(&c, n, &q(3, 2), ctx)?.value;
        let nn = Rational::from(n as u64);
        let k = OdeKind::PiiiQ {
            v1: Rational::from(&c.v + &nn),
            v2: Rational::from(&nn - &c.v),
        };
        w = w.max(ode_residual(&k, &j).relative());
    }
    verdict(w, check_tol(ctx), "relative residual")
}

fn sigma_pv(ctx: &PrecisionContext) -> Outcome {
    let mut w = 0.0f64;
    for n in 1..=2usize {
        let nn = Rational::from(n as u64);
        let (a, b) = (q(1, 2), q(3, 2));
        let p = EnsembleParams::jacobi(n, a.clone(), b.clone())?;
        let jet = jacobi_hankel_det(&p, &q(1, 1), ctx)?.y_jet();
        let j1 = OdeKind::JacobiH {
            n: nn.clone(),
            alpha: a.clone(),
            beta: b.clone(),
        };
        w = w.max(ode_residual(&j1, &jet).relative());
        let mut s = jet.clone();
        let k = Rational::from(&nn * &(Rational::from(&nn + &a) + &b));
        s.f = s.f.clone() - s.f.lift_q(&k);
        w = w.max(
            ode_residual(
                &OdeKind::SigmaV {
                    nu: params_jacobi(&nn, &a, &b),
                },
                &s,
            )
            .relative(),
        );
        for (a, mu) in [(q(1, 2), q(1, 1)), (q(2, 1), q(1, 3))] {
            let p = EnsembleParams::gap(n, a.clone(), mu.clone())?;
            let mut u = gap_det(&p, &q(1, 1), ctx)?.y_jet();
            u.f = u.f.clone() - u.f.lift_q(&Rational::from(&mu * &nn));
            w = w.max(
                ode_residual(
                    &OdeKind::SigmaV {
                        nu: params_gap(&nn, &a, &mu),
                    },
                    &u,
                )
                .relative(),
            );
        }
    }
    verdict(w, check_tol(ctx), "relative residual")
}

fn backlund(_: &PrecisionContext) -> Outcome {
    let mut ok = true;
    for (v1, v2, p, qq, t) in [
        (1, 5, (1, 3), 2, 3),
        (-2, 7, (5, 2), -3, 1),
        (4, -1, (-1, 7), 9, 5),
    ] {
        let s = HamiltonianState {
            v1: q(v1, 1),
            v2: q(v2, 1),
            p: q(p.0, p.1),
            q: q(qq, 1),
            t: q(t, 1),
        };
        for op in [Backlund::S0, Backlund::S1, Backlund::S2] {
            ok &= apply_backlund(op, &apply_backlund(op, &s)?)? == s;
        }
        let r = apply_backlund(Backlund::T1, &s)?;
        let raised = HamiltonianState {
            v1: Rational::from(&s.v1 + 1u32),
            v2: Rational::from(&s.v2 + 1u32),
            ..s.clone()
        };
        ok &= r.v1 == raised.v1 && r.v2 == raised.v2 && hamiltonian(&r)? == hamiltonian(&raised)?;
    }
    Ok((ok, "involutions and the T1 parameter shift, exact".into()))
}

fn series_web(_: &PrecisionContext) -> Outcome {
    let a = q(7, 2);
    let y = y_limit_series(&a, 3)?;
    let lim = y_limit_from_cumulants(&a, 3)?;
    let y_ok = (1..=3).all(|p| y.coeff(p) == &lim[p - 1]);
    let f = f_limit_series(9)?;
    let f_ok = f.coeff(1) == &q(1, 1)
        && f.coeff(2) == &q(2, 1)
        && ff2_residual(&f).is_zero_through(8)
        && ff3_residual(&f).is_zero_through(8);
    let r = r_series(&a, 8)?;
    let r_ok = rs4_residual(&r, &a).is_zero_through(7) && rs1_residual(&r).is_zero_through(7);
    Ok((
        y_ok && f_ok && r_ok,
        format!("Y limits {y_ok}, F identities {f_ok}, r identities {r_ok}"),
    ))
}

fn boundary(ctx: &PrecisionContext) -> Outcome {
    let (n, v) = (2usize, q(3, 1));
    let c = BesselCombination::pure_k(v.clone());
    let e = Float::with_val(ctx.bits, boundary_constant_expected(n, &v));
    let err = |t: i64| -> Result<f64> {
        let b = boundary_constant(&c, n, ctx, &Rational::from(t))?.value;
        Ok(Float::with_val(53, (b - &e).abs()).to_f64())
    };
    let (e6, e8) = (err(1_000_000)?, err(100_000_000)?);
    Ok((
        e6 <= 1e-2 && e6 / e8 >= 8.0,
        format!("error {e6:e} at t=1e6, {e8:e} at t=1e8"),
    ))
}

fn hard_edge(ctx: &PrecisionContext) -> Outcome {
    let (alpha, mu, t) = (1usize, q(2, 1), q(1, 1));
    let he = hard_edge_det(alpha, &mu, &t, ctx)?.jet[0].re.clone();
    let mut d = Vec::new();
    for n in [10usize, 20, 40] {
        let p = EnsembleParams::gap(n, Rational::from(alpha as u64), mu.clone())?;
        let g = gap_det(&p, &Rational::from(&t / (4 * n as u64)), ctx)?.jet[0]
            .re
            .clone();
        d.push(Float::with_val(53, (g - &he).abs()).to_f64());
    }
    Ok((
        d.windows(2).all(|w| w[1] < w[0]),
        format!("differences at n = 10, 20, 40: {d:?}"),
    ))
}

fn monte_carlo(ctx: &PrecisionContext) -> Outcome {
    let s = sample_lue(4, 6, 100_000, 14, &[0.25, 0.5])?;
    let mut z = vec![(s.mean_l - 4.0 / 6.0).abs() / s.se_l];
    let p = EnsembleParams::laguerre(4, q(6, 1))?;
    for (t, m, se) in &s.mgf {
        let exact = mgf(
            &p,
            &Rational::from_f64(*t).unwrap(),
            &ctx.with_tol(ctx.tol.max(1e-20)),
            MgfMethod::Hankel,
        )?;
        z.push((m - exact.value.to_f64()).abs() / se);
    }
    let w = worst(z.iter().copied());
    Ok((w <= 3.0, format!("max deviation {w:.3} standard errors")))
}

fn limit_mgf_large_n(ctx: &PrecisionContext) -> Outcome {
    let t = q(1, 10);
    let lim = limit_mgf(&q(2, 1), &t, 4, ctx)?;
    let p = EnsembleParams::laguerre(200, q(2, 1))?;
    let m = mgf(&p, &Rational::from(&t / 200u32), ctx, MgfMethod::Toeplitz)?;
    let d = Float::with_val(53, (m.value - &lim.value.value).abs()).to_f64();
    Ok((
        d <= 1e-3,
        format!(
            "limit {:.7} vs n=200: difference {d:e}",
            lim.value.value.to_f64()
        ),
    ))
}

fn rel_check_quadrature(ctx: &PrecisionContext) -> Outcome {
    let p = EnsembleParams::laguerre(3, q(1, 1))?;
    let a = mgf(&p, &q(2, 1), ctx, MgfMethod::Hankel)?.value;
    let b = mgf_quadrature(&p, &q(2, 1), ctx)?.value;
    verdict(rel_diff_float(&a, &b), check_tol(ctx), "relative deviation")
}

pub fn run(suite: Suite, ctx: &PrecisionContext, r: &mut Report) -> CliResult<()> {
    let mut checks: Vec<(&str, CheckFn)> = vec![
        ("backlund algebra", backlund),
        ("cumulants", cumulants),
        ("discrete painleve orbits", discrete_orbits),
        ("mgf consensus", consensus),
        ("mgf vs quadrature", rel_check_quadrature),
        ("painleve III for q_n", piii),
        ("series web", series_web),
        ("sigma-hat", sigma_hat),
        ("sigma-PV", sigma_pv),
        ("toda", toda),
        ("wronskian identity", wronskian_identity),
        ("y and h equations", y_and_h_equations),
    ];
    if suite == Suite::Full {
        checks.extend([
            ("boundary constant", boundary as CheckFn),
            ("hard-edge trend", hard_edge),
            ("large-n limit mgf", limit_mgf_large_n),
            ("mgf consensus n=4..6", consensus_wide),
            ("monte carlo", monte_carlo),
        ]);
    }
    checks.sort_by_key(|c| c.0);
    let outcomes: Vec<Outcome> = checks.par_iter().map(|(_, f)| f(ctx)).collect();
    for ((name, _), o) in checks.iter().zip(outcomes) {
        match o {
            Ok((pass, detail)) => r.check(*name, pass, detail),
            Err(e) => r.check(*name, false, format!("error: {e}")),
        }
    }
    Ok(())
}
