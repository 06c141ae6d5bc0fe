use std::collections::BTreeMap;

use painleve_tau::bessel::BesselCombination;
use painleve_tau::detkit::{
    gap_det, hankel_det, hard_edge_det, jacobi_hankel_det, mgf, toeplitz_l_det, EnsembleParams,
    HankelMethod, MgfMethod,
};
use painleve_tau::discrete::{
    alt_dp2_residual, orbit, pqa_residual, q_jet, tau_sequence, toda_verify, TauMethod,
};
use painleve_tau::numerics::{
    certify, parse_rational, rel_diff_cplx, rel_diff_float, Cplx, Field, PrecisionContext,
};
use painleve_tau::oracle::{integer_alpha, sample_lue};
use painleve_tau::painleve::{
    apply_backlund, h_from_y, hamiltonian, ode_residual, params_gap, params_jacobi, params_mgf,
    sigmahat_jet, Backlund, HamiltonianState, OdeKind, Residual,
};
use painleve_tau::series::{
    cumulants_exact, f_limit_series, ff2_residual, ff3_residual, ff_residual, limit_mgf, r_series,
    rs1_residual, rs4_residual, y_limit_series, y_residual,
};
use painleve_tau::Error;
use rayon::prelude::*;
use rug::{Float, Rational};
use thiserror::Error as ThisError;

use crate::args::{BacklundOp, Command, Opts, ResidualKind, SeriesKind};
use crate::report::{fmt_cplx, fmt_f64, fmt_float, Report};
use crate::verify;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::Domain(_) | Error::Pole(_) | Error::DenominatorVanishing { .. } => 2,
                _ => 3,
            },
            CliError::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Residual checks pass below this multiple of the certification tolerance.
pub const CHECK_FACTOR: f64 = 1e3;

pub fn check_tol(ctx: &PrecisionContext) -> f64 {
    ctx.tol * CHECK_FACTOR
}

pub fn precision(opts: &Opts) -> CliResult<PrecisionContext> {
    let bits = match opts.bits {
        Some(b) => b,
        None => match std::env::var("PAINLEVE_TAU_BITS") {
            Ok(s) => s
                .trim()
                .parse::<u32>()
                .ok()
                .filter(|b| *b > 0)
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "PAINLEVE_TAU_BITS must be a positive integer, got {s:?}"
                    ))
                })?,
            Err(_) => 256,
        },
    };
    let tol = opts.tol.unwrap_or(1e-30);
    let max_bits = opts.max_bits.unwrap_or(4096.max(bits));
    Ok(PrecisionContext::new(bits, tol, max_bits)?)
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> CliResult<&'a T> {
    v.as_ref()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn rational(v: &Option<String>, flag: &str) -> CliResult<Rational> {
    Ok(parse_rational(need(v, flag)?)?)
}

fn rational_or(v: &Option<String>, default: i64) -> CliResult<Rational> {
    match v {
        Some(s) => Ok(parse_rational(s)?),
        None => Ok(Rational::from(default)),
    }
}

fn t_grid(opts: &Opts) -> CliResult<Vec<Rational>> {
    let s = need(&opts.t_grid, "t-grid")?;
    let mut g = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(parse_rational)
        .collect::<Result<Vec<_>, _>>()?;
    if g.is_empty() {
        return Err(CliError::Usage("--t-grid is empty".into()));
    }
    g.sort();
    g.dedup();
    Ok(g)
}

fn combination(opts: &Opts) -> CliResult<BesselCombination> {
    let v = rational(&opts.v, "v")?;
    let a = rational_or(&opts.a, 0)?;
    let b = rational_or(&opts.b, 1)?;
    Ok(BesselCombination::new(a, b, v)?)
}

fn inputs(cmd: &Command, opts: &Opts, ctx: &PrecisionContext) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            m.insert(k.to_string(), v);
        }
    };
    put("n", opts.n.map(|x| x.to_string()));
    put("alpha", opts.alpha.clone());
    put("beta", opts.beta.clone());
    put("mu", opts.mu.clone());
    put("t", opts.t.clone());
    put("t_grid", opts.t_grid.clone());
    put("v", opts.v.clone());
    put("a", opts.a.clone());
    put("b", opts.b.clone());
    put("order", opts.order.map(|x| x.to_string()));
    put("steps", opts.steps.map(|x| x.to_string()));
    put("method", opts.method.clone());
    put("seed", opts.seed.map(|x| x.to_string()));
    put("bits", Some(ctx.bits.to_string()));
    put("tol", Some(fmt_f64(ctx.tol)));
    put("max_bits", Some(ctx.max_bits.to_string()));
    match cmd {
        Command::LimitSeries { which } => put("series", Some(format!("{which:?}"))),
        Command::Toda { kappa } => put("kappa", kappa.clone()),
        Command::Residual { kind } => put("kind", Some(format!("{kind:?}").to_lowercase())),
        Command::Backlund { op, v1, v2, p, q } => {
            put("op", Some(format!("{op:?}").to_lowercase()));
            put("v1", Some(v1.clone()));
            put("v2", Some(v2.clone()));
            put("p", Some(p.clone()));
            put("q", Some(q.clone()));
        }
        Command::Sample { count } => put("count", count.map(|c| c.to_string())),
        Command::Verify { suite } => put("suite", Some(format!("{suite:?}").to_lowercase())),
        _ => {}
    }
    m
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Mgf => "mgf",
        Command::Cumulants => "cumulants",
        Command::LimitSeries { .. } => "limit-series",
        Command::Recurrence => "recurrence",
        Command::Toda { .. } => "toda",
        Command::Residual { .. } => "residual",
        Command::HardEdge => "hard-edge",
        Command::Gap => "gap",
        Command::Backlund { .. } => "backlund",
        Command::Sample { .. } => "sample",
        Command::Verify { .. } => "verify",
        Command::Sweep => "sweep",
    }
}

pub fn run(cmd: &Command, opts: &Opts) -> CliResult<Report> {
    let ctx = precision(opts)?;
    let mut r = Report::new(command_name(cmd), inputs(cmd, opts, &ctx));
    match cmd {
        Command::Mgf => run_mgf(opts, &ctx, &mut r)?,
        Command::Cumulants => run_cumulants(opts, &mut r)?,
        Command::LimitSeries { which } => run_limit_series(*which, opts, &ctx, &mut r)?,
        Command::Recurrence => run_recurrence(opts, &ctx, &mut r)?,
        Command::Toda { kappa } => run_toda(kappa, opts, &ctx, &mut r)?,
        Command::Residual { kind } => run_residual(*kind, opts, &ctx, &mut r)?,
        Command::HardEdge => run_hard_edge(opts, &ctx, &mut r)?,
        Command::Gap => run_gap(opts, &ctx, &mut r)?,
        Command::Backlund { op, v1, v2, p, q } => run_backlund(*op, [v1, v2, p, q], opts, &mut r)?,
        Command::Sample { count } => run_sample(*count, opts, &ctx, &mut r)?,
        Command::Verify { suite } => verify::run(*suite, &ctx, &mut r)?,
        Command::Sweep => run_sweep(opts, &ctx, &mut r)?,
    }
    Ok(r)
}

fn laguerre(opts: &Opts) -> CliResult<EnsembleParams> {
    Ok(EnsembleParams::laguerre(
        *need(&opts.n, "n")?,
        rational(&opts.alpha, "alpha")?,
    )?)
}

fn mgf_methods(opts: &Opts, n: usize) -> CliResult<Vec<MgfMethod>> {
    let m = opts.method.as_deref().unwrap_or("hankel");
    if m == "all" {
        return Ok(MgfMethod::ALL
            .iter()
            .copied()
            .filter(|m| *m != MgfMethod::Quadrature || n <= 8)
            .collect());
    }
    MgfMethod::parse(m).map(|x| vec![x]).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown method {m:?}; expected hankel, toeplitz, toda, dpii, quadrature or all"
        ))
    })
}

fn run_mgf(opts: &Opts, ctx: &PrecisionContext, r: &mut Report) -> CliResult<()> {
    let p = laguerre(opts)?;
    let t = rational(&opts.t, "t")?;
    let methods = mgf_methods(opts, p.n)?;
    let vals = methods
        .par_iter()
        .map(|m| mgf(&p, &t, ctx, *m))
        .collect::<Result<Vec<_>, _>>()?;
    for (m, v) in methods.iter().zip(&vals) {
        r.float("mgf", v, m.name());
    }
    if vals.len() > 1 {
        let mut dev = 0.0f64;
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                dev = dev.max(rel_diff_float(&vals[i].value, &vals[j].value));
            }
        }
        r.push("max_pairwise_rel_dev", fmt_f64(dev), "consensus", 53, 0.0);
        let lim = check_tol(ctx);
        r.check(
            "consensus",
            dev <= lim,
            format!("max pairwise relative deviation {dev:e} (limit {lim:e})"),
        );
    }
    Ok(())
}

fn run_cumulants(opts: &Opts, r: &mut Report) -> CliResult<()> {
    let n = Rational::from(*need(&opts.n, "n")? as u64);
    let alpha = rational(&opts.alpha, "alpha")?;
    let order = opts.order.unwrap_or(4);
    let c = cumulants_exact(&n, &alpha, order, false)?;
    let label = |ok: bool| if ok { "exact-series" } else { "formal-series" };
    for (p, k) in c.kappa.iter().enumerate() {
        r.exact(format!("kappa_{}", p + 1), k, label(c.valid[p]));
    }
    let moments = c.moments();
    let mut all_valid = true;
    for (p, m) in moments.iter().enumerate() {
        all_valid &= c.valid[p];
        r.exact(format!("moment_{}", p + 1), m, label(all_valid));
    }
    Ok(())
}

fn run_limit_series(
    which: SeriesKind,
    opts: &Opts,
    ctx: &PrecisionContext,
    r: &mut Report,
) -> CliResult<()> {
    let order = opts.order.unwrap_or(6);
    if order == 0 {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    let through = order - 1;
    match which {
        SeriesKind::Y => {
            let alpha = rational(&opts.alpha, "alpha")?;
            let y = y_limit_series(&alpha, order)?;
            for p in 1..=order {
                r.exact(format!("Y_{p}"), y.coeff(p), "order-by-order");
            }
            r.check(
                "Y equation",
                y_residual(&y, &alpha).is_zero_through(through),
                format!("exact through order {through}"),
            );
            if let Some(ts) = &opts.t {
                let t = parse_rational(ts)?;
                let m = limit_mgf(&alpha, &t, order, ctx)?;
                r.float("limit_mgf", &m.value, format!("series-order-{}", m.order));
                r.push(
                    "limit_mgf_last_term",
                    fmt_f64(m.last_term),
                    "truncation-estimate",
                    53,
                    0.0,
                );
            }
        }
        SeriesKind::F => {
            let f = f_limit_series(order)?;
            for p in 1..=order {
                r.exact(format!("F_{p}"), f.coeff(p), "order-by-order");
            }
            let d = format!("exact through order {through}");
            r.check(
                "F equation",
                ff_residual(&f).is_zero_through(through),
                d.clone(),
            );
            r.check(
                "F second form",
                ff2_residual(&f).is_zero_through(through),
                d.clone(),
            );
            r.check("F third form", ff3_residual(&f).is_zero_through(through), d);
        }
        SeriesKind::R => {
            let alpha = rational(&opts.alpha, "alpha")?;
            let s = r_series(&alpha, order)?;
            for p in 0..=order {
                r.exact(format!("r_{p}"), s.coeff(p), "order-by-order");
            }
            let d = format!("exact through order {through}");
            r.check(
                "r first-order form",
                rs4_residual(&s, &alpha).is_zero_through(through),
                d.clone(),
            );
            r.check(
                "r third-order form",
                rs1_residual(&s).is_zero_through(through),
                d,
            );
        }
    }
    Ok(())
}

fn residual_check(r: &mut Report, name: &str, res: &Residual<Cplx>, lim: f64) {
    let rel = res.relative();
    r.check(
        name,
        rel <= lim,
        format!("relative residual {rel:e} (limit {lim:e})"),
    );
}

fn run_recurrence(opts: &Opts, ctx: &PrecisionContext, r: &mut Report) -> CliResult<()> {
    let c = combination(opts)?;
    let t = rational(&opts.t, "t")?;
    let steps = opts.steps.unwrap_or(5);
    let o = orbit(&c, &t, steps, ctx)?;
    let lim = check_tol(ctx);
    for s in &o.value {
        r.push(
            format!("p_{}", s.n),
            fmt_cplx(&s.p),
            "recurrence",
            o.bits,
            o.tol_achieved,
        );
        r.push(
            format!("q_{}", s.n),
            fmt_cplx(&s.q),
            "recurrence",
            o.bits,
            o.tol_achieved,
        );
    }
    let st = &o.value;
    for n in 0..steps {
        let prev = if n > 0 { Some(&st[n - 1].q) } else { None };
        let res = alt_dp2_residual(prev, &st[n].q, &st[n + 1].q, n, &c.v, &st[0].t);
        residual_check(r, &format!("alt-dPII n={n}"), &res, lim);
        residual_check(
            r,
            &format!("pqA n={n}"),
            &pqa_residual(&st[n], &st[n + 1]),
            lim,
        );
    }
    Ok(())
}

fn run_toda(
    kappa: &Option<String>,
    opts: &Opts,
    ctx: &PrecisionContext,
    r: &mut Report,
) -> CliResult<()> {
    let c = combination(opts)?;
    let t = rational(&opts.t, "t")?;
    let n = opts.n.unwrap_or(3);
    let kappa = rational_or(kappa, 0)?;
    let methods = [TauMethod::DirectDet, TauMethod::Toda, TauMethod::FromP];
    let seqs = methods
        .par_iter()
        .map(|m| {
            certify(ctx, "tau sequence", |bits| {
                Ok(tau_sequence(&c, n, &Float::with_val(bits, &t), *m)?.values)
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (m, s) in methods.iter().zip(&seqs) {
        for (k, v) in s.value.iter().enumerate() {
            r.push(
                format!("tau_hat_{k}"),
                fmt_cplx(v),
                m.name(),
                s.bits,
                s.tol_achieved,
            );
        }
    }
    let mut dev = 0.0f64;
    for s in &seqs[1..] {
        for (x, y) in s.value.iter().zip(&seqs[0].value) {
            dev = dev.max(rel_diff_cplx(x, y));
        }
    }
    let lim = check_tol(ctx);
    r.check(
        "tau routes agree",
        dev <= lim,
        format!("max relative deviation {dev:e} (limit {lim:e})"),
    );
    for k in 1..=n {
        let v = toda_verify(&c, k, &kappa, &t, ctx)?;
        r.push(
            format!("toda_residual_{k}"),
            fmt_f64(v.value),
            "double-wronskian",
            v.bits,
            v.tol_achieved,
        );
        r.check(
            format!("toda n={k}"),
            v.value <= lim,
            format!("relative residual {:e} (limit {lim:e})", v.value),
        );
    }
    Ok(())
}

fn run_residual(
    kind: ResidualKind,
    opts: &Opts,
    ctx: &PrecisionContext,
    r: &mut Report,
) -> CliResult<()> {
    let t = rational(&opts.t, "t")?;
    let lim = check_tol(ctx);
    let emit =
        |r: &mut Report, name: &str, res: Residual<Cplx>, method: &str, bits: u32, tol: f64| {
            r.push(name, fmt_f64(res.relative()), method, bits, tol);
            residual_check(r, name, &res, lim);
        };
    match kind {
        ResidualKind::Y | ResidualKind::H => {
            let p = laguerre(opts)?;
            let n = Rational::from(p.n as u64);
            let d = hankel_det(&p, &t, ctx, HankelMethod::Moments)?;
            let y = d.y_jet();
            if kind == ResidualKind::Y {
                let k = OdeKind::YForm {
                    n,
                    alpha: p.alpha.clone(),
                };
                emit(
                    r,
                    "y",
                    ode_residual(&k, &y),
                    d.method,
                    d.bits,
                    d.tol_achieved,
                );
            } else {
                let pm = params_mgf(&n, &p.alpha);
                let k = OdeKind::HForm {
                    v1: pm.v1,
                    v2: pm.v2,
                };
                emit(
                    r,
                    "h",
                    ode_residual(&k, &h_from_y(&y, &p.alpha)),
                    d.method,
                    d.bits,
                    d.tol_achieved,
                );
            }
        }
        ResidualKind::Siii => {
            let c = combination(opts)?;
            let n = *need(&opts.n, "n")?;
            let d = toeplitz_l_det(&c, n, &t, ctx)?;
            let nn = Rational::from(n as u64);
            let k = OdeKind::SigmaIii {
                v1: Rational::from(&c.v + &nn),
                v2: Rational::from(&nn - &c.v),
            };
            emit(
                r,
                "siii",
                ode_residual(&k, &sigmahat_jet(&d, &c.v)),
                d.method,
                d.bits,
                d.tol_achieved,
            );
        }
        ResidualKind::Piii => {
            let c = combination(opts)?;
            let n = *need(&opts.n, "n")?;
            let j = q_jet(&c, n, &t, ctx)?;
            let nn = Rational::from(n as u64);
            let k = OdeKind::PiiiQ {
                v1: Rational::from(&c.v + &nn),
                v2: Rational::from(&nn - &c.v),
            };
            emit(
                r,
                "piii",
                ode_residual(&k, &j.value),
                "recurrence-differences",
                j.bits,
                j.tol_achieved,
            );
        }
        ResidualKind::Sv => {
            let n = *need(&opts.n, "n")?;
            let alpha = rational(&opts.alpha, "alpha")?;
            let mu = rational(&opts.mu, "mu")?;
            let p = EnsembleParams::gap(n, alpha.clone(), mu.clone())?;
            let d = gap_det(&p, &t, ctx)?;
            let nn = Rational::from(n as u64);
            let mut u = d.y_jet();
            u.f = u.f.clone() - u.f.lift_q(&Rational::from(&mu * &nn));
            let k = OdeKind::SigmaV {
                nu: params_gap(&nn, &alpha, &mu),
            };
            emit(
                r,
                "sv",
                ode_residual(&k, &u),
                d.method,
                d.bits,
                d.tol_achieved,
            );
        }
        ResidualKind::Jacobi => {
            let n = *need(&opts.n, "n")?;
            let alpha = rational(&opts.alpha, "alpha")?;
            let beta = rational(&opts.beta, "beta")?;
            let p = EnsembleParams::jacobi(n, alpha.clone(), beta.clone())?;
            let d = jacobi_hankel_det(&p, &t, ctx)?;
            let nn = Rational::from(n as u64);
            let jet = d.y_jet();
            let k = OdeKind::JacobiH {
                n: nn.clone(),
                alpha: alpha.clone(),
                beta: beta.clone(),
            };
            emit(
                r,
                "jacobi",
                ode_residual(&k, &jet),
                d.method,
                d.bits,
                d.tol_achieved,
            );
            let shift = Rational::from(&nn * &(Rational::from(&nn + &alpha) + &beta));
            let mut s = jet.clone();
            s.f = s.f.clone() - s.f.lift_q(&shift);
            let k = OdeKind::SigmaV {
                nu: params_jacobi(&nn, &alpha, &beta),
            };
            emit(
                r,
                "jacobi sv",
                ode_residual(&k, &s),
                d.method,
                d.bits,
                d.tol_achieved,
            );
        }
    }
    Ok(())
}

fn small_integer(q: &Rational, flag: &str) -> CliResult<usize> {
    painleve_tau::numerics::as_i64(q)
        .filter(|x| *x >= 1)
        .map(|x| x as usize)
        .ok_or_else(|| CliError::Usage(format!("--{flag} must be a positive integer, got {q}")))
}

fn run_hard_edge(opts: &Opts, ctx: &PrecisionContext, r: &mut Report) -> CliResult<()> {
    let alpha_q = rational(&opts.alpha, "alpha")?;
    let alpha = small_integer(&alpha_q, "alpha")?;
    let mu = rational(&opts.mu, "mu")?;
    let t = rational(&opts.t, "t")?;
    let d = hard_edge_det(alpha, &mu, &t, ctx)?;
    r.push(
        "hard_edge",
        fmt_cplx(&d.value),
        d.method,
        d.bits,
        d.tol_achieved,
    );
    r.push(
        "t_dlog",
        fmt_cplx(&d.jet[0]),
        d.method,
        d.bits,
        d.tol_achieved,
    );
    if let Some(n) = opts.n {
        // finite-n gap probability at s = t/(4n)
        let p = EnsembleParams::gap(n, alpha_q.clone(), mu.clone())?;
        let s = Rational::from(&t / (4 * n as u64));
        let g = gap_det(&p, &s, ctx)?;
        r.push(
            "gap_t_dlog",
            fmt_cplx(&g.jet[0]),
            g.method,
            g.bits,
            g.tol_achieved,
        );
        let diff = (g.jet[0].re.clone() - &d.jet[0].re).abs();
        r.push(
            "abs_difference",
            fmt_float(&diff),
            "difference",
            g.bits.min(d.bits),
            0.0,
        );
    }
    Ok(())
}

fn run_gap(opts: &Opts, ctx: &PrecisionContext, r: &mut Report) -> CliResult<()> {
    let n = *need(&opts.n, "n")?;
    let alpha = rational(&opts.alpha, "alpha")?;
    let mu = rational(&opts.mu, "mu")?;
    let s = rational(&opts.t, "t")?;
    let p = EnsembleParams::gap(n, alpha, mu.clone())?;
    let d = gap_det(&p, &s, ctx)?;
    r.push("gap", fmt_cplx(&d.value), d.method, d.bits, d.tol_achieved);
    let u = d.jet[0].clone() - d.jet[0].lift_q(&Rational::from(&mu * n as u64));
    r.push("U", fmt_cplx(&u), d.method, d.bits, d.tol_achieved);
    Ok(())
}

fn run_backlund(
    op: BacklundOp,
    fields: [&String; 4],
    opts: &Opts,
    r: &mut Report,
) -> CliResult<()> {
    let [v1, v2, p, q] = fields.map(|s| parse_rational(s));
    let s = HamiltonianState {
        v1: v1?,
        v2: v2?,
        p: p?,
        q: q?,
        t: rational(&opts.t, "t")?,
    };
    let op = match op {
        BacklundOp::S0 => Backlund::S0,
        BacklundOp::S1 => Backlund::S1,
        BacklundOp::S2 => Backlund::S2,
        BacklundOp::T1 => Backlund::T1,
    };
    let out = apply_backlund(op, &s)?;
    let method = format!("{op:?}").to_lowercase();
    r.exact("v1", &out.v1, method.clone());
    r.exact("v2", &out.v2, method.clone());
    r.exact("p", &out.p, method.clone());
    r.exact("q", &out.q, method.clone());
    r.exact("hamiltonian_before", &hamiltonian(&s)?, "hamiltonian");
    let h_after = hamiltonian(&out)?;
    r.exact("hamiltonian_after", &h_after, "hamiltonian");
    match op {
        Backlund::S1 | Backlund::S2 | Backlund::S0 => {
            let back = apply_backlund(op, &out)?;
            r.check(
                "involution",
                back == s,
                "applying the map twice returns the input",
            );
        }
        Backlund::T1 => {
            let raised = HamiltonianState {
                v1: out.v1.clone(),
                v2: out.v2.clone(),
                ..s.clone()
            };
            let ok = h_after == hamiltonian(&raised)?;
            r.check(
                "shifted hamiltonian",
                ok,
                "H(T1 x) equals H at (v1+1, v2+1) and the original (p, q)",
            );
        }
    }
    Ok(())
}

fn run_sample(
    count: Option<usize>,
    opts: &Opts,
    ctx: &PrecisionContext,
    r: &mut Report,
) -> CliResult<()> {
    let n = *need(&opts.n, "n")?;
    let alpha_q = rational(&opts.alpha, "alpha")?;
    let alpha = integer_alpha(&alpha_q)?;
    let count = count.unwrap_or(100_000);
    if count < 10_000 {
        return Err(CliError::Usage("--count must be at least 10000".into()));
    }
    let seed = opts.seed.unwrap_or(0);
    let grid = match &opts.t_grid {
        Some(_) => t_grid(opts)?,
        None => vec![Rational::from((1, 4)), Rational::from((1, 2))],
    };
    let tf: Vec<f64> = grid.iter().map(Rational::to_f64).collect();
    let s = sample_lue(n, alpha, count, seed, &tf)?;
    r.push("mean_L", fmt_f64(s.mean_l), "monte-carlo", 53, s.se_l);
    if alpha > 0 {
        let k1 = n as f64 / alpha as f64;
        let z = (s.mean_l - k1).abs() / s.se_l;
        r.check(
            "mean_L vs n/alpha",
            z <= 3.0,
            format!("{z:.3} standard errors"),
        );
    }
    let p = EnsembleParams::laguerre(n, alpha_q)?;
    let mctx = ctx.with_tol(ctx.tol.max(1e-20));
    for ((t, mean, se), tq) in s.mgf.iter().zip(&grid) {
        r.push(
            format!("mgf[t={tq}]"),
            fmt_f64(*mean),
            "monte-carlo",
            53,
            *se,
        );
        let exact = mgf(&p, tq, &mctx, MgfMethod::Hankel)?;
        let z = (mean - exact.value.to_f64()).abs() / se;
        r.check(
            format!("mgf t={t}"),
            z <= 3.0,
            format!("{z:.3} standard errors from the determinant"),
        );
    }
    Ok(())
}

fn run_sweep(opts: &Opts, ctx: &PrecisionContext, r: &mut Report) -> CliResult<()> {
    let p = laguerre(opts)?;
    let grid = t_grid(opts)?;
    let m = opts.method.as_deref().unwrap_or("hankel");
    let method =
        MgfMethod::parse(m).ok_or_else(|| CliError::Usage(format!("unknown method {m:?}")))?;
    let vals = grid
        .par_iter()
        .map(|t| mgf(&p, t, ctx, method))
        .collect::<Result<Vec<_>, _>>()?;
    for (t, v) in grid.iter().zip(&vals) {
        r.float(format!("mgf[t={t}]"), v, method.name());
    }
    Ok(())
}
