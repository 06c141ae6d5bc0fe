//! Ground truth that shares no code with the Bessel and determinant-identity
//! routes: moments by direct quadrature of the weights, and a Monte-Carlo
//! sampler of the Laguerre unitary ensemble.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use rug::{Float, Rational};

use crate::detkit::EnsembleParams;
use crate::error::{Error, Result};
use crate::numerics::linalg::{det, Matrix};
use crate::numerics::quad::{integrate_vec, Domain};
use crate::numerics::{certify, is_integer, Certified, PrecisionContext};

/// Weight whose moments are integrated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightSpec {
    /// `x^α e^{-x - t/x}` on `(0, ∞)`.
    Laguerre { alpha: Rational, t: Rational },
    /// `x^α (1-x)^β e^{-t/x}` on `(0, 1)`.
    Jacobi {
        alpha: Rational,
        beta: Rational,
        t: Rational,
    },
    /// `λ^α e^{-λ} (λ - s)^μ` on `(s, ∞)`.
    Gap {
        alpha: Rational,
        mu: Rational,
        s: Rational,
    },
}

impl WeightSpec {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            WeightSpec::Laguerre { alpha, t } => *alpha > -1 && *t >= 0,
            WeightSpec::Jacobi { alpha, beta, t } => *alpha > 0 && *beta > 0 && *t >= 0,
            WeightSpec::Gap { alpha, mu, s } => *alpha > -1 && *mu > -1 && *s > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "weight parameters out of range: {self:?}"
            )))
        }
    }
}

/// Moments `m = lo..=hi` at working precision.
pub fn moments_quadrature_raw(w: &WeightSpec, lo: i64, hi: i64, prec: u32) -> Result<Vec<Float>> {
    w.validate()?;
    let dim = (hi - lo + 1) as usize;
    let wp = prec + 24;
    let tol = PrecisionContext::eps_at(prec);
    let powers = |mut base: Float, step: &Float| -> Vec<Float> {
        let mut out = Vec::with_capacity(dim);
        for _ in 0..dim {
            out.push(base.clone());
            base *= step;
        }
        out
    };
    let r = match w {
        WeightSpec::Laguerre { alpha, t } => {
            let a = Float::with_val(wp, Rational::from(alpha + lo));
            let tf = Float::with_val(wp, t);
            integrate_vec(Domain::HalfLine, prec, tol, dim, |x, _| {
                let p = x.prec();
                let mut e = Float::with_val(p, &a * Float::with_val(p, x.ln_ref())) - x;
                if !tf.is_zero() {
                    e -= Float::with_val(p, &tf / x);
                }
                powers(e.exp(), x)
            })?
        }
        WeightSpec::Jacobi { alpha, beta, t } => {
            let a = Float::with_val(wp, Rational::from(alpha + lo));
            let b = Float::with_val(wp, beta);
            let tf = Float::with_val(wp, t);
            integrate_vec(Domain::UnitInterval, prec, tol, dim, |x, xc| {
                let p = x.prec();
                let mut e = Float::with_val(p, &a * Float::with_val(p, x.ln_ref()))
                    + Float::with_val(p, &b * Float::with_val(p, xc.ln_ref()));
                if !tf.is_zero() {
                    e -= Float::with_val(p, &tf / x);
                }
                powers(e.exp(), x)
            })?
        }
        WeightSpec::Gap { alpha, mu, s } => {
            let a = Float::with_val(wp, Rational::from(alpha + lo));
            let m = Float::with_val(wp, mu);
            let sf = Float::with_val(wp, s);
            // λ = s + x
            integrate_vec(Domain::HalfLine, prec, tol, dim, |x, _| {
                let p = x.prec();
                let lam = Float::with_val(p, &sf + x);
                let e = Float::with_val(p, &a * Float::with_val(p, lam.ln_ref()))
                    + Float::with_val(p, &m * Float::with_val(p, x.ln_ref()))
                    - &lam;
                powers(e.exp(), &lam)
            })?
        }
    };
    Ok(r.values)
}

/// Certified `m`-th moment of the weight.
pub fn moment_quadrature(
    w: &WeightSpec,
    m: i64,
    ctx: &PrecisionContext,
) -> Result<Certified<Float>> {
    certify(ctx, "moment_quadrature", |bits| {
        Ok(moments_quadrature_raw(w, m, m, bits)?.remove(0))
    })
}

fn hankel_from_moments(n: usize, mom: &[Float]) -> Result<Float> {
    let a = Matrix::from_fn(n, |j, k| mom[j + k].clone());
    det(&a, "quadrature Hankel determinant")
}

/// `M_n(t) = det[μ_{j+k}(t)] / det[μ_{j+k}(0)]` with every moment from
/// quadrature.
pub fn mgf_quadrature(
    p: &EnsembleParams,
    t: &Rational,
    ctx: &PrecisionContext,
) -> Result<Certified<Float>> {
    if p.n > 8 {
        return Err(Error::domain(
            "quadrature generating function is limited to n <= 8",
        ));
    }
    if *t < 0 {
        return Err(Error::domain("t must be non-negative"));
    }
    let hi = 2 * p.n as i64 - 2;
    certify(ctx, "mgf_quadrature", |bits| {
        let wt = WeightSpec::Laguerre {
            alpha: p.alpha.clone(),
            t: t.clone(),
        };
        let w0 = WeightSpec::Laguerre {
            alpha: p.alpha.clone(),
            t: Rational::new(),
        };
        let num = hankel_from_moments(p.n, &moments_quadrature_raw(&wt, 0, hi, bits)?)?;
        let den = hankel_from_moments(p.n, &moments_quadrature_raw(&w0, 0, hi, bits)?)?;
        Ok(num / den)
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo

/// Empirical summary of `L = Σ 1/λ_k` over LUE samples.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub n: usize,
    pub alpha: u32,
    pub count: usize,
    pub seed: u64,
    pub mean_l: f64,
    pub se_l: f64,
    /// `(t, mean of e^{-tL}, standard error)`.
    pub mgf: Vec<(f64, f64, f64)>,
}

const SHARDS: usize = 16;

#[derive(Clone)]
struct Acc {
    count: usize,
    sum: f64,
    sum_sq: f64,
    e_sum: Vec<f64>,
    e_sum_sq: Vec<f64>,
}

impl Acc {
    fn new(k: usize) -> Self {
        Acc {
            count: 0,
            sum: 0.0,
            sum_sq: 0.0,
            e_sum: vec![0.0; k],
            e_sum_sq: vec![0.0; k],
        }
    }

    fn merge(mut self, o: &Acc) -> Acc {
        self.count += o.count;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        for i in 0..self.e_sum.len() {
            self.e_sum[i] += o.e_sum[i];
            self.e_sum_sq[i] += o.e_sum_sq[i];
        }
        self
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of a symmetric tridiagonal matrix by bisection.
pub fn tridiagonal_eigenvalues(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (0..n)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if sturm_count(d, e, m) > k {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// One LUE draw: `T = B Bᵀ` with `B` lower bidiagonal,
/// `B_ii² ~ Gamma(n + α - i)`, `B_{i+1,i}² ~ Gamma(n - 1 - i)`.
fn sample_l(n: usize, rng: &mut ChaCha20Rng, diag: &[Gamma<f64>], sub: &[Gamma<f64>]) -> f64 {
    let b: Vec<f64> = diag.iter().map(|g| g.sample(rng).sqrt()).collect();
    let s: Vec<f64> = sub.iter().map(|g| g.sample(rng).sqrt()).collect();
    let d: Vec<f64> = (0..n)
        .map(|i| b[i] * b[i] + if i > 0 { s[i - 1] * s[i - 1] } else { 0.0 })
        .collect();
    let e: Vec<f64> = (0..n.saturating_sub(1)).map(|i| b[i] * s[i]).collect();
    tridiagonal_eigenvalues(&d, &e)
        .iter()
        .map(|l| 1.0 / l)
        .sum()
}

/// Monte-Carlo estimates of `⟨L⟩` and `⟨e^{-tL}⟩` on `t_grid`, sharded over
/// a fixed number of independent streams of one seed.
pub fn sample_lue(
    n: usize,
    alpha: u32,
    count: usize,
    seed: u64,
    t_grid: &[f64],
) -> Result<McSummary> {
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    if count < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let m = n + alpha as usize;
    let diag: Vec<Gamma<f64>> = (0..n)
        .map(|i| Gamma::new((m - i) as f64, 1.0).expect("positive shape"))
        .collect();
    let sub: Vec<Gamma<f64>> = (0..n.saturating_sub(1))
        .map(|i| Gamma::new((n - 1 - i) as f64, 1.0).expect("positive shape"))
        .collect();
    let shards: Vec<Acc> = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(shard as u64);
            let quota = count / SHARDS + usize::from(shard < count % SHARDS);
            let mut acc = Acc::new(t_grid.len());
            for _ in 0..quota {
                let l = sample_l(n, &mut rng, &diag, &sub);
                acc.count += 1;
                acc.sum += l;
                acc.sum_sq += l * l;
                for (i, t) in t_grid.iter().enumerate() {
                    let e = (-t * l).exp();
                    acc.e_sum[i] += e;
                    acc.e_sum_sq[i] += e * e;
                }
            }
            acc
        })
        .collect();
    let total = shards
        .iter()
        .fold(Acc::new(t_grid.len()), |a, b| a.merge(b));
    let c = total.count as f64;
    let stats = |s: f64, s2: f64| {
        let mean = s / c;
        let var = ((s2 - c * mean * mean) / (c - 1.0)).max(0.0);
        (mean, (var / c).sqrt())
    };
    let (mean_l, se_l) = stats(total.sum, total.sum_sq);
    let mgf = t_grid
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (m, se) = stats(total.e_sum[i], total.e_sum_sq[i]);
            (*t, m, se)
        })
        .collect();
    Ok(McSummary {
        n,
        alpha,
        count: total.count,
        seed,
        mean_l,
        se_l,
        mgf,
    })
}

/// Integer check shared by callers that accept a rational `α`.
pub fn integer_alpha(alpha: &Rational) -> Result<u32> {
    if !is_integer(alpha) || *alpha < 0 {
        return Err(Error::domain(
            "Monte-Carlo sampling needs a non-negative integer alpha",
        ));
    }
    alpha
        .numer()
        .to_u32()
        .ok_or_else(|| Error::domain("alpha too large"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rel_diff_float;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(128, 1e-25, 1024).unwrap()
    }

    #[test]
    fn beta_and_exponential_moments() {
        let j = WeightSpec::Jacobi {
            alpha: q(1, 1),
            beta: q(1, 1),
            t: q(0, 1),
        };
        let r = moment_quadrature(&j, 0, &ctx()).unwrap();
        assert!(rel_diff_float(&r.value, &(Float::with_val(128, 1) / 6u32)) < 1e-25);
        let g = WeightSpec::Gap {
            alpha: q(0, 1),
            mu: q(0, 1),
            s: q(1, 1),
        };
        let r = moment_quadrature(&g, 0, &ctx()).unwrap();
        assert!(rel_diff_float(&r.value, &Float::with_val(128, -1).exp()) < 1e-25);
    }

    #[test]
    fn laguerre_t0_moments_are_factorials() {
        let w = WeightSpec::Laguerre {
            alpha: q(0, 1),
            t: q(0, 1),
        };
        let m = moments_quadrature_raw(&w, 0, 4, 128).unwrap();
        for (k, f) in [1u32, 1, 2, 6, 24].iter().enumerate() {
            assert!(rel_diff_float(&m[k], &Float::with_val(128, *f)) < 1e-30);
        }
    }

    #[test]
    fn mgf_at_small_t() {
        let p = EnsembleParams::laguerre(2, q(1, 1)).unwrap();
        let r = mgf_quadrature(&p, &q(1, 1_000_000_000), &ctx()).unwrap();
        assert!((r.value.to_f64() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bisection_on_known_matrix() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let ev = tridiagonal_eigenvalues(&[2.0, 2.0], &[1.0]);
        assert!((ev[0] - 1.0).abs() < 1e-13 && (ev[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn seed_determinism() {
        let a = sample_lue(3, 4, 2000, 7, &[0.5]).unwrap();
        let b = sample_lue(3, 4, 2000, 7, &[0.5]).unwrap();
        assert_eq!(a, b);
        let c = sample_lue(3, 4, 2000, 8, &[0.5]).unwrap();
        assert_ne!(a.mean_l, c.mean_l);
    }

    #[test]
    fn independent_of_bessel_and_determinant_routes() {
        let src = include_str!("oracle.rs");
        let code = &src[..src.find("#[cfg(test)]").unwrap()];
        assert!(!code.contains(concat!("bessel", "::")));
        let det_uses: Vec<&str> = code.matches(concat!("detkit", "::")).collect();
        assert_eq!(det_uses.len(), 1, "only the parameter type may be imported");
        assert!(code.contains(concat!("detkit", "::EnsembleParams;")));
    }
}
