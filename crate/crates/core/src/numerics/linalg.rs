//! Dense pivoted elimination over [`Numeric`] scalars, with logarithmic
//! derivative jets by trace formulas.
//!
//! With `B_k = A⁻¹ δ^k A` for a derivation `δ`,
//!
//! ```text
//! δ   log det A = tr B1
//! δ²  log det A = tr B2 - tr B1²
//! δ³  log det A = tr B3 - 3 tr(B2 B1) + 2 tr B1³
//! ```

use rug::Float;

use super::field::Numeric;
use crate::error::{Error, Result};

/// Square matrix stored row-major.
#[derive(Debug, Clone)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// `P A = L U` with unit lower `L`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    odd: bool,
}

/// Factor `a` with partial pivoting. A pivot whose size is below
/// `2^(-7/8 · prec)` of the original column scale over the remaining rows is
/// reported as
/// [`Error::NearZero`] so the caller can escalate precision.
pub fn lu<T: Numeric>(a: &Matrix<T>, what: &str) -> Result<Lu<T>> {
    let n = a.n;
    if n == 0 {
        return Ok(Lu {
            n,
            lu: Vec::new(),
            perm: Vec::new(),
            odd: false,
        });
    }
    let prec = a.data[0].prec();
    // original magnitudes, permuted along with the rows; a pivot is compared
    // with the largest original entry among the rows still available, which
    // keeps graded matrices from being flagged
    let mut orig: Vec<Float> = a.data.iter().map(|x| x.pivot_norm()).collect();
    let mut m = a.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut odd = false;
    let cut = -((prec as i32) * 7 / 8);
    for k in 0..n {
        let mut best = k;
        let mut best_norm = m[k * n + k].pivot_norm();
        let mut scale = orig[k * n + k].clone();
        for i in k + 1..n {
            let v = m[i * n + k].pivot_norm();
            if v > best_norm {
                best = i;
                best_norm = v;
            }
            if orig[i * n + k] > scale {
                scale = orig[i * n + k].clone();
            }
        }
        let thresh = Float::with_val(prec, &scale << cut);
        if best_norm.is_zero() || best_norm <= thresh {
            let rel = if scale.is_zero() {
                0.0
            } else {
                Float::with_val(53, &best_norm / &scale).to_f64()
            };
            return Err(Error::NearZero {
                what: format!("{what}: pivot {k}"),
                magnitude: rel,
                bits: prec,
            });
        }
        if best != k {
            for j in 0..n {
                m.swap(k * n + j, best * n + j);
            }
            for j in 0..n {
                orig.swap(k * n + j, best * n + j);
            }
            perm.swap(k, best);
            odd = !odd;
        }
        let piv = m[k * n + k].clone();
        for i in k + 1..n {
            let f = m[i * n + k].clone() / piv.clone();
            if f.is_zero() {
                m[i * n + k] = f;
                continue;
            }
            for j in k + 1..n {
                let upd = f.clone() * m[k * n + j].clone();
                m[i * n + j] = m[i * n + j].clone() - upd;
            }
            m[i * n + k] = f;
        }
    }
    Ok(Lu {
        n,
        lu: m,
        perm,
        odd,
    })
}

impl<T: Numeric> Lu<T> {
    pub fn det(&self, one: &T) -> T {
        let mut d = one.one_like();
        for k in 0..self.n {
            d = d * self.lu[k * self.n + k].clone();
        }
        if self.odd {
            -d
        } else {
            d
        }
    }

    /// Solve `A X = B` for a square right-hand side.
    pub fn solve(&self, b: &Matrix<T>) -> Matrix<T> {
        let n = self.n;
        let mut x: Vec<T> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                x.push(b.get(self.perm[i], j).clone());
            }
        }
        for c in 0..n {
            for i in 0..n {
                let mut acc = x[i * n + c].clone();
                for k in 0..i {
                    acc = acc - self.lu[i * n + k].clone() * x[k * n + c].clone();
                }
                x[i * n + c] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = x[i * n + c].clone();
                for k in i + 1..n {
                    acc = acc - self.lu[i * n + k].clone() * x[k * n + c].clone();
                }
                x[i * n + c] = acc / self.lu[i * n + i].clone();
            }
        }
        Matrix { n, data: x }
    }
}

fn trace<T: Numeric>(a: &Matrix<T>, zero: &T) -> T {
    (0..a.n).fold(zero.clone(), |acc, i| acc + a.get(i, i).clone())
}

fn trace_product<T: Numeric>(a: &Matrix<T>, b: &Matrix<T>, zero: &T) -> T {
    let n = a.n;
    let mut acc = zero.clone();
    for i in 0..n {
        for j in 0..n {
            acc = acc + a.get(i, j).clone() * b.get(j, i).clone();
        }
    }
    acc
}

fn mat_mul<T: Numeric>(a: &Matrix<T>, b: &Matrix<T>, zero: &T) -> Matrix<T> {
    let n = a.n;
    Matrix::from_fn(n, |i, j| {
        let mut acc = zero.clone();
        for k in 0..n {
            acc = acc + a.get(i, k).clone() * b.get(k, j).clone();
        }
        acc
    })
}

/// Determinant of `a` together with `[δL, δ²L, δ³L]` (as many as there are
/// derivative matrices, at most three) where `L = log det a` and `derivs[k]`
/// holds the entrywise `δ^{k+1} a`.
pub fn det_with_jets<T: Numeric>(
    a: &Matrix<T>,
    derivs: &[Matrix<T>],
    what: &str,
) -> Result<(T, Vec<T>)> {
    assert!(derivs.len() <= 3, "at most three derivative orders");
    if a.n == 0 {
        return Err(Error::domain(format!("{what}: empty matrix")));
    }
    let f = lu(a, what)?;
    let zero = a.data[0].zero_like();
    let det = f.det(&a.data[0]);
    let bs: Vec<Matrix<T>> = derivs.iter().map(|d| f.solve(d)).collect();
    let mut jets = Vec::with_capacity(bs.len());
    if let Some(b1) = bs.first() {
        jets.push(trace(b1, &zero));
        if let Some(b2) = bs.get(1) {
            let b1sq = mat_mul(b1, b1, &zero);
            jets.push(trace(b2, &zero) - trace(&b1sq, &zero));
            if let Some(b3) = bs.get(2) {
                let three = zero.lift_i(3);
                let two = zero.lift_i(2);
                jets.push(
                    trace(b3, &zero) - three * trace_product(b2, b1, &zero)
                        + two * trace_product(&b1sq, b1, &zero),
                );
            }
        }
    }
    Ok((det, jets))
}

/// Determinant alone.
pub fn det<T: Numeric>(a: &Matrix<T>, what: &str) -> Result<T> {
    if a.n == 0 {
        return Err(Error::domain(format!("{what}: empty matrix")));
    }
    let f = lu(a, what)?;
    Ok(f.det(&a.data[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::field::Cplx;
    use crate::numerics::rel_diff_float;

    fn fl(v: f64) -> Float {
        Float::with_val(128, v)
    }

    #[test]
    fn small_determinants() {
        let a = Matrix::from_fn(2, |i, j| fl([[1.0, 2.0], [3.0, 4.0]][i][j]));
        let d = det(&a, "2x2").unwrap();
        assert!(rel_diff_float(&d, &fl(-2.0)) < 1e-35);
        // needs a row swap
        let a = Matrix::from_fn(3, |i, j| {
            fl([[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [4.0, -3.0, 8.0]][i][j])
        });
        let d = det(&a, "3x3").unwrap();
        assert!(rel_diff_float(&d, &fl(-2.0)) < 1e-35);
    }

    #[test]
    fn singular_matrix_is_flagged() {
        let a = Matrix::from_fn(3, |i, j| fl((i + j) as f64));
        assert!(matches!(det(&a, "rank 2"), Err(Error::NearZero { .. })));
    }

    #[test]
    fn hilbert_determinant() {
        // det H_4 = 1/6048000
        let a = Matrix::from_fn(4, |i, j| Float::with_val(256, 1) / ((i + j + 1) as u32));
        let d = det(&a, "hilbert").unwrap();
        let exact = Float::with_val(256, 1) / 6048000u32;
        assert!(rel_diff_float(&d, &exact) < 1e-60);
    }

    #[test]
    fn jets_match_closed_form() {
        // A(t) = [[t, 1], [1, t^2]], det = t^3 - 1, δ = t d/dt
        let t = 1.7f64;
        let a = Matrix::from_fn(2, |i, j| fl([[t, 1.0], [1.0, t * t]][i][j]));
        let d1 = Matrix::from_fn(2, |i, j| fl([[t, 0.0], [0.0, 2.0 * t * t]][i][j]));
        let d2 = Matrix::from_fn(2, |i, j| fl([[t, 0.0], [0.0, 4.0 * t * t]][i][j]));
        let d3 = Matrix::from_fn(2, |i, j| fl([[t, 0.0], [0.0, 8.0 * t * t]][i][j]));
        let (det, jets) = det_with_jets(&a, &[d1, d2, d3], "jet").unwrap();
        let t3 = t.powi(3);
        assert!((det.to_f64() - (t3 - 1.0)).abs() < 1e-12);
        // L = log(t^3 - 1), u = log t: L' = 3e/(e-1) with e = t^3, L'' = -9e/(e-1)^2,
        // L''' = 27e(e+1)/(e-1)^3
        let e = t3;
        let exp1 = 3.0 * e / (e - 1.0);
        let exp2 = -9.0 * e / (e - 1.0).powi(2);
        let exp3 = 27.0 * e * (e + 1.0) / (e - 1.0).powi(3);
        assert!((jets[0].to_f64() - exp1).abs() < 1e-12);
        assert!((jets[1].to_f64() - exp2).abs() < 1e-12);
        assert!((jets[2].to_f64() - exp3).abs() < 1e-11);
    }

    #[test]
    fn complex_determinant() {
        let c = |re: f64, im: f64| Cplx::new(fl(re), fl(im));
        let vals = [[c(1.0, 1.0), c(2.0, 0.0)], [c(0.0, -1.0), c(3.0, 2.0)]];
        let a = Matrix::from_fn(2, |i, j| vals[i][j].clone());
        let d = det(&a, "complex").unwrap();
        // (1+i)(3+2i) - 2(-i) = 1 + 5i + 2i = 1 + 7i
        assert!((d.re.to_f64() - 1.0).abs() < 1e-30);
        assert!((d.im.to_f64() - 7.0).abs() < 1e-30);
    }
}
