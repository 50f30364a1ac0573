//! Small numerical kernels shared by the other modules: vector arithmetic, conjugate
//! gradients, Lanczos extreme eigenvalues, Hermitian eigen-floors and a banded Cholesky.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.norm()))
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize, m: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, m, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Outcome of a conjugate-gradient solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// Final relative residual `|b - A x| / |b|`.
    pub residual: f64,
    pub converged: bool,
}

/// Conjugate gradients for a Hermitian positive definite operator given by `apply`.
pub fn conjugate_gradient<F>(apply: F, b: &[C64], tol: f64, max_iter: usize) -> (Vec<C64>, CgReport)
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![C64::new(0.0, 0.0); n];
    if bnorm == 0.0 {
        return (
            x,
            CgReport {
                iterations: 0,
                residual: 0.0,
                converged: true,
            },
        );
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    let mut it = 0;
    while it < max_iter {
        if rr.sqrt() <= tol * bnorm {
            break;
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap).re;
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r).re;
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        it += 1;
    }
    // true residual, not the recursively updated one
    let ax = apply(&x);
    let res = b.iter().zip(&ax).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt() / bnorm;
    let converged = res <= tol * 10.0 || rr.sqrt() <= tol * bnorm;
    (
        x,
        CgReport {
            iterations: it,
            residual: res,
            converged,
        },
    )
}

/// Extreme Ritz values `(min, max)` of a Hermitian operator by Lanczos with full
/// reorthogonalization. Exact (to roundoff) once `steps >= n`.
pub fn lanczos_extremes<F>(apply: F, start: &[C64], steps: usize) -> (f64, f64)
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = start.len();
    let steps = steps.min(n).max(1);
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(steps);
    let s = norm(start);
    q.push(start.iter().map(|x| x / s).collect());
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for k in 0..steps {
        let mut w = apply(&q[k]);
        let a = dot(&q[k], &w).re;
        alpha.push(a);
        // two passes of Gram-Schmidt against all previous vectors
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &w);
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        if k + 1 == steps || b < 1e-13 {
            break;
        }
        beta.push(b);
        q.push(w.iter().map(|x| x / b).collect());
    }
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let ev = t.symmetric_eigenvalues();
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// `(A + A*)/2`.
pub fn hermitian_part(a: &DMatrix<C64>) -> DMatrix<C64> {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &DMatrix<C64>) -> Vec<f64> {
    let h = hermitian_part(a);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

pub fn min_eigenvalue(a: &DMatrix<C64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    hermitian_eigenvalues(a)[0]
}

/// Spectral norm of the Hermitian part of `a`.
pub fn hermitian_norm(a: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(a).iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_entry(a: &DMatrix<C64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.norm()))
}

/// Inverse of a Hermitian positive definite matrix.
pub fn hpd_inverse(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let h = hermitian_part(a);
    match h.clone().cholesky() {
        Some(c) => Ok(c.inverse()),
        None => Err(Error::NotPositive {
            min_eig: min_eigenvalue(&h),
            tol: 0.0,
        }),
    }
}

pub fn hpd_solve(a: &DMatrix<C64>, b: &[C64]) -> Result<Vec<C64>> {
    let h = hermitian_part(a);
    let c = h.clone().cholesky().ok_or_else(|| Error::NotPositive {
        min_eig: min_eigenvalue(&h),
        tol: 0.0,
    })?;
    Ok(c.solve(&DVector::from_column_slice(b)).as_slice().to_vec())
}

/// Cholesky factor of a Hermitian positive definite band matrix.
///
/// Storage is by lower diagonals: `band[k][i] = A[i + k, i]` for `k = 0..=p`.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    p: usize,
    // l[i][k] = L[i, i - k]
    l: Vec<Vec<C64>>,
}

impl BandCholesky {
    pub fn factor(n: usize, p: usize, band: &[Vec<C64>]) -> Result<Self> {
        let mut l = vec![vec![C64::new(0.0, 0.0); p + 1]; n];
        for i in 0..n {
            let j0 = i.saturating_sub(p);
            for j in j0..=i {
                // A[i, j]
                let mut s = if i - j < band.len() && j < band[i - j].len() {
                    band[i - j][j]
                } else {
                    C64::new(0.0, 0.0)
                };
                let k0 = i.saturating_sub(p).max(j.saturating_sub(p));
                for k in k0..j {
                    s -= l[i][i - k] * l[j][j - k].conj();
                }
                if i == j {
                    if s.re <= 0.0 || !s.re.is_finite() {
                        return Err(Error::NotPositive {
                            min_eig: s.re,
                            tol: 0.0,
                        });
                    }
                    l[i][0] = C64::new(s.re.sqrt(), 0.0);
                } else {
                    l[i][i - j] = s / l[j][0];
                }
            }
        }
        Ok(BandCholesky { n, p, l })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let (n, p) = (self.n, self.p);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(p)..i {
                s -= self.l[i][i - k] * y[k];
            }
            y[i] = s / self.l[i][0];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + p + 1).min(n) {
                s -= self.l[k][k - i].conj() * y[k];
            }
            y[i] = s / self.l[i][0];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hpd(n: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n, n);
        &a * a.adjoint() + DMatrix::identity(n, n)
    }

    #[test]
    fn cg_matches_direct_solve() {
        let a = random_hpd(30, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random_vector(&mut rng, 30);
        let (x, rep) = conjugate_gradient(
            |v| (&a * DVector::from_column_slice(v)).as_slice().to_vec(),
            &b,
            1e-12,
            500,
        );
        assert!(rep.converged, "{rep:?}");
        let exact = hpd_solve(&a, &b).unwrap();
        let err: f64 = x.iter().zip(&exact).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn lanczos_matches_dense_spectrum() {
        let a = random_hpd(25, 5);
        let ev = hermitian_eigenvalues(&a);
        let start = vec![C64::new(1.0, 0.5); 25];
        let (lo, hi) = lanczos_extremes(|v| (&a * DVector::from_column_slice(v)).as_slice().to_vec(), &start, 25);
        assert!((lo - ev[0]).abs() < 1e-9 * ev[24]);
        assert!((hi - ev[24]).abs() < 1e-9 * ev[24]);
    }

    #[test]
    fn band_cholesky_solves_banded_system() {
        let n = 40;
        let p = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut a = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(p)..i {
                let z = C64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
            }
            a[(i, i)] = C64::new(4.0, 0.0);
        }
        let band: Vec<Vec<C64>> = (0..=p).map(|k| (0..n - k).map(|i| a[(i + k, i)]).collect()).collect();
        let f = BandCholesky::factor(n, p, &band).unwrap();
        let b = random_vector(&mut rng, n);
        let x = f.solve(&b);
        let exact = hpd_solve(&a, &b).unwrap();
        let err: f64 = x.iter().zip(&exact).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
