//! Outer factorization `εI + τ = y(R)* y(R)` of a positive L-Toeplitz operator `τ`,
//! built from `ψ = φ / √<1, φ>` with `φ = (εI + τ)^{-1} 1` and `y(R) = (M^R_ψ)^{-1}`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::TruncatedOperator;
use crate::lebesgue::DENSE_LIMIT;
use crate::linalg;
use crate::series::{self, NCSeries};
use crate::words::WordBasis;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Coefficient floor defining the effective support grade of `ψ`.
pub const SUPPORT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FactorResult {
    pub eps: f64,
    /// Symbol of `y(R)^{-1}`, gauge-fixed so that `ψ_∅ > 0`.
    pub psi: NCSeries,
    /// `M^R_ψ`.
    pub y_inv: TruncatedOperator,
    /// `M^R_{ψ^{-1}}`.
    pub y: TruncatedOperator,
    /// `‖P_M (y*y - (εI + τ)) P_M‖`.
    pub residual: f64,
    /// Grade used for the residual.
    pub m: usize,
}

impl FactorResult {
    /// `x` with `x(R) = U_t x(L) U_t = y`, i.e. `x = (ψ^{-1})^t`.
    pub fn x_symbol(&self) -> NCSeries {
        series::transpose_conjugate(&series::invert(&self.psi).expect("psi_0 > 0"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToeplitzReport {
    /// `max |<L_j g, A L_k h> - δ_{jk} <g, A h>|` over the probes.
    pub violation: f64,
    pub probes: usize,
}

/// Monomial-probe test of `L_j* A L_k = δ_{jk} A` on grades `<= N-1`. Exhaustive for
/// small bases, seeded random sampling otherwise.
pub fn ltoeplitz_check(a: &TruncatedOperator, seed: u64) -> ToeplitzReport {
    let bs = a.domain().clone();
    let d = bs.d();
    if bs.grade() == 0 {
        return ToeplitzReport {
            violation: 0.0,
            probes: 0,
        };
    }
    let inner = bs.count_upto(bs.grade() - 1);
    let shifted = |j: usize, x: usize| bs.concat_index(1, j, bs.len_of(x), bs.rank_of(x)).unwrap();
    if bs.count() <= 4096 {
        let m = a.to_dense();
        let mut worst = 0.0f64;
        for g in 0..inner {
            for h in 0..inner {
                for j in 0..d {
                    for k in 0..d {
                        let lhs = m[(shifted(j, g), shifted(k, h))];
                        let rhs = if j == k { m[(g, h)] } else { ZERO };
                        worst = worst.max((lhs - rhs).norm());
                    }
                }
            }
        }
        return ToeplitzReport {
            violation: worst,
            probes: inner * inner * d * d,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = bs.count();
    let mut worst = 0.0f64;
    let probes = 64;
    for _ in 0..probes {
        let h = rng.gen_range(0..inner);
        let k = rng.gen_range(0..d);
        let mut e = vec![ZERO; n];
        e[h] = ONE;
        let col = a.apply(&e);
        e[h] = ZERO;
        e[shifted(k, h)] = ONE;
        let col_shift = a.apply(&e);
        for _ in 0..32 {
            let g = rng.gen_range(0..inner);
            for j in 0..d {
                let rhs = if j == k { col[g] } else { ZERO };
                worst = worst.max((col_shift[shifted(j, g)] - rhs).norm());
            }
        }
    }
    ToeplitzReport {
        violation: worst,
        probes: probes * 32 * d,
    }
}

/// Factor `εI + τ`. `m` defaults to `N` minus the support grade of `ψ`.
pub fn outer_factor(tau: &TruncatedOperator, eps: f64, m: Option<usize>) -> Result<FactorResult> {
    if !(eps > 0.0) {
        return Err(Error::invalid("epsilon", format!("{eps} is not > 0")));
    }
    let bs = tau.domain().clone();
    if tau.codomain() != &bs {
        return Err(Error::invalid("tau", "must act on a single basis"));
    }
    let n = bs.count();
    let tol = 1e-10;
    let dense = if n <= DENSE_LIMIT {
        Some(linalg::hermitian_part(&tau.to_dense()))
    } else {
        None
    };

    // positivity on probes
    let scale = match &dense {
        Some(t) => linalg::hermitian_norm(t).max(1.0),
        None => 1.0,
    };
    let min_eig = match &dense {
        Some(t) => linalg::min_eigenvalue(t),
        None => {
            let start: Vec<C64> = (0..n).map(|i| C64::new(1.0, (i % 5) as f64 * 0.1)).collect();
            linalg::lanczos_extremes(|v| tau.apply(v), &start, 60).0
        }
    };
    if min_eig < -tol * scale {
        return Err(Error::NotPositive {
            min_eig,
            tol: tol * scale,
        });
    }
    let rep = ltoeplitz_check(tau, 7);
    if rep.violation > tol * scale {
        return Err(Error::NotToeplitz {
            violation: rep.violation,
            tol: tol * scale,
        });
    }

    let mut e0 = vec![ZERO; n];
    e0[0] = ONE;
    let phi = match &dense {
        Some(t) => {
            let mut a = t.clone();
            for i in 0..n {
                a[(i, i)] += eps;
            }
            linalg::hpd_solve(&a, &e0)?
        }
        None => {
            let (x, r) = linalg::conjugate_gradient(
                |v| {
                    let mut y = tau.apply(v);
                    y.iter_mut().zip(v).for_each(|(a, b)| *a += b * eps);
                    y
                },
                &e0,
                1e-13,
                20 * n.max(50),
            );
            if !r.converged {
                return Err(Error::NoConvergence {
                    residual: r.residual,
                    iterations: r.iterations,
                });
            }
            x
        }
    };
    let p0 = phi[0].re;
    let psi = NCSeries::from_coeffs(&bs, phi.iter().map(|x| x / p0.sqrt()).collect())?;
    let psi_inv = series::invert(&psi)?;
    let y_inv = series::right_multiplier(&psi);
    let y = series::right_multiplier(&psi_inv);

    let support = psi.trimmed(SUPPORT_FLOOR / psi.coeffs()[0].norm().max(1.0)).degree();
    let m = m.unwrap_or_else(|| bs.grade().saturating_sub(support)).min(bs.grade());
    let k = bs.count_upto(m);
    let ym = y.compress(m, bs.grade());
    let mut diff: DMatrix<C64> = ym.adjoint() * &ym;
    let target = match &dense {
        Some(t) => t.view((0, 0), (k, k)).into_owned(),
        None => tau.compress(m, m),
    };
    diff -= target;
    for i in 0..k {
        diff[(i, i)] -= eps;
    }
    let residual = linalg::hermitian_norm(&diff);
    Ok(FactorResult {
        eps,
        psi,
        y_inv,
        y,
        residual,
        m,
    })
}

/// Dense L-Toeplitz operator from a Gram matrix on the same basis.
pub fn operator_from_matrix(basis: &WordBasis, m: DMatrix<C64>) -> TruncatedOperator {
    TruncatedOperator::from_dense(basis, basis, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::enumerate;

    #[test]
    fn zero_tau() {
        let b = enumerate(2, 3).unwrap();
        let tau = operator_from_matrix(&b, DMatrix::zeros(b.count(), b.count()));
        let f = outer_factor(&tau, 1.0, None).unwrap();
        assert_eq!(f.psi, NCSeries::one(&b));
        assert!(f.residual < 1e-15);
        assert_eq!(f.y.to_dense(), DMatrix::identity(b.count(), b.count()));
    }

    #[test]
    fn identity_is_toeplitz_diagonal_is_not() {
        let b = enumerate(1, 6).unwrap();
        let id = TruncatedOperator::identity(&b);
        assert_eq!(ltoeplitz_check(&id, 1).violation, 0.0);
        let diag = DMatrix::from_fn(7, 7, |i, j| if i == j { C64::new(1.0 + i as f64, 0.0) } else { ZERO });
        let op = operator_from_matrix(&b, diag);
        assert!(ltoeplitz_check(&op, 1).violation >= 1.0);
        assert!(matches!(outer_factor(&op, 1.0, None), Err(Error::NotToeplitz { .. })));
    }

    #[test]
    fn rejects_indefinite() {
        let b = enumerate(1, 4).unwrap();
        let op = operator_from_matrix(&b, DMatrix::identity(5, 5) * C64::new(-1.0, 0.0));
        assert!(matches!(outer_factor(&op, 0.5, None), Err(Error::NotPositive { .. })));
        assert!(outer_factor(&TruncatedOperator::identity(&b), 0.0, None).is_err());
    }
}
