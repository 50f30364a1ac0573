//! Truncated full Fock space: vectors, free shifts, the transpose unitary and grade projections.
//!
//! Every operator here is the compression `P_N (.) P_N` of an operator on the full
//! space, possibly with a larger codomain grade when callers need outputs that
//! would otherwise be cut off.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::words::{Word, WordBasis};

/// Coefficient vector over all words of length `<= N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    basis: WordBasis,
    coeffs: Vec<C64>,
}

impl FockVector {
    pub fn zeros(basis: &WordBasis) -> Self {
        FockVector {
            basis: basis.clone(),
            coeffs: vec![C64::new(0.0, 0.0); basis.count()],
        }
    }

    pub fn from_coeffs(basis: &WordBasis, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != basis.count() {
            return Err(Error::invalid(
                "coeffs",
                format!("length {} does not match basis count {}", coeffs.len(), basis.count()),
            ));
        }
        Ok(FockVector {
            basis: basis.clone(),
            coeffs,
        })
    }

    /// The vacuum `1 = e_∅`.
    pub fn vacuum(basis: &WordBasis) -> Self {
        let mut v = Self::zeros(basis);
        v.coeffs[0] = C64::new(1.0, 0.0);
        v
    }

    pub fn basis_vector(basis: &WordBasis, w: &Word) -> Result<Self> {
        let i = basis
            .index(w)
            .ok_or_else(|| Error::invalid("word", format!("{w} is outside the basis")))?;
        let mut v = Self::zeros(basis);
        v.coeffs[i] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn basis(&self) -> &WordBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn get(&self, w: &Word) -> C64 {
        self.basis.index(w).map(|i| self.coeffs[i]).unwrap_or_default()
    }

    pub fn set(&mut self, w: &Word, c: C64) -> Result<()> {
        let i = self
            .basis
            .index(w)
            .ok_or_else(|| Error::invalid("word", format!("{w} is outside the basis")))?;
        self.coeffs[i] = c;
        Ok(())
    }

    /// `<self, other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        linalg::dot(&self.coeffs, &other.coeffs)
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.coeffs)
    }
}

#[derive(Debug)]
struct SparseCols {
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<C64>,
}

type VecFn = dyn Fn(&[C64]) -> Vec<C64> + Send + Sync;

#[derive(Clone)]
enum Repr {
    Sparse(Arc<SparseCols>),
    Dense(Arc<DMatrix<C64>>),
    Func { fwd: Arc<VecFn>, adj: Arc<VecFn> },
}

/// A linear map between truncated Fock spaces together with its adjoint.
#[derive(Clone)]
pub struct TruncatedOperator {
    domain: WordBasis,
    codomain: WordBasis,
    repr: Repr,
}

impl std::fmt::Debug for TruncatedOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.repr {
            Repr::Sparse(_) => "sparse",
            Repr::Dense(_) => "dense",
            Repr::Func { .. } => "matrix-free",
        };
        write!(
            f,
            "TruncatedOperator({kind}, {}x{})",
            self.codomain.count(),
            self.domain.count()
        )
    }
}

impl TruncatedOperator {
    /// Sparse operator given column by column as `(row, value)` lists.
    pub fn from_columns(
        domain: &WordBasis,
        codomain: &WordBasis,
        cols: impl IntoIterator<Item = Vec<(usize, C64)>>,
    ) -> Self {
        let mut col_ptr = vec![0];
        let mut rows = Vec::new();
        let mut vals = Vec::new();
        for col in cols {
            for (r, v) in col {
                debug_assert!(r < codomain.count());
                rows.push(r);
                vals.push(v);
            }
            col_ptr.push(rows.len());
        }
        assert_eq!(col_ptr.len(), domain.count() + 1, "one column list per domain word");
        TruncatedOperator {
            domain: domain.clone(),
            codomain: codomain.clone(),
            repr: Repr::Sparse(Arc::new(SparseCols { col_ptr, rows, vals })),
        }
    }

    pub fn from_dense(domain: &WordBasis, codomain: &WordBasis, m: DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), codomain.count());
        assert_eq!(m.ncols(), domain.count());
        TruncatedOperator {
            domain: domain.clone(),
            codomain: codomain.clone(),
            repr: Repr::Dense(Arc::new(m)),
        }
    }

    pub fn from_fn<F, G>(domain: &WordBasis, codomain: &WordBasis, fwd: F, adj: G) -> Self
    where
        F: Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
        G: Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
    {
        TruncatedOperator {
            domain: domain.clone(),
            codomain: codomain.clone(),
            repr: Repr::Func {
                fwd: Arc::new(fwd),
                adj: Arc::new(adj),
            },
        }
    }

    pub fn identity(basis: &WordBasis) -> Self {
        let one = C64::new(1.0, 0.0);
        Self::from_columns(basis, basis, (0..basis.count()).map(|i| vec![(i, one)]))
    }

    pub fn domain(&self) -> &WordBasis {
        &self.domain
    }

    pub fn codomain(&self) -> &WordBasis {
        &self.codomain
    }

    pub fn is_matrix_free(&self) -> bool {
        matches!(self.repr, Repr::Func { .. })
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.domain.count(), "input length");
        match &self.repr {
            Repr::Sparse(s) => {
                let mut out = vec![C64::new(0.0, 0.0); self.codomain.count()];
                for (j, &x) in v.iter().enumerate() {
                    if x == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for p in s.col_ptr[j]..s.col_ptr[j + 1] {
                        out[s.rows[p]] += s.vals[p] * x;
                    }
                }
                out
            }
            Repr::Dense(m) => {
                let x = nalgebra::DVector::from_column_slice(v);
                (m.as_ref() * x).as_slice().to_vec()
            }
            Repr::Func { fwd, .. } => fwd(v),
        }
    }

    pub fn adjoint_apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.codomain.count(), "input length");
        match &self.repr {
            Repr::Sparse(s) => (0..self.domain.count())
                .map(|j| {
                    (s.col_ptr[j]..s.col_ptr[j + 1])
                        .map(|p| s.vals[p].conj() * v[s.rows[p]])
                        .sum()
                })
                .collect(),
            Repr::Dense(m) => {
                let x = nalgebra::DVector::from_column_slice(v);
                (m.adjoint() * x).as_slice().to_vec()
            }
            Repr::Func { adj, .. } => adj(v),
        }
    }

    pub fn apply_vec(&self, v: &FockVector) -> FockVector {
        FockVector {
            basis: self.codomain.clone(),
            coeffs: self.apply(v.coeffs()),
        }
    }

    pub fn adjoint_apply_vec(&self, v: &FockVector) -> FockVector {
        FockVector {
            basis: self.domain.clone(),
            coeffs: self.adjoint_apply(v.coeffs()),
        }
    }

    pub fn adjoint(&self) -> TruncatedOperator {
        match &self.repr {
            Repr::Dense(m) => Self::from_dense(&self.codomain, &self.domain, m.adjoint()),
            _ => {
                let a = self.clone();
                let b = self.clone();
                Self::from_fn(
                    &self.codomain,
                    &self.domain,
                    move |v| a.adjoint_apply(v),
                    move |v| b.apply(v),
                )
            }
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &TruncatedOperator) -> TruncatedOperator {
        assert_eq!(other.codomain, self.domain, "composition bases");
        let (a1, b1) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        Self::from_fn(
            &other.domain,
            &self.codomain,
            move |v| a1.apply(&b1.apply(v)),
            move |v| b2.adjoint_apply(&a2.adjoint_apply(v)),
        )
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: C64, other: &TruncatedOperator, beta: C64) -> TruncatedOperator {
        assert_eq!(self.domain, other.domain);
        assert_eq!(self.codomain, other.codomain);
        let (a1, b1) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        Self::from_fn(
            &self.domain,
            &self.codomain,
            move |v| {
                let mut x = a1.apply(v);
                let y = b1.apply(v);
                x.iter_mut().zip(y).for_each(|(p, q)| *p = alpha * *p + beta * q);
                x
            },
            move |v| {
                let mut x = a2.adjoint_apply(v);
                let y = b2.adjoint_apply(v);
                x.iter_mut()
                    .zip(y)
                    .for_each(|(p, q)| *p = alpha.conj() * *p + beta.conj() * q);
                x
            },
        )
    }

    /// Dense matrix of the operator.
    pub fn to_dense(&self) -> DMatrix<C64> {
        self.compress(self.domain.grade(), self.codomain.grade())
    }

    /// Dense block with columns of grade `<= m_in` and rows of grade `<= m_out`.
    pub fn compress(&self, m_in: usize, m_out: usize) -> DMatrix<C64> {
        let nc = self.domain.count_upto(m_in);
        let nr = self.codomain.count_upto(m_out);
        if let Repr::Dense(m) = &self.repr {
            return m.view((0, 0), (nr, nc)).into_owned();
        }
        let mut out = DMatrix::zeros(nr, nc);
        let mut e = vec![C64::new(0.0, 0.0); self.domain.count()];
        for j in 0..nc {
            e[j] = C64::new(1.0, 0.0);
            let col = self.apply(&e);
            e[j] = C64::new(0.0, 0.0);
            for i in 0..nr {
                out[(i, j)] = col[i];
            }
        }
        out
    }

    /// Max |<u, A v> - <A* u, v>| over seeded random probes.
    pub fn adjointness_residual(&self, probes: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..probes {
            let u = linalg::random_vector(&mut rng, self.codomain.count());
            let v = linalg::random_vector(&mut rng, self.domain.count());
            let lhs = linalg::dot(&u, &self.apply(&v));
            let rhs = linalg::dot(&self.adjoint_apply(&u), &v);
            worst = worst.max((lhs - rhs).norm());
        }
        worst
    }
}

fn check_letter(basis: &WordBasis, k: usize) -> Result<()> {
    if k < 1 || k > basis.d() {
        return Err(Error::invalid("k", format!("letter {k} outside 1..={}", basis.d())));
    }
    Ok(())
}

/// Compression of `L_k`: `e_α ↦ e_{kα}`, top grade sent to zero.
pub fn left_shift(basis: &WordBasis, k: usize) -> Result<TruncatedOperator> {
    check_letter(basis, k)?;
    let one = C64::new(1.0, 0.0);
    let cols = (0..basis.count()).map(|i| {
        let (l, r) = (basis.len_of(i), basis.rank_of(i));
        basis
            .concat_index(1, k - 1, l, r)
            .map(|t| vec![(t, one)])
            .unwrap_or_default()
    });
    Ok(TruncatedOperator::from_columns(basis, basis, cols))
}

/// Compression of `R_k`: `e_α ↦ e_{αk}`, top grade sent to zero.
pub fn right_shift(basis: &WordBasis, k: usize) -> Result<TruncatedOperator> {
    check_letter(basis, k)?;
    let one = C64::new(1.0, 0.0);
    let cols = (0..basis.count()).map(|i| {
        let (l, r) = (basis.len_of(i), basis.rank_of(i));
        basis
            .concat_index(l, r, 1, k - 1)
            .map(|t| vec![(t, one)])
            .unwrap_or_default()
    });
    Ok(TruncatedOperator::from_columns(basis, basis, cols))
}

/// `U_t e_α = e_{α^t}`.
pub fn transpose_unitary(basis: &WordBasis) -> TruncatedOperator {
    let one = C64::new(1.0, 0.0);
    let cols = (0..basis.count()).map(|i| vec![(basis.transpose_index(i), one)]);
    TruncatedOperator::from_columns(basis, basis, cols)
}

/// Orthogonal projection onto words of length `<= m`.
pub fn grade_projection(basis: &WordBasis, m: usize) -> Result<TruncatedOperator> {
    if m > basis.grade() {
        return Err(Error::invalid(
            "M",
            format!("{m} exceeds truncation grade {}", basis.grade()),
        ));
    }
    let one = C64::new(1.0, 0.0);
    let keep = basis.count_upto(m);
    let cols = (0..basis.count()).map(|i| if i < keep { vec![(i, one)] } else { vec![] });
    Ok(TruncatedOperator::from_columns(basis, basis, cols))
}
