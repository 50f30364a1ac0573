//! NC measures stored as moment sequences `α ↦ μ(L^α)`.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::linalg;
use crate::series::{self, Evaluated, MatrixPoint, NCSeries};
use crate::words::{Word, WordBasis};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Moments `μ(L^α)` for all words of length `<= N`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentFunctional {
    basis: WordBasis,
    moments: Vec<C64>,
}

impl MomentFunctional {
    pub fn zeros(basis: &WordBasis) -> Self {
        MomentFunctional {
            basis: basis.clone(),
            moments: vec![ZERO; basis.count()],
        }
    }

    pub fn from_moments(basis: &WordBasis, moments: Vec<C64>) -> Result<Self> {
        if moments.len() != basis.count() {
            return Err(Error::invalid("moments", "length does not match basis count"));
        }
        Ok(MomentFunctional {
            basis: basis.clone(),
            moments,
        })
    }

    pub fn basis(&self) -> &WordBasis {
        &self.basis
    }

    pub fn moments(&self) -> &[C64] {
        &self.moments
    }

    pub fn get(&self, w: &Word) -> C64 {
        self.basis.index(w).map(|i| self.moments[i]).unwrap_or(ZERO)
    }

    /// `μ(I)`.
    pub fn mass(&self) -> f64 {
        self.moments[0].re
    }

    /// Restriction to words of length `<= m`.
    pub fn restrict(&self, m: usize) -> MomentFunctional {
        let basis = WordBasis::new(self.basis.d(), m.min(self.basis.grade())).expect("valid d");
        MomentFunctional {
            moments: self.moments[..basis.count()].to_vec(),
            basis,
        }
    }

    pub fn add(&self, other: &MomentFunctional) -> MomentFunctional {
        assert_eq!(self.basis, other.basis);
        let moments = self.moments.iter().zip(&other.moments).map(|(a, b)| a + b).collect();
        MomentFunctional {
            basis: self.basis.clone(),
            moments,
        }
    }

    pub fn sub(&self, other: &MomentFunctional) -> MomentFunctional {
        assert_eq!(self.basis, other.basis);
        let moments = self.moments.iter().zip(&other.moments).map(|(a, b)| a - b).collect();
        MomentFunctional {
            basis: self.basis.clone(),
            moments,
        }
    }

    pub fn scale(&self, c: f64) -> MomentFunctional {
        MomentFunctional {
            basis: self.basis.clone(),
            moments: self.moments.iter().map(|m| m * c).collect(),
        }
    }

    /// `Σ_γ u_γ μ(L^γ)`, the functional applied to the polynomial `u(L)`.
    pub fn apply_series(&self, u: &NCSeries) -> C64 {
        assert!(self.basis.contains(u.basis()) || u.basis().contains(&self.basis));
        let n = self.moments.len().min(u.coeffs().len());
        (0..n).map(|i| u.coeffs()[i] * self.moments[i]).sum()
    }

    /// `μ(L^{α*} L^β)` by the L-Toeplitz fill rule.
    pub fn pair(&self, a: usize, b: usize) -> C64 {
        let bs = &self.basis;
        let (la, ra, lb, rb) = (bs.len_of(a), bs.rank_of(a), bs.len_of(b), bs.rank_of(b));
        if lb >= la {
            // β = α γ ?
            let lg = lb - la;
            let p = bs.pow(lg);
            if rb / p == ra {
                return self.moments[bs.index_from(lg, rb % p)];
            }
        } else {
            let lg = la - lb;
            let p = bs.pow(lg);
            if ra / p == rb {
                return self.moments[bs.index_from(lg, ra % p)].conj();
            }
        }
        ZERO
    }

    pub fn read_csv(path: impl AsRef<Path>, d: usize) -> Result<MomentFunctional> {
        let entries = series::read_word_csv(path)?;
        if !entries.iter().any(|(w, _)| w.is_empty()) {
            return Err(Error::parse("moment file must contain the word \"e\""));
        }
        let n = entries.iter().map(|(w, _)| w.len()).max().unwrap_or(0);
        let basis = WordBasis::new(d, n)?;
        let mut m = Self::zeros(&basis);
        for (w, c) in entries {
            let i = basis
                .index(&w)
                .ok_or_else(|| Error::parse(format!("word {w} has a letter larger than d={d}")))?;
            m.moments[i] += c;
        }
        Ok(m)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        series::write_word_csv(path, &self.basis, &self.moments)
    }
}

/// The vacuum state `m(L^α) = δ_{α,∅}`.
pub fn nc_lebesgue(basis: &WordBasis) -> MomentFunctional {
    let mut m = MomentFunctional::zeros(basis);
    m.moments[0] = C64::new(1.0, 0.0);
    m
}

/// `m_x(L^α) = <x, L^α x>`.
pub fn vector_state(x: &FockVector) -> MomentFunctional {
    let b = x.basis();
    let xs = x.coeffs();
    let moments = (0..b.count())
        .map(|a| {
            let (la, ra) = (b.len_of(a), b.rank_of(a));
            (0..b.count_upto(b.grade() - la))
                .map(|j| {
                    let t = b.concat_index(la, ra, b.len_of(j), b.rank_of(j)).unwrap();
                    xs[t].conj() * xs[j]
                })
                .sum()
        })
        .collect();
    MomentFunctional {
        basis: b.clone(),
        moments,
    }
}

/// Hermitian Gram matrix `G[α,β] = μ(L^{α*} L^β)` with the null-space tolerance used for quotients.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub basis: WordBasis,
    pub g: DMatrix<C64>,
    pub null_tol: f64,
}

/// Gram matrix on all words of the functional's basis.
pub fn gram(mu: &MomentFunctional) -> GramMatrix {
    gram_upto(mu, mu.basis.grade())
}

/// Gram matrix on words of length `<= m`.
pub fn gram_upto(mu: &MomentFunctional, m: usize) -> GramMatrix {
    let basis = WordBasis::new(mu.basis.d(), m.min(mu.basis.grade())).expect("valid d");
    let n = basis.count();
    let g = DMatrix::from_fn(n, n, |a, b| mu.pair(a, b));
    GramMatrix {
        basis,
        g,
        null_tol: 1e-10,
    }
}

/// Positivity verdict at one truncation grade.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub grade: usize,
}

/// PSD test of the Gram matrix; only a necessary condition for positivity of `μ`.
pub fn is_positive(mu: &MomentFunctional, tol: f64) -> PositivityReport {
    let g = gram(mu);
    let ev = linalg::hermitian_eigenvalues(&g.g);
    let lo = ev.first().copied().unwrap_or(0.0);
    let hi = ev.last().copied().unwrap_or(0.0);
    PositivityReport {
        positive: lo >= -tol,
        min_eigenvalue: lo,
        max_eigenvalue: hi,
        grade: mu.basis.grade(),
    }
}

/// Clark measure of `B`: `μ(I) = Re H_∅`, `μ(L^α) = conj(H_{α^t})/2` with `H = (1-B)^{-1}(1+B)`.
pub fn clark_measure(b: &NCSeries) -> Result<MomentFunctional> {
    let h = series::cayley_to_herglotz(b)?;
    let bs = b.basis();
    let mut moments: Vec<C64> = (0..bs.count())
        .map(|i| h.coeffs()[bs.transpose_index(i)].conj() * 0.5)
        .collect();
    moments[0] = C64::new(h.coeffs()[0].re, 0.0);
    Ok(MomentFunctional {
        basis: bs.clone(),
        moments,
    })
}

/// Herglotz series of `μ`: `H_∅ = μ(I)`, `H_α = 2 conj(μ(L^{α^t}))`.
pub fn herglotz_transform(mu: &MomentFunctional) -> NCSeries {
    let bs = &mu.basis;
    let mut coeffs: Vec<C64> = (0..bs.count())
        .map(|i| mu.moments[bs.transpose_index(i)].conj() * 2.0)
        .collect();
    coeffs[0] = C64::new(mu.moments[0].re, 0.0);
    NCSeries::from_coeffs(bs, coeffs).expect("same basis")
}

/// `(id ⊗ μ)((I + ZL*)(I - ZL*)^{-1}) = μ(I) I + 2 Σ_{α≠∅} Z^α μ(L^{*α})`, with
/// `μ(L^{*α}) = conj μ(L^{α^t})`. Tail bound `2‖μ‖ ρ^{N+1}/(1-ρ)` with `‖μ‖ = μ(I)`.
pub fn herglotz_eval(mu: &MomentFunctional, z: &MatrixPoint) -> Result<Evaluated> {
    if z.d() != mu.basis.d() || !(z.row_norm() < 1.0) {
        return Err(Error::invalid("Z", "point must lie in the open row ball"));
    }
    let bs = &mu.basis;
    let lvl = z.level();
    let mut acc = DMatrix::<C64>::identity(lvl, lvl) * C64::new(mu.moments[0].re, 0.0);
    // Z^α built by prepending letters, so the moment index is read from the reversed word.
    let mut stack: Vec<(usize, usize, usize, DMatrix<C64>)> = vec![(0, 0, 0, DMatrix::identity(lvl, lvl))];
    while let Some((len, rank, trank, p)) = stack.pop() {
        if len > 0 {
            let m = mu.moments[bs.index_from(len, trank)].conj();
            acc += &p * (m * 2.0);
        }
        if len == bs.grade() {
            continue;
        }
        for (k, zk) in z.mats().iter().enumerate() {
            // word α k: rank extends on the right, transpose rank extends on the left
            stack.push((len + 1, rank * bs.d() + k, k * bs.pow(len) + trank, &p * zk));
        }
    }
    let rho = z.row_norm();
    let tail = 2.0 * mu.mass().abs() * rho.powi(bs.grade() as i32 + 1) / (1.0 - rho);
    Ok(Evaluated {
        value: acc,
        tail_bound: tail,
    })
}

/// Free Cauchy transform `(C_μ p)(Z) = Σ_α Z^α μ(L^{α*} p(L))`.
pub fn cauchy_transform(mu: &MomentFunctional, p: &FockVector, z: &MatrixPoint) -> Result<Evaluated> {
    if p.basis().d() != mu.basis.d() {
        return Err(Error::invalid("p", "alphabet size differs from the measure"));
    }
    let coeffs = cauchy_coefficients(mu, p);
    let s = NCSeries::from_coeffs(&mu.basis, coeffs)?;
    series::evaluate(&s, z)
}

/// `<L^α, p>_μ` for every word `α` of the measure's basis.
pub fn cauchy_coefficients(mu: &MomentFunctional, p: &FockVector) -> Vec<C64> {
    let bs = &mu.basis;
    let pb = p.basis();
    let terms: Vec<(usize, C64)> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(j, c)| **c != ZERO && pb.len_of(*j) <= bs.grade())
        .map(|(j, &c)| (bs.index_from(pb.len_of(j), pb.rank_of(j)), c))
        .collect();
    (0..bs.count())
        .map(|a| terms.iter().map(|&(b, c)| mu.pair(a, b) * c).sum())
        .collect()
}

/// The left regular representation on the GNS quotient `ℂ{𝔷}/N_μ`.
///
/// `Π_k` is only defined on classes with representatives of grade `<= N-1`, so it maps
/// the grade-`(N-1)` quotient into the grade-`N` quotient.
#[derive(Clone, Debug)]
pub struct GnsRepresentation {
    /// Rank of the grade-`N` quotient.
    pub rank: usize,
    /// `rank × count(N)` map sending a polynomial to its quotient coordinates (isometric for `<·,·>_μ`).
    pub coords: DMatrix<C64>,
    /// Same for polynomials of grade `<= N-1`.
    pub coords_inner: DMatrix<C64>,
    /// `Π_k` from inner to full quotient coordinates.
    pub pi: DMatrix<C64>,
    /// `‖Π_k* Π_k - I‖`.
    pub isometry_residual: f64,
}

struct Quotient {
    coords: DMatrix<C64>,
    reps: DMatrix<C64>,
}

fn quotient(h: &DMatrix<C64>, null_tol: f64) -> Result<Quotient> {
    let eig = h.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let cutoff = null_tol * lmax.max(f64::MIN_POSITIVE);
    if lmin < -cutoff.max(1e-12) {
        return Err(Error::NotPositive {
            min_eig: lmin,
            tol: cutoff,
        });
    }
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > cutoff)
        .collect();
    let n = h.nrows();
    let mut coords = DMatrix::<C64>::zeros(keep.len(), n);
    let mut reps = DMatrix::<C64>::zeros(n, keep.len());
    for (row, &i) in keep.iter().enumerate() {
        let s = eig.eigenvalues[i].sqrt();
        for j in 0..n {
            let v = eig.eigenvectors[(j, i)];
            coords[(row, j)] = v.conj() * s;
            reps[(j, row)] = v / s;
        }
    }
    Ok(Quotient { coords, reps })
}

/// `Π_k [a] = [L_k a]` on the quotient by the numerical null space of `G`.
pub fn gns_isometry(g: &GramMatrix, k: usize) -> Result<GnsRepresentation> {
    let bs = &g.basis;
    if k < 1 || k > bs.d() {
        return Err(Error::invalid("k", format!("letter {k} outside 1..={}", bs.d())));
    }
    if bs.grade() == 0 {
        return Err(Error::invalid("N", "GNS shifts need grade >= 1"));
    }
    let h = linalg::hermitian_part(&g.g);
    let top = bs.count_upto(bs.grade() - 1);
    let full = quotient(&h, g.null_tol)?;
    let inner = quotient(&h.view((0, 0), (top, top)).into_owned(), g.null_tol)?;
    let lk = crate::fock::left_shift(bs, k)?.to_dense();
    let lk_inner = lk.columns(0, top).into_owned();
    let pi = &full.coords * lk_inner * &inner.reps;
    let r = pi.ncols();
    let defect = pi.adjoint() * &pi - DMatrix::<C64>::identity(r, r);
    Ok(GnsRepresentation {
        rank: full.coords.nrows(),
        coords: full.coords,
        coords_inner: inner.coords,
        pi,
        isometry_residual: linalg::hermitian_norm(&defect),
    })
}

/// `u` with `p(L)* p(L) = u(L) + u(L)*`: `u_γ = Σ_α conj(p_α) p_{αγ}`, `u_∅ = ½ Σ |p_α|²`.
pub fn sos_split(p: &FockVector) -> NCSeries {
    let b = p.basis();
    let pc = p.coeffs();
    let mut u = vec![ZERO; b.count()];
    for (a, &pa) in pc.iter().enumerate() {
        if pa == ZERO {
            continue;
        }
        let (la, ra) = (b.len_of(a), b.rank_of(a));
        for (g, slot) in u.iter_mut().enumerate().take(b.count_upto(b.grade() - la)).skip(1) {
            let t = b.concat_index(la, ra, b.len_of(g), b.rank_of(g)).unwrap();
            *slot += pa.conj() * pc[t];
        }
    }
    u[0] = C64::new(0.5 * pc.iter().map(|x| x.norm_sqr()).sum::<f64>(), 0.0);
    NCSeries::from_coeffs(b, u).expect("same basis")
}
