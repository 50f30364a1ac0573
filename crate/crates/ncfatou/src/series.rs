//! Truncated NC power series `f(Z) = Σ f_α Z^α`: algebra, evaluation on the row ball,
//! multiplier operators, Cayley transforms and the NC Szegő / Herglotz / de Branges–Rovnyak kernels.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::TruncatedOperator;
use crate::words::{Word, WordBasis};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Coefficients `f_α` for all words of length `<= N`. Exact grade by grade.
#[derive(Clone, Debug, PartialEq)]
pub struct NCSeries {
    basis: WordBasis,
    coeffs: Vec<C64>,
}

/// A nonzero coefficient located by the (length, rank) coordinates of its word.
#[derive(Clone, Copy, Debug)]
pub struct Term {
    pub len: usize,
    pub rank: usize,
    pub coeff: C64,
}

impl NCSeries {
    pub fn zeros(basis: &WordBasis) -> Self {
        NCSeries {
            basis: basis.clone(),
            coeffs: vec![ZERO; basis.count()],
        }
    }

    pub fn constant(basis: &WordBasis, c: C64) -> Self {
        let mut s = Self::zeros(basis);
        s.coeffs[0] = c;
        s
    }

    pub fn one(basis: &WordBasis) -> Self {
        Self::constant(basis, ONE)
    }

    /// The coordinate function `𝔷_k`.
    pub fn variable(basis: &WordBasis, k: usize) -> Result<Self> {
        Self::from_terms(basis, &[(Word::letter(k as u32), ONE)])
    }

    pub fn from_terms(basis: &WordBasis, terms: &[(Word, C64)]) -> Result<Self> {
        let mut s = Self::zeros(basis);
        for (w, c) in terms {
            let i = basis
                .index(w)
                .ok_or_else(|| Error::invalid("word", format!("{w} is outside the basis")))?;
            s.coeffs[i] += *c;
        }
        Ok(s)
    }

    pub fn from_coeffs(basis: &WordBasis, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != basis.count() {
            return Err(Error::invalid("coeffs", "length does not match basis count"));
        }
        Ok(NCSeries {
            basis: basis.clone(),
            coeffs,
        })
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

    pub fn get(&self, w: &Word) -> C64 {
        self.basis.index(w).map(|i| self.coeffs[i]).unwrap_or(ZERO)
    }

    pub fn set(&mut self, w: &Word, c: C64) -> Result<()> {
        let i = self
            .basis
            .index(w)
            .ok_or_else(|| Error::invalid("word", format!("{w} is outside the basis")))?;
        self.coeffs[i] = c;
        Ok(())
    }

    pub fn constant_term(&self) -> C64 {
        self.coeffs[0]
    }

    /// ℓ² norm of the coefficients, i.e. the Fock-space norm of `f(L)1`.
    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.coeffs)
    }

    /// Same series viewed at another truncation grade (extra coefficients are zero).
    pub fn with_grade(&self, n: usize) -> NCSeries {
        let basis = WordBasis::new(self.basis.d(), n).expect("d already validated");
        let keep = basis.count().min(self.basis.count());
        let mut coeffs = vec![ZERO; basis.count()];
        coeffs[..keep].copy_from_slice(&self.coeffs[..keep]);
        NCSeries { basis, coeffs }
    }

    /// Zeroes coefficients with modulus `<= floor * max|f_α|`.
    pub fn trimmed(&self, floor: f64) -> NCSeries {
        let m = crate::linalg::max_abs(&self.coeffs);
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            if c.norm() <= floor * m {
                *c = ZERO;
            }
        }
        out
    }

    /// Largest word length carrying a nonzero coefficient (0 for the zero series).
    pub fn degree(&self) -> usize {
        (0..self.coeffs.len())
            .rev()
            .find(|&i| self.coeffs[i] != ZERO)
            .map(|i| self.basis.len_of(i))
            .unwrap_or(0)
    }

    pub fn terms(&self) -> Vec<Term> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(i, &coeff)| Term {
                len: self.basis.len_of(i),
                rank: self.basis.rank_of(i),
                coeff,
            })
            .collect()
    }

    pub fn add(&self, other: &NCSeries) -> NCSeries {
        self.combine(ONE, other, ONE)
    }

    pub fn sub(&self, other: &NCSeries) -> NCSeries {
        self.combine(ONE, other, -ONE)
    }

    pub fn scale(&self, c: C64) -> NCSeries {
        NCSeries {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    fn combine(&self, a: C64, other: &NCSeries, b: C64) -> NCSeries {
        assert_eq!(self.basis, other.basis, "series bases differ");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| a * x + b * y)
            .collect();
        NCSeries {
            basis: self.basis.clone(),
            coeffs,
        }
    }

    pub fn max_diff(&self, other: &NCSeries) -> f64 {
        assert_eq!(self.basis, other.basis, "series bases differ");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn read_csv(path: impl AsRef<Path>, d: usize) -> Result<NCSeries> {
        let entries = read_word_csv(path)?;
        let n = entries.iter().map(|(w, _)| w.len()).max().unwrap_or(0);
        let basis = WordBasis::new(d, n)?;
        let mut s = Self::zeros(&basis);
        for (w, c) in entries {
            let i = basis
                .index(&w)
                .ok_or_else(|| Error::parse(format!("word {w} has a letter larger than d={d}")))?;
            s.coeffs[i] += c;
        }
        Ok(s)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_word_csv(path, &self.basis, &self.coeffs)
    }
}

/// Reads a `word,re,im` table.
pub(crate) fn read_word_csv(path: impl AsRef<Path>) -> Result<Vec<(Word, C64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["word", "re", "im"] {
        return Err(Error::parse(format!("expected header word,re,im, found {headers:?}")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let w: Word = rec[0].parse()?;
        let re: f64 = rec[1]
            .parse()
            .map_err(|_| Error::parse(format!("bad re {:?}", &rec[1])))?;
        let im: f64 = rec[2]
            .parse()
            .map_err(|_| Error::parse(format!("bad im {:?}", &rec[2])))?;
        out.push((w, C64::new(re, im)));
    }
    Ok(out)
}

pub(crate) fn write_word_csv(path: impl AsRef<Path>, basis: &WordBasis, coeffs: &[C64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["word", "re", "im"])?;
    for (i, c) in coeffs.iter().enumerate() {
        w.write_record([basis.word(i).to_string(), format!("{:e}", c.re), format!("{:e}", c.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Graded Cauchy product `(fg)_w = Σ_{w=uv} f_u g_v`, exact through grade N.
pub fn multiply(f: &NCSeries, g: &NCSeries) -> NCSeries {
    assert_eq!(f.basis, g.basis, "series bases differ");
    let b = &f.basis;
    let mut out = NCSeries::zeros(b);
    for t in f.terms() {
        let top = b.count_upto(b.grade() - t.len);
        for (j, &gv) in g.coeffs[..top].iter().enumerate() {
            if gv == ZERO {
                continue;
            }
            let (lv, rv) = (b.len_of(j), b.rank_of(j));
            let k = b.concat_index(t.len, t.rank, lv, rv).expect("fits by construction");
            out.coeffs[k] += t.coeff * gv;
        }
    }
    out
}

/// Inverse in the ring of truncated series. Requires `f_∅ != 0`.
pub fn invert(f: &NCSeries) -> Result<NCSeries> {
    let f0 = f.coeffs[0];
    if f0 == ZERO {
        return Err(Error::Germ("constant term is zero; series is not invertible".into()));
    }
    let b = &f.basis;
    let inv0 = ONE / f0;
    let mut g = NCSeries::zeros(b);
    g.coeffs[0] = inv0;
    for idx in 1..b.count() {
        let (len, rank) = (b.len_of(idx), b.rank_of(idx));
        let mut s = ZERO;
        // w = u v with u a nonempty prefix
        for lu in 1..=len {
            let lv = len - lu;
            let pv = b.pow(lv);
            let fu = f.coeffs[b.index_from(lu, rank / pv)];
            if fu != ZERO {
                s += fu * g.coeffs[b.index_from(lv, rank % pv)];
            }
        }
        g.coeffs[idx] = -s * inv0;
    }
    Ok(g)
}

/// `H_B = (1 - B)^{-1}(1 + B)`.
pub fn cayley_to_herglotz(b: &NCSeries) -> Result<NCSeries> {
    let b0 = b.coeffs[0];
    if !(b0.norm() < 1.0) {
        return Err(Error::Germ(format!("|B(0)| = {} is not < 1", b0.norm())));
    }
    let one = NCSeries::one(&b.basis);
    Ok(multiply(&invert(&one.sub(b))?, &one.add(b)))
}

/// `B_H = (H + 1)^{-1}(H - 1)`.
pub fn cayley_to_schur(h: &NCSeries) -> Result<NCSeries> {
    let h0 = h.coeffs[0];
    if !(h0.re > -1.0) {
        return Err(Error::Germ(format!("Re H(0) = {} is not > -1", h0.re)));
    }
    let one = NCSeries::one(&h.basis);
    Ok(multiply(&invert(&h.add(&one))?, &h.sub(&one)))
}

/// Coefficients scaled by `r^{|α|}`, i.e. `z ↦ f(rz)`.
pub fn radial_scale(f: &NCSeries, r: f64) -> Result<NCSeries> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid("r", format!("{r} is not in (0, 1)")));
    }
    Ok(radial_scale_unchecked(f, r))
}

pub(crate) fn radial_scale_unchecked(f: &NCSeries, r: f64) -> NCSeries {
    let b = &f.basis;
    let mut out = f.clone();
    let mut rk = 1.0;
    for k in 0..=b.grade() {
        for c in &mut out.coeffs[b.offset(k)..b.offset(k + 1)] {
            *c *= rk;
        }
        rk *= r;
    }
    out
}

/// `F^t(Z) = Σ F_{α^t} Z^α`.
pub fn transpose_conjugate(f: &NCSeries) -> NCSeries {
    let b = &f.basis;
    let coeffs = (0..b.count()).map(|i| f.coeffs[b.transpose_index(i)]).collect();
    NCSeries {
        basis: b.clone(),
        coeffs,
    }
}

/// `M^L_f e_β = Σ f_α e_{αβ}` compressed to the series' own basis.
pub fn left_multiplier(f: &NCSeries) -> TruncatedOperator {
    left_multiplier_between(f, &f.basis, &f.basis)
}

/// Right multiplication `h ↦ h f`: `e_β ↦ Σ f_α e_{βα}`, compressed to the series' basis.
/// Equals `U_t · left_multiplier(transpose_conjugate(f)) · U_t`.
pub fn right_multiplier(f: &NCSeries) -> TruncatedOperator {
    right_multiplier_between(f, &f.basis, &f.basis)
}

fn check_same_d(f: &NCSeries, a: &WordBasis, b: &WordBasis) {
    assert!(f.basis.d() == a.d() && a.d() == b.d(), "alphabet sizes differ");
}

/// Left multiplier from `domain` into `codomain`; terms landing above the codomain grade are dropped.
pub fn left_multiplier_between(f: &NCSeries, domain: &WordBasis, codomain: &WordBasis) -> TruncatedOperator {
    check_same_d(f, domain, codomain);
    let terms = f.terms();
    let cols = (0..domain.count()).map(|j| {
        let (lb, rb) = (domain.len_of(j), domain.rank_of(j));
        terms
            .iter()
            .filter_map(|t| codomain.concat_index(t.len, t.rank, lb, rb).map(|i| (i, t.coeff)))
            .collect()
    });
    TruncatedOperator::from_columns(domain, codomain, cols)
}

/// Right multiplier from `domain` into `codomain`; terms landing above the codomain grade are dropped.
pub fn right_multiplier_between(f: &NCSeries, domain: &WordBasis, codomain: &WordBasis) -> TruncatedOperator {
    check_same_d(f, domain, codomain);
    let terms = f.terms();
    let cols = (0..domain.count()).map(|j| {
        let (lb, rb) = (domain.len_of(j), domain.rank_of(j));
        terms
            .iter()
            .filter_map(|t| codomain.concat_index(lb, rb, t.len, t.rank).map(|i| (i, t.coeff)))
            .collect()
    });
    TruncatedOperator::from_columns(domain, codomain, cols)
}

/// A `d`-tuple of `n × n` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPoint {
    mats: Vec<DMatrix<C64>>,
    row_norm: f64,
}

impl MatrixPoint {
    pub fn new(mats: Vec<DMatrix<C64>>) -> Result<Self> {
        let n = mats
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| Error::invalid("Z", "empty tuple"))?;
        if mats.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::invalid("Z", "all entries must be square of the same size"));
        }
        let mut s = DMatrix::<C64>::zeros(n, n);
        for m in &mats {
            s += m * m.adjoint();
        }
        let top = crate::linalg::hermitian_eigenvalues(&s).last().copied().unwrap_or(0.0);
        Ok(MatrixPoint {
            mats,
            row_norm: top.max(0.0).sqrt(),
        })
    }

    pub fn scalar(zs: &[C64]) -> Result<Self> {
        Self::new(zs.iter().map(|&z| DMatrix::from_element(1, 1, z)).collect())
    }

    pub fn zero(d: usize, n: usize) -> Self {
        MatrixPoint {
            mats: vec![DMatrix::zeros(n, n); d],
            row_norm: 0.0,
        }
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &MatrixPoint) -> Result<Self> {
        let (n, m) = (self.level(), other.level());
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| {
                let mut z = DMatrix::zeros(n + m, n + m);
                z.view_mut((0, 0), (n, n)).copy_from(a);
                z.view_mut((n, n), (m, m)).copy_from(b);
                z
            })
            .collect();
        Self::new(mats)
    }

    pub fn scaled(&self, r: f64) -> MatrixPoint {
        MatrixPoint {
            mats: self.mats.iter().map(|m| m * C64::new(r, 0.0)).collect(),
            row_norm: self.row_norm * r,
        }
    }

    pub fn mats(&self) -> &[DMatrix<C64>] {
        &self.mats
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn level(&self) -> usize {
        self.mats[0].nrows()
    }

    /// `‖Z_1 Z_1* + ⋯ + Z_d Z_d*‖^{1/2}`.
    pub fn row_norm(&self) -> f64 {
        self.row_norm
    }

    fn check_ball(&self, d: usize, what: &str) -> Result<()> {
        if self.d() != d {
            return Err(Error::invalid(
                what,
                format!("point has {} entries, expected {d}", self.d()),
            ));
        }
        if !(self.row_norm < 1.0) {
            return Err(Error::invalid(what, format!("row norm {} is not < 1", self.row_norm)));
        }
        Ok(())
    }
}

/// A matrix value together with a bound on the neglected tail of the series.
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub value: DMatrix<C64>,
    pub tail_bound: f64,
}

/// Depth-first walk over all words of length `<= n`, carrying `Z^w`.
fn walk_powers(z: &MatrixPoint, n: usize, visit: &mut dyn FnMut(usize, usize, &DMatrix<C64>)) {
    fn rec(
        z: &MatrixPoint,
        n: usize,
        len: usize,
        rank: usize,
        p: &DMatrix<C64>,
        visit: &mut dyn FnMut(usize, usize, &DMatrix<C64>),
    ) {
        visit(len, rank, p);
        if len == n {
            return;
        }
        for (k, zk) in z.mats.iter().enumerate() {
            rec(z, n, len + 1, rank * z.d() + k, &(p * zk), visit);
        }
    }
    let lvl = z.level();
    rec(z, n, 0, 0, &DMatrix::identity(lvl, lvl), visit);
}

/// `Σ_{|α|<=N} f_α Z^α` with tail bound `‖f‖ ρ^{N+1} (1-ρ²)^{-1/2}`.
pub fn evaluate(f: &NCSeries, z: &MatrixPoint) -> Result<Evaluated> {
    z.check_ball(f.basis.d(), "Z")?;
    let b = &f.basis;
    let lvl = z.level();
    let mut acc = DMatrix::<C64>::zeros(lvl, lvl);
    walk_powers(z, b.grade(), &mut |len, rank, p| {
        let c = f.coeffs[b.index_from(len, rank)];
        if c != ZERO {
            acc += p * c;
        }
    });
    let rho = z.row_norm;
    let tail = f.norm() * rho.powi(b.grade() as i32 + 1) / (1.0 - rho * rho).sqrt();
    Ok(Evaluated {
        value: acc,
        tail_bound: tail,
    })
}

/// `K(Z,W)[P] = Σ_{|α|<=n} Z^α P W^{α*}`, tail bounded by `‖P‖ (ρ_Z ρ_W)^{n+1} / (1 - ρ_Z ρ_W)`.
pub fn szego_kernel(z: &MatrixPoint, w: &MatrixPoint, p: &DMatrix<C64>, n: usize) -> Result<Evaluated> {
    z.check_ball(w.d(), "Z")?;
    w.check_ball(z.d(), "W")?;
    if p.nrows() != z.level() || p.ncols() != w.level() {
        return Err(Error::invalid("P", "shape must be level(Z) x level(W)"));
    }
    let mut wpows: Vec<DMatrix<C64>> = Vec::new();
    let wb = WordBasis::new(w.d(), n)?;
    wpows.resize(wb.count(), DMatrix::zeros(0, 0));
    walk_powers(w, n, &mut |len, rank, m| wpows[wb.index_from(len, rank)] = m.adjoint());
    let mut acc = DMatrix::<C64>::zeros(z.level(), w.level());
    walk_powers(z, n, &mut |len, rank, m| {
        acc += m * p * &wpows[wb.index_from(len, rank)];
    });
    let q = z.row_norm * w.row_norm;
    let pn = p.singular_values().iter().cloned().fold(0.0, f64::max);
    Ok(Evaluated {
        value: acc,
        tail_bound: pn * q.powi(n as i32 + 1) / (1.0 - q),
    })
}

/// Choi matrix `Σ_{|α|<=n} vec(Z^α) vec(Z^α)*` of `P ↦ K(Z,Z)[P]`, with column-major `vec`.
/// The map is completely positive exactly when this matrix is PSD.
pub fn szego_choi_matrix(z: &MatrixPoint, n: usize) -> Result<DMatrix<C64>> {
    z.check_ball(z.d(), "Z")?;
    let lvl = z.level();
    let mut acc = DMatrix::<C64>::zeros(lvl * lvl, lvl * lvl);
    walk_powers(z, n, &mut |_, _, m| {
        let v = nalgebra::DVector::from_column_slice(m.as_slice());
        acc += &v * v.adjoint();
    });
    Ok(acc)
}

/// `K^H(Z,W)[P] = ½ K(Z,W)[H(Z)P + P H(W)*]`, truncated at the grade of `H`.
pub fn herglotz_kernel(h: &NCSeries, z: &MatrixPoint, w: &MatrixPoint, p: &DMatrix<C64>) -> Result<Evaluated> {
    let hz = evaluate(h, z)?;
    let hw = evaluate(h, w)?;
    let arg = (&hz.value * p + p * hw.value.adjoint()) * C64::new(0.5, 0.0);
    let k = szego_kernel(z, w, &arg, h.basis.grade())?;
    let q = z.row_norm * w.row_norm;
    let pn = p.singular_values().iter().cloned().fold(0.0, f64::max);
    let tail = k.tail_bound + 0.5 * pn * (hz.tail_bound + hw.tail_bound) / (1.0 - q);
    Ok(Evaluated {
        value: k.value,
        tail_bound: tail,
    })
}

/// `K^B(Z,W)[P] = K(Z,W)[P] - K(Z,W)[B(Z) P B(W)*]`, truncated at the grade of `B`.
pub fn dbr_kernel(b: &NCSeries, z: &MatrixPoint, w: &MatrixPoint, p: &DMatrix<C64>) -> Result<Evaluated> {
    let bz = evaluate(b, z)?;
    let bw = evaluate(b, w)?;
    let arg = p - &bz.value * p * bw.value.adjoint();
    let k = szego_kernel(z, w, &arg, b.basis.grade())?;
    Ok(Evaluated {
        value: k.value,
        tail_bound: k.tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::transpose_unitary;
    use crate::words::enumerate;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn multiplier_examples() {
        let b = enumerate(2, 3).unwrap();
        let z1 = NCSeries::variable(&b, 1).unwrap();
        let l1 = crate::fock::left_shift(&b, 1).unwrap();
        assert_eq!(left_multiplier(&z1).to_dense(), l1.to_dense());
        let one = NCSeries::one(&b);
        assert_eq!(
            left_multiplier(&one).to_dense(),
            DMatrix::identity(b.count(), b.count())
        );
    }

    #[test]
    fn right_multiplier_is_conjugated_left_multiplier_of_transpose() {
        let b = enumerate(2, 4).unwrap();
        let f = NCSeries::from_terms(
            &b,
            &[(w("e"), c(0.3)), (w("12"), c(1.0)), (w("211"), C64::new(0.0, 2.0))],
        )
        .unwrap();
        let u = transpose_unitary(&b);
        let lhs = right_multiplier(&f).to_dense();
        let rhs = u
            .compose(&left_multiplier(&transpose_conjugate(&f)))
            .compose(&u)
            .to_dense();
        assert!(crate::linalg::max_entry(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn invert_geometric_series() {
        let b = enumerate(1, 10).unwrap();
        let f = NCSeries::one(&b).sub(&NCSeries::variable(&b, 1).unwrap());
        let g = invert(&f).unwrap();
        assert!(g.coeffs().iter().all(|x| (*x - c(1.0)).norm() < 1e-15));
        assert!(invert(&NCSeries::variable(&b, 1).unwrap()).is_err());
    }

    #[test]
    fn multiply_is_noncommutative() {
        let b = enumerate(2, 2).unwrap();
        let z1 = NCSeries::variable(&b, 1).unwrap();
        let z2 = NCSeries::variable(&b, 2).unwrap();
        let a = multiply(&z1, &z2);
        assert_eq!(a.get(&w("12")), c(1.0));
        assert_eq!(a.get(&w("21")), c(0.0));
        assert_ne!(a, multiply(&z2, &z1));
    }

    #[test]
    fn cayley_examples() {
        let b = enumerate(2, 3).unwrap();
        let h = cayley_to_herglotz(&NCSeries::zeros(&b)).unwrap();
        assert_eq!(h, NCSeries::one(&b));

        let b1 = enumerate(1, 8).unwrap();
        let h = cayley_to_herglotz(&NCSeries::variable(&b1, 1).unwrap()).unwrap();
        assert_eq!(h.coeffs()[0], c(1.0));
        assert!(h.coeffs()[1..].iter().all(|x| (*x - c(2.0)).norm() < 1e-14));

        assert!(cayley_to_herglotz(&NCSeries::constant(&b1, c(1.0))).is_err());
        assert!(cayley_to_schur(&NCSeries::constant(&b1, c(-1.0))).is_err());
    }

    #[test]
    fn radial_scale_examples() {
        let b = enumerate(1, 4).unwrap();
        let k = NCSeries::constant(&b, c(3.0));
        assert_eq!(radial_scale(&k, 0.3).unwrap(), k);
        let z = NCSeries::variable(&b, 1).unwrap();
        assert_eq!(radial_scale(&z, 0.5).unwrap().get(&w("1")), c(0.5));
        assert!(radial_scale(&z, 1.0).is_err());
        assert!(radial_scale(&z, 0.0).is_err());
    }

    #[test]
    fn transpose_conjugate_examples() {
        let b = enumerate(2, 2).unwrap();
        let f = NCSeries::from_terms(&b, &[(w("12"), c(1.0))]).unwrap();
        assert_eq!(
            transpose_conjugate(&f),
            NCSeries::from_terms(&b, &[(w("21"), c(1.0))]).unwrap()
        );
        let b1 = enumerate(1, 5).unwrap();
        let g = NCSeries::from_coeffs(&b1, (0..6).map(|k| c(k as f64)).collect()).unwrap();
        assert_eq!(transpose_conjugate(&g), g);
    }

    #[test]
    fn evaluate_examples() {
        let b = enumerate(2, 3).unwrap();
        let f = NCSeries::one(&b).add(&NCSeries::variable(&b, 1).unwrap());
        let e = evaluate(&f, &MatrixPoint::zero(2, 3)).unwrap();
        assert_eq!(e.value, DMatrix::identity(3, 3));

        let b1 = enumerate(1, 40).unwrap();
        let geo = NCSeries::from_coeffs(&b1, vec![c(1.0); 41]).unwrap();
        let e = evaluate(&geo, &MatrixPoint::scalar(&[c(0.5)]).unwrap()).unwrap();
        assert!((e.value[(0, 0)] - c(2.0)).norm() <= e.tail_bound + 1e-14);

        assert!(evaluate(&geo, &MatrixPoint::scalar(&[c(1.0)]).unwrap()).is_err());
    }

    #[test]
    fn szego_examples() {
        let z = MatrixPoint::zero(2, 2);
        let p = DMatrix::from_fn(2, 2, |i, j| C64::new(i as f64, j as f64));
        assert_eq!(szego_kernel(&z, &z, &p, 5).unwrap().value, p);

        let (a, bb) = (C64::new(0.3, 0.2), C64::new(-0.1, 0.5));
        let zs = MatrixPoint::scalar(&[a]).unwrap();
        let ws = MatrixPoint::scalar(&[bb]).unwrap();
        let one = DMatrix::from_element(1, 1, c(1.0));
        let k = szego_kernel(&zs, &ws, &one, 40).unwrap();
        let exact = c(1.0) / (c(1.0) - a * bb.conj());
        assert!((k.value[(0, 0)] - exact).norm() <= k.tail_bound + 1e-14);
    }
}
