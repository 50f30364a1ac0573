//! Radial operators `T_r = Re H_B(rR)`, their regularized resolvents, and the coupled
//! `(r, N)` limit that recovers the Radon–Nikodym compression `T` and the split `μ = μ_ac + μ_s`.
//!
//! Operators of the form `F(R)` never lower the grade, so `P_N F(R) P_N` composes
//! exactly: the truncated `T_r` is the exact compression of the full one. Truncation
//! error therefore enters only through the resolvent `(εI + T_r)^{-1}`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, BandCholesky, CgReport};
use crate::measure::{self, MomentFunctional, PositivityReport};
use crate::series::{self, NCSeries, Term};
use crate::words::WordBasis;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Bases up to this size are assembled densely in [`SolverMode::Auto`].
pub const DENSE_LIMIT: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMode {
    /// Dense for small bases, banded for `d = 1`, matrix-free otherwise.
    Auto,
    Dense,
    /// Banded direct solve, `d = 1` only.
    Banded,
    /// Conjugate gradients with matrix-free `T_r`.
    MatrixFree,
}

/// `T_r = ½(H(rR) + H(rR)*)` with `H = (I - B)^{-1}(I + B)` on a truncated basis.
///
/// `B(rR)` is right multiplication by the radially scaled transpose `(B^t)_r`.
#[derive(Clone, Debug)]
pub struct RadialOperator {
    basis: WordBasis,
    b: NCSeries,
    r: f64,
    c0: C64,
    terms: Vec<Term>,
}

impl RadialOperator {
    pub fn new(b: &NCSeries, r: f64, basis: &WordBasis) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::invalid("r", format!("{r} is not in (0, 1)")));
        }
        if b.basis().d() != basis.d() {
            return Err(Error::invalid("B", "alphabet size differs from the basis"));
        }
        let c0 = b.constant_term();
        if !(c0.norm() < 1.0) {
            return Err(Error::Germ(format!("|B(0)| = {} is not < 1", c0.norm())));
        }
        let c = series::radial_scale_unchecked(&series::transpose_conjugate(b), r);
        let terms = c
            .terms()
            .into_iter()
            .filter(|t| t.len > 0 && t.len <= basis.grade())
            .collect();
        Ok(RadialOperator {
            basis: basis.clone(),
            b: b.clone(),
            r,
            c0,
            terms,
        })
    }

    pub fn basis(&self) -> &WordBasis {
        &self.basis
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn schur(&self) -> &NCSeries {
        &self.b
    }

    /// `B(rR) v`.
    pub fn b_apply(&self, v: &[C64]) -> Vec<C64> {
        let bs = &self.basis;
        let mut out: Vec<C64> = v.iter().map(|x| x * self.c0).collect();
        for (j, &x) in v.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            let (l, rk) = (bs.len_of(j), bs.rank_of(j));
            for t in &self.terms {
                if let Some(i) = bs.concat_index(l, rk, t.len, t.rank) {
                    out[i] += t.coeff * x;
                }
            }
        }
        out
    }

    /// `B(rR)* v`.
    pub fn b_adjoint_apply(&self, v: &[C64]) -> Vec<C64> {
        let bs = &self.basis;
        let c0 = self.c0.conj();
        (0..bs.count())
            .map(|j| {
                let (l, rk) = (bs.len_of(j), bs.rank_of(j));
                let mut s = c0 * v[j];
                for t in &self.terms {
                    if let Some(i) = bs.concat_index(l, rk, t.len, t.rank) {
                        s += t.coeff.conj() * v[i];
                    }
                }
                s
            })
            .collect()
    }

    /// `(I - B(rR))^{-1} v` by one forward sweep in graded order.
    pub fn solve_lower(&self, v: &[C64]) -> Vec<C64> {
        let bs = &self.basis;
        let inv = ONE / (ONE - self.c0);
        let mut x = vec![ZERO; v.len()];
        for w in 0..bs.count() {
            let (l, rk) = (bs.len_of(w), bs.rank_of(w));
            let mut s = v[w];
            for t in &self.terms {
                if t.len > l {
                    continue;
                }
                let p = bs.pow(t.len);
                if rk % p == t.rank {
                    s += t.coeff * x[bs.index_from(l - t.len, rk / p)];
                }
            }
            x[w] = s * inv;
        }
        x
    }

    /// `(I - B(rR))^{-*} v` by one backward sweep.
    pub fn solve_upper_adjoint(&self, v: &[C64]) -> Vec<C64> {
        let bs = &self.basis;
        let inv = ONE / (ONE - self.c0.conj());
        let mut y = vec![ZERO; v.len()];
        for j in (0..bs.count()).rev() {
            let (l, rk) = (bs.len_of(j), bs.rank_of(j));
            let mut s = v[j];
            for t in &self.terms {
                if let Some(i) = bs.concat_index(l, rk, t.len, t.rank) {
                    s += t.coeff.conj() * y[i];
                }
            }
            y[j] = s * inv;
        }
        y
    }

    /// `H(rR) v`.
    pub fn h_apply(&self, v: &[C64]) -> Vec<C64> {
        let mut rhs = self.b_apply(v);
        rhs.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        self.solve_lower(&rhs)
    }

    /// `H(rR)* v`.
    pub fn h_adjoint_apply(&self, v: &[C64]) -> Vec<C64> {
        let y = self.solve_upper_adjoint(v);
        let mut out = self.b_adjoint_apply(&y);
        out.iter_mut().zip(&y).for_each(|(a, b)| *a += b);
        out
    }

    /// `T_r v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let h = self.h_apply(v);
        let hs = self.h_adjoint_apply(v);
        h.iter().zip(hs).map(|(a, b)| (a + b) * 0.5).collect()
    }

    pub fn operator(&self) -> crate::fock::TruncatedOperator {
        let (a, b) = (self.clone(), self.clone());
        crate::fock::TruncatedOperator::from_fn(&self.basis, &self.basis, move |v| a.apply(v), move |v| b.apply(v))
    }

    /// Dense `T_r`, symmetrized as `½(T + T*)`.
    pub fn dense(&self) -> DMatrix<C64> {
        let n = self.basis.count();
        let cols: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![ZERO; n];
                e[j] = ONE;
                self.h_apply(&e)
            })
            .collect();
        let h = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
        linalg::hermitian_part(&h)
    }

    /// `P_M T_r P_M`, computed exactly on the grade-`M` basis.
    pub fn compression(&self, m: usize) -> Result<DMatrix<C64>> {
        let basis = WordBasis::new(self.basis.d(), m)?;
        Ok(RadialOperator::new(&self.b, self.r, &basis)?.dense())
    }

    /// Max |<u, T v> - <T u, v>| over random probes.
    pub fn self_adjointness_residual(&self, probes: usize, seed: u64) -> f64 {
        self.operator().adjointness_residual(probes, seed)
    }

    /// Lower-band Toeplitz coefficients `c_0..c_p` of `B(rR)` when `d = 1`.
    fn band_coefficients(&self) -> Vec<C64> {
        let p = self.terms.iter().map(|t| t.len).max().unwrap_or(0);
        let mut c = vec![ZERO; p + 1];
        c[0] = self.c0;
        for t in &self.terms {
            c[t.len] = t.coeff;
        }
        c
    }
}

/// Convenience wrapper for [`RadialOperator::new`].
pub fn radial_operator(b: &NCSeries, r: f64, basis: &WordBasis) -> Result<RadialOperator> {
    RadialOperator::new(b, r, basis)
}

enum Factor {
    Dense(DMatrix<C64>),
    Banded { chol: BandCholesky, c: Vec<C64> },
    Cg,
}

/// `Δ_r(ε) = (εI + T_r)^{-1}`.
pub struct Resolvent {
    t: RadialOperator,
    eps: f64,
    factor: Factor,
    cg_tol: f64,
    max_iter: usize,
}

impl Resolvent {
    pub fn new(t: &RadialOperator, eps: f64, mode: SolverMode, cg_tol: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::invalid("epsilon", format!("{eps} is not > 0")));
        }
        let n = t.basis.count();
        let mode = match mode {
            SolverMode::Auto if t.basis.d() == 1 => SolverMode::Banded,
            SolverMode::Auto if n <= DENSE_LIMIT => SolverMode::Dense,
            SolverMode::Auto => SolverMode::MatrixFree,
            m => m,
        };
        let factor = match mode {
            SolverMode::Dense => {
                let mut a = t.dense();
                for i in 0..n {
                    a[(i, i)] += eps;
                }
                Factor::Dense(linalg::hpd_inverse(&a)?)
            }
            SolverMode::Banded => {
                if t.basis.d() != 1 {
                    return Err(Error::invalid("mode", "banded solver needs d = 1"));
                }
                let c = t.band_coefficients();
                let chol = banded_k_factor(&c, n, eps)?;
                Factor::Banded { chol, c }
            }
            _ => Factor::Cg,
        };
        Ok(Resolvent {
            t: t.clone(),
            eps,
            factor,
            cg_tol,
            max_iter: 10 * n.max(50),
        })
    }

    pub fn with_max_iter(mut self, it: usize) -> Self {
        self.max_iter = it;
        self
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `x = Δ v`. The report is present only for CG solves.
    pub fn solve(&self, v: &[C64]) -> Result<(Vec<C64>, Option<CgReport>)> {
        match &self.factor {
            Factor::Dense(inv) => {
                let x = inv * nalgebra::DVector::from_column_slice(v);
                Ok((x.as_slice().to_vec(), None))
            }
            Factor::Banded { chol, c } => Ok((banded_delta_apply(chol, c, v), None)),
            Factor::Cg => {
                let eps = self.eps;
                let (x, rep) = linalg::conjugate_gradient(
                    |u| {
                        let mut y = self.t.apply(u);
                        y.iter_mut().zip(u).for_each(|(a, b)| *a += b * eps);
                        y
                    },
                    v,
                    self.cg_tol,
                    self.max_iter,
                );
                if !rep.converged {
                    return Err(Error::NoConvergence {
                        residual: rep.residual,
                        iterations: rep.iterations,
                    });
                }
                Ok((x, Some(rep)))
            }
        }
    }

    /// `P_m Δ P_m` with the worst CG residual, if any.
    pub fn compression(&self, m: usize) -> Result<(DMatrix<C64>, Option<f64>)> {
        let bs = &self.t.basis;
        let k = bs.count_upto(m.min(bs.grade()));
        let n = bs.count();
        let cols: Vec<Result<(Vec<C64>, Option<CgReport>)>> = (0..k)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![ZERO; n];
                e[j] = ONE;
                self.solve(&e)
            })
            .collect();
        let mut out = DMatrix::zeros(k, k);
        let mut worst: Option<f64> = None;
        for (j, col) in cols.into_iter().enumerate() {
            let (x, rep) = col?;
            if let Some(r) = rep {
                worst = Some(worst.map_or(r.residual, |w: f64| w.max(r.residual)));
            }
            for i in 0..k {
                out[(i, j)] = x[i];
            }
        }
        let sym = linalg::hermitian_part(&out);
        Ok((sym, worst))
    }

    /// Matrix-free operator form.
    pub fn operator(self) -> crate::fock::TruncatedOperator {
        let basis = self.t.basis.clone();
        let me = std::sync::Arc::new(self);
        let a = me.clone();
        let b = me;
        crate::fock::TruncatedOperator::from_fn(
            &basis,
            &basis,
            move |v| {
                a.solve(v)
                    .map(|x| x.0)
                    .unwrap_or_else(|_| vec![C64::new(f64::NAN, 0.0); v.len()])
            },
            move |v| {
                b.solve(v)
                    .map(|x| x.0)
                    .unwrap_or_else(|_| vec![C64::new(f64::NAN, 0.0); v.len()])
            },
        )
    }
}

/// `Δ_r(ε) = (εI + T_r)^{-1}`.
pub fn resolvent(t: &RadialOperator, eps: f64, mode: SolverMode, cg_tol: f64) -> Result<Resolvent> {
    Resolvent::new(t, eps, mode, cg_tol)
}

// With B lower triangular, εI + T = (I - B*)^{-1} K (I - B)^{-1} where
// K = (ε+1)I - ε(B + B*) + (ε-1)B*B, so Δ = (I - B) K^{-1} (I - B*).
// For d = 1 every term is banded with the degree of B as bandwidth.
fn banded_k_factor(c: &[C64], n: usize, eps: f64) -> Result<BandCholesky> {
    let p = (c.len() - 1).min(n.saturating_sub(1));
    let band: Vec<Vec<C64>> = (0..=p)
        .into_par_iter()
        .map(|k| {
            (0..n - k)
                .map(|j| {
                    let i = j + k;
                    let mut v = ZERO;
                    if k == 0 {
                        v += C64::new(eps + 1.0, 0.0) - (c[0] + c[0].conj()) * eps;
                    } else {
                        v -= c[k] * eps;
                    }
                    // (B*B)[i, j] = Σ_{l=i}^{min(n-1, j+p)} conj(c_{l-i}) c_{l-j}
                    let top = (n - 1).min(j + p);
                    let mut s = ZERO;
                    for l in i..=top {
                        s += c[l - i].conj() * c[l - j];
                    }
                    v + s * (eps - 1.0)
                })
                .collect()
        })
        .collect();
    BandCholesky::factor(n, p, &band)
}

fn banded_delta_apply(chol: &BandCholesky, c: &[C64], v: &[C64]) -> Vec<C64> {
    let n = v.len();
    let p = (c.len() - 1).min(n.saturating_sub(1));
    // (I - B*) v
    let rhs: Vec<C64> = (0..n)
        .map(|i| {
            let mut s = v[i];
            for k in 0..=p.min(n - 1 - i) {
                s -= c[k].conj() * v[i + k];
            }
            s
        })
        .collect();
    let x = chol.solve(&rhs);
    (0..n)
        .map(|i| {
            let mut s = x[i];
            for k in 0..=p.min(i) {
                s -= c[k] * x[i - k];
            }
            s
        })
        .collect()
}

/// Coupled radius/grade schedule `r_j = 1 - 2^{-j}`, `N_j = ceil(log(tail_tol)/log(r_j))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub tail_tol: f64,
    pub j_max: usize,
    pub memory_budget_mb: f64,
    /// Cauchy stopping threshold on the max-norm increment of successive estimates.
    pub stop_tol: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            tail_tol: 1e-8,
            j_max: 10,
            memory_budget_mb: 1024.0,
            stop_tol: 1e-4,
        }
    }
}

impl Schedule {
    pub fn r(j: usize) -> f64 {
        1.0 - 0.5f64.powi(j as i32)
    }

    pub fn grade(&self, j: usize) -> usize {
        let r = Self::r(j);
        (self.tail_tol.ln() / r.ln()).ceil() as usize
    }
}

#[derive(Clone, Debug)]
pub struct RnOptions {
    pub m: usize,
    pub eps_grid: Vec<f64>,
    pub schedule: Schedule,
    /// Extra grades kept when inverting the resolvent compression; defaults to 8 for `d = 1`
    /// and 2 otherwise.
    pub guard: Option<usize>,
    pub mode: SolverMode,
    pub cg_tol: f64,
    pub singular_tol: f64,
    pub null_tol: f64,
}

impl Default for RnOptions {
    fn default() -> Self {
        RnOptions {
            m: 8,
            eps_grid: vec![1.0],
            schedule: Schedule::default(),
            guard: None,
            mode: SolverMode::Auto,
            cg_tol: 1e-10,
            singular_tol: 0.05,
            null_tol: 1e-10,
        }
    }
}

/// Either a Schur-class symbol or the moments of a positive measure.
#[derive(Clone, Debug)]
pub enum RnInput {
    Schur(NCSeries),
    Moments(MomentFunctional),
}

/// One step of the schedule for one ε.
#[derive(Clone, Debug)]
pub struct Iterate {
    pub eps: f64,
    pub j: usize,
    pub r: f64,
    pub n: usize,
    pub t_hat: DMatrix<C64>,
    /// `<1, Δ_{r_j}(ε) 1>`.
    pub vacuum_resolvent: f64,
    /// Max-norm change from the previous iterate (`∞` for the first).
    pub increment: f64,
    pub cg_residual: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RnDiagnostics {
    /// Cauchy rule met before `j_max` for every ε.
    pub converged: bool,
    /// Max entry difference of the final estimates across ε.
    pub eps_consistency: f64,
    /// `<1, Δ_{r_j}(ε) 1>` non-decreasing along the schedule (primary ε).
    pub vacuum_monotone: bool,
    /// Estimated `μ_ac(I)` strictly decreasing along the schedule (primary ε).
    pub mu_ac_decreasing: bool,
    pub singular: bool,
    pub r_max: f64,
    pub mu_ac_positivity: PositivityReport,
    pub mu_s_mass: f64,
}

#[derive(Clone, Debug)]
pub struct RNResult {
    pub basis: WordBasis,
    pub eps_grid: Vec<f64>,
    pub r_schedule: Vec<(f64, usize)>,
    /// `T̂` on grades `<= M` from the first ε of the grid.
    pub t_compression: DMatrix<C64>,
    pub mu: MomentFunctional,
    pub mu_ac: MomentFunctional,
    pub mu_s: MomentFunctional,
    pub iterates: Vec<Iterate>,
    pub diagnostics: RnDiagnostics,
}

impl RNResult {
    /// Iterates belonging to the first ε of the grid.
    pub fn primary_iterates(&self) -> impl Iterator<Item = &Iterate> {
        let e = self.eps_grid[0];
        self.iterates.iter().filter(move |it| it.eps == e)
    }
}

/// Schur symbol and moments for an [`RnInput`], both at least at grade `m`.
pub fn resolve_input(input: &RnInput, m: usize) -> Result<(NCSeries, MomentFunctional)> {
    match input {
        RnInput::Schur(b) => {
            let g = b.basis().grade().max(m);
            let mu = measure::clark_measure(&b.with_grade(g))?.restrict(m);
            Ok((b.clone(), mu))
        }
        RnInput::Moments(mu) => {
            if mu.basis().grade() < m {
                return Err(Error::invalid(
                    "M",
                    format!("moments known to grade {} only, below M = {m}", mu.basis().grade()),
                ));
            }
            let h = measure::herglotz_transform(mu);
            let b = series::cayley_to_schur(&h)?.trimmed(1e-14);
            Ok((b, mu.restrict(m)))
        }
    }
}

/// Bytes needed per basis word by the matrix-free CG path.
const BYTES_PER_WORD: f64 = 16.0 * 8.0;

/// Coupled-limit Radon–Nikodym estimate `T̂ = Δ̂(ε)^{-1} - εI` on grades `<= M`.
pub fn rn_derivative(input: &RnInput, opts: &RnOptions) -> Result<RNResult> {
    if opts.eps_grid.is_empty() || opts.eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::invalid("epsilon_grid", "needs at least one value, all > 0"));
    }
    let (b, mu) = resolve_input(input, opts.m)?;
    let d = b.basis().d();
    let m = opts.m;
    let guard = opts.guard.unwrap_or(if d == 1 { 8 } else { 2 });
    let mg = m + guard;
    let out_basis = WordBasis::new(d, m)?;
    let deg_b = b.degree();

    // feasible schedule
    let mut sched = Vec::new();
    for j in 1..=opts.schedule.j_max {
        let n = opts.schedule.grade(j).max(mg + deg_b + 8);
        let words = WordBasis::new(d, n)
            .map(|bb| bb.count() as f64)
            .unwrap_or(f64::INFINITY);
        let mb = words * BYTES_PER_WORD / 1e6;
        if d > 1 && mb > opts.schedule.memory_budget_mb {
            break;
        }
        sched.push((j, Schedule::r(j), n));
    }
    if sched.is_empty() {
        return Err(Error::ScheduleInfeasible(format!(
            "grade {} at r = 0.5 exceeds the memory budget of {} MB",
            opts.schedule.grade(1),
            opts.schedule.memory_budget_mb
        )));
    }

    let per_eps: Vec<Result<Vec<Iterate>>> = opts
        .eps_grid
        .par_iter()
        .map(|&eps| {
            let mut its: Vec<Iterate> = Vec::new();
            for &(j, r, n) in &sched {
                let basis = WordBasis::new(d, n)?;
                let t = RadialOperator::new(&b, r, &basis)?;
                let res = Resolvent::new(&t, eps, opts.mode, opts.cg_tol)?;
                let (dm, cg) = res.compression(mg)?;
                let vac = dm[(0, 0)].re;
                let mut inv = linalg::hpd_inverse(&dm)?;
                for i in 0..inv.nrows() {
                    inv[(i, i)] -= eps;
                }
                let k = out_basis.count();
                let t_hat = linalg::hermitian_part(&inv.view((0, 0), (k, k)).into_owned());
                let increment = its
                    .last()
                    .map(|p: &Iterate| linalg::max_entry(&(&t_hat - &p.t_hat)))
                    .unwrap_or(f64::INFINITY);
                its.push(Iterate {
                    eps,
                    j,
                    r,
                    n,
                    t_hat,
                    vacuum_resolvent: vac,
                    increment,
                    cg_residual: cg,
                });
                if increment < opts.schedule.stop_tol {
                    break;
                }
            }
            Ok(its)
        })
        .collect();
    let mut iterates = Vec::new();
    let mut finals = Vec::new();
    let mut converged = true;
    for r in per_eps {
        let its = r?;
        let last = its.last().expect("schedule is non-empty");
        converged &= last.increment < opts.schedule.stop_tol;
        finals.push(last.t_hat.clone());
        iterates.extend(its);
    }
    let t_compression = finals[0].clone();
    let eps_consistency = finals
        .iter()
        .map(|f| linalg::max_entry(&(f - &t_compression)))
        .fold(0.0, f64::max);

    let mut mu_ac = MomentFunctional::zeros(&out_basis);
    let ac: Vec<C64> = (0..out_basis.count()).map(|a| t_compression[(0, a)]).collect();
    mu_ac = MomentFunctional::from_moments(&out_basis, ac).unwrap_or(mu_ac);
    let mu_s = mu.sub(&mu_ac);

    let e0 = opts.eps_grid[0];
    let prim: Vec<&Iterate> = iterates.iter().filter(|it| it.eps == e0).collect();
    let vacuum_monotone = prim
        .windows(2)
        .all(|w| w[1].vacuum_resolvent >= w[0].vacuum_resolvent - 1e-12);
    let mu_ac_decreasing = prim.len() >= 2 && prim.windows(2).all(|w| w[1].t_hat[(0, 0)].re < w[0].t_hat[(0, 0)].re);
    let singular = mu_ac.mass() < opts.singular_tol && mu_ac_decreasing;
    let r_max = prim.last().map(|it| it.r).unwrap_or(0.0);
    let mu_ac_positivity = measure::is_positive(&mu_ac, opts.null_tol.max(1e-8));
    let mu_s_mass = mu_s.mass();

    Ok(RNResult {
        basis: out_basis,
        eps_grid: opts.eps_grid.clone(),
        r_schedule: sched.iter().map(|&(_, r, n)| (r, n)).collect(),
        t_compression,
        mu,
        mu_ac,
        mu_s,
        iterates,
        diagnostics: RnDiagnostics {
            converged,
            eps_consistency,
            vacuum_monotone,
            mu_ac_decreasing,
            singular,
            r_max,
            mu_ac_positivity,
            mu_s_mass,
        },
    })
}

/// Smallest eigenvalue of a compressed difference, with the method used.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub dim: usize,
    pub method: &'static str,
}

/// `min eig P_M[(I + T_r) - x(rR)* x(rR)]P_M`, where `x(R) = M^R_{x^t}`.
pub fn majorant_check(b: &NCSeries, x: &NCSeries, r: f64, m: usize, lanczos: bool) -> Result<PsdReport> {
    let d = b.basis().d();
    let basis = WordBasis::new(d, m)?;
    let t = RadialOperator::new(b, r, &basis)?;
    let s = series::radial_scale(&series::transpose_conjugate(x), r)?.trimmed(1e-17);
    let out = WordBasis::new(d, m + s.degree())?;
    let xr = series::right_multiplier_between(&s, &basis, &out);
    let apply = |v: &[C64]| -> Vec<C64> {
        let tv = t.apply(v);
        let xx = xr.adjoint_apply(&xr.apply(v));
        (0..v.len()).map(|i| v[i] + tv[i] - xx[i]).collect()
    };
    let n = basis.count();
    if lanczos {
        let start: Vec<C64> = (0..n).map(|i| C64::new(1.0, 0.1 * (i % 7) as f64)).collect();
        let (lo, _) = linalg::lanczos_extremes(apply, &start, n);
        Ok(PsdReport {
            min_eigenvalue: lo,
            dim: n,
            method: "lanczos",
        })
    } else {
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            let col = apply(&e);
            for i in 0..n {
                a[(i, j)] = col[i];
            }
        }
        Ok(PsdReport {
            min_eigenvalue: linalg::min_eigenvalue(&a),
            dim: n,
            method: "dense",
        })
    }
}

/// `min eig` of `2(I - Re B(R)) - (I - B(R)*)(I + T̂)(I - B(R))` on grades `<= M`.
/// `t_hat` must cover grades `<= M + deg B`.
pub fn fatou_form_check(b: &NCSeries, t_hat: &DMatrix<C64>, m: usize) -> Result<PsdReport> {
    let d = b.basis().d();
    let deg = b.degree();
    let inner = WordBasis::new(d, m)?;
    let outer = WordBasis::new(d, m + deg)?;
    if t_hat.nrows() != outer.count() || t_hat.ncols() != outer.count() {
        return Err(Error::invalid(
            "T_compression",
            format!("needs {} rows (grade M + deg B = {})", outer.count(), m + deg),
        ));
    }
    let bt = series::transpose_conjugate(&b.with_grade(m + deg));
    let bop = series::right_multiplier_between(&bt, &inner, &outer).to_dense();
    let (ni, no) = (inner.count(), outer.count());
    let mut a = -bop.clone();
    for i in 0..ni {
        a[(i, i)] += ONE;
    }
    let mut mid = t_hat.clone();
    for i in 0..no {
        mid[(i, i)] += ONE;
    }
    let rhs = a.adjoint() * mid * &a;
    let top = bop.view((0, 0), (ni, ni)).into_owned();
    let mut lhs = -(linalg::hermitian_part(&top) * C64::new(2.0, 0.0));
    for i in 0..ni {
        lhs[(i, i)] += C64::new(2.0, 0.0);
    }
    Ok(PsdReport {
        min_eigenvalue: linalg::min_eigenvalue(&(lhs - rhs)),
        dim: ni,
        method: "dense",
    })
}

/// Finite-truncation realization of `q_ac = <·, (Q_ac - E*E) ·>_{μ+m}`.
#[derive(Clone, Debug)]
pub struct FormDiagnostic {
    /// Rank of `Q_ac` at this truncation.
    pub q_ac_rank: usize,
    /// `q_ac(L^α 1, L^β 1)` for all words of the basis.
    pub q_ac: DMatrix<C64>,
    /// Singular values of the embedding `E : H²(μ+m) → H²`, ascending.
    pub e_singular_values: Vec<f64>,
}

/// Keeps the part of `Ran E*` where `E*E` exceeds `null_tol`, so that `Q_ac` is the
/// spectral projection of `E*E = G_{μ+m}^{-1}` onto `(null_tol, 1]`.
pub fn form_decomposition_diagnostic(mu: &MomentFunctional, null_tol: f64) -> Result<FormDiagnostic> {
    let mut g = measure::gram(mu).g;
    let n = g.nrows();
    for i in 0..n {
        g[(i, i)] += ONE;
    }
    let g = linalg::hermitian_part(&g);
    let eig = g.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < 1.0 - 1e-9) {
        let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        return Err(Error::NotPositive {
            min_eig: lo - 1.0,
            tol: 1e-9,
        });
    }
    let mut q = DMatrix::<C64>::zeros(n, n);
    let mut rank = 0;
    let mut sv = Vec::with_capacity(n);
    for k in 0..n {
        let lam = eig.eigenvalues[k];
        sv.push(1.0 / lam.sqrt());
        if 1.0 / lam > null_tol {
            rank += 1;
            let v = eig.eigenvectors.column(k);
            q += v * v.adjoint() * C64::new(lam, 0.0);
        }
    }
    for i in 0..n {
        q[(i, i)] -= ONE;
    }
    sv.sort_by(|a, b| a.total_cmp(b));
    Ok(FormDiagnostic {
        q_ac_rank: rank,
        q_ac: q,
        e_singular_values: sv,
    })
}

/// `<1, Δ_r(ε) 1>` at fixed grade, with the CG report when the matrix-free path is used.
pub fn vacuum_resolvent(
    b: &NCSeries,
    r: f64,
    basis: &WordBasis,
    eps: f64,
    mode: SolverMode,
    cg_tol: f64,
) -> Result<(f64, Option<CgReport>)> {
    let t = RadialOperator::new(b, r, basis)?;
    let res = Resolvent::new(&t, eps, mode, cg_tol)?;
    let mut e = vec![ZERO; basis.count()];
    e[0] = ONE;
    let (x, rep) = res.solve(&e)?;
    Ok((x[0].re, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{enumerate, Word};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn zero_symbol_gives_identity() {
        let b = enumerate(2, 3).unwrap();
        let t = RadialOperator::new(&NCSeries::zeros(&b), 0.7, &b).unwrap();
        assert!(linalg::max_entry(&(t.dense() - DMatrix::identity(b.count(), b.count()))) < 1e-15);
        let res = Resolvent::new(&t, 1.0, SolverMode::Dense, 1e-10).unwrap();
        let (dm, _) = res.compression(3).unwrap();
        assert!(linalg::max_entry(&(dm - DMatrix::identity(b.count(), b.count()) * c(0.5))) < 1e-15);
    }

    #[test]
    fn inner_symbol_gives_poisson_toeplitz() {
        let b = enumerate(1, 12).unwrap();
        let z = NCSeries::variable(&b, 1).unwrap();
        let r: f64 = 0.6;
        let t = RadialOperator::new(&z, r, &b).unwrap().dense();
        for j in 0..13 {
            for k in 0..13 {
                assert!((t[(j, k)] - c(r.powi((j as i32 - k as i32).abs()))).norm() < 1e-13);
            }
        }
        assert!(RadialOperator::new(&z, 1.0, &b).is_err());
    }

    #[test]
    fn vacuum_entry_is_mass() {
        let b = enumerate(2, 4).unwrap();
        let bb =
            NCSeries::from_terms(&b, &[(w("e"), c(0.2)), (w("12"), c(0.3)), (w("2"), C64::new(0.1, 0.2))]).unwrap();
        let mu = measure::clark_measure(&bb).unwrap();
        for r in [0.2, 0.5, 0.9] {
            let t = RadialOperator::new(&bb, r, &b).unwrap();
            let mut e = vec![c(0.0); b.count()];
            e[0] = c(1.0);
            assert!((t.apply(&e)[0] - mu.moments()[0]).norm() < 1e-14);
        }
    }

    #[test]
    fn solvers_agree() {
        let b = enumerate(1, 40).unwrap();
        let bb = NCSeries::from_terms(&b, &[(w("e"), c(0.1)), (w("1"), c(0.4)), (w("11"), c(-0.3))]).unwrap();
        let t = RadialOperator::new(&bb, 0.8, &b).unwrap();
        let mats: Vec<DMatrix<C64>> = [SolverMode::Dense, SolverMode::Banded, SolverMode::MatrixFree]
            .iter()
            .map(|&m| Resolvent::new(&t, 0.7, m, 1e-13).unwrap().compression(6).unwrap().0)
            .collect();
        assert!(linalg::max_entry(&(&mats[0] - &mats[1])) < 1e-12);
        assert!(linalg::max_entry(&(&mats[0] - &mats[2])) < 1e-10);
    }

    #[test]
    fn order_of_limits_trap() {
        // r → 1 at fixed N drives Δ_r(1) to I - J/(N+2)
        let n = 6;
        let b = enumerate(1, n).unwrap();
        let z = NCSeries::variable(&b, 1).unwrap();
        let t = RadialOperator::new(&z, 1.0 - 1e-9, &b).unwrap();
        let (dm, _) = Resolvent::new(&t, 1.0, SolverMode::Dense, 1e-10)
            .unwrap()
            .compression(n)
            .unwrap();
        let k = (n + 1) as f64;
        let expect = DMatrix::from_fn(n + 1, n + 1, |i, j| c(if i == j { 1.0 } else { 0.0 } - 1.0 / (k + 1.0)));
        assert!(linalg::max_entry(&(dm - expect)) < 1e-6);
    }
}
