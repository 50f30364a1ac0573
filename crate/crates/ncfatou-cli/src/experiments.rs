use nalgebra::DMatrix;
use ncfatou::lebesgue::{self, RNResult, RnInput, RnOptions, SolverMode};
use ncfatou::oracle1d::{self, ClassicalMeasure};
use ncfatou::{factor, linalg, measure, series};
use ncfatou::{MatrixPoint, MomentFunctional, NCSeries, WordBasis, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{invalid, Config, Experiment, Failure, TauSource};
use crate::output::{moment_table, num, Check, Outcome, Table};
use crate::verify;

/// Entry error allowed between the recovered `T̂` and the classical Toeplitz oracle.
pub const ORACLE_TOL: f64 = 1e-3;
/// Default PSD floors for dense and Lanczos eigenvalue estimates.
pub const DENSE_PSD_FLOOR: f64 = -1e-10;
pub const LANCZOS_PSD_FLOOR: f64 = -1e-8;
/// Residual bound for the outer factorization.
pub const FACTOR_RESIDUAL: f64 = 1e-8;
/// Kernel identity and Szegő positivity bounds.
pub const KERNEL_RESIDUAL: f64 = 1e-9;
pub const SZEGO_FLOOR: f64 = -1e-10;

pub fn run(cfg: &Config) -> Result<Outcome, Failure> {
    match cfg.experiment {
        Experiment::ClassicalFatou => classical_fatou(cfg),
        Experiment::InnerSingular => inner_singular(cfg),
        Experiment::Decompose => decompose(cfg),
        Experiment::Factor => factor_experiment(cfg),
        Experiment::Majorant => majorant(cfg),
        Experiment::Kernels => kernels(cfg),
        Experiment::Verify => verify::run_suite(cfg.suite.as_deref().unwrap_or("core"), cfg.seed),
    }
}

fn rn_options(cfg: &Config) -> RnOptions {
    RnOptions {
        m: cfg.m(),
        eps_grid: cfg.eps_grid(),
        schedule: cfg.schedule(),
        mode: cfg.solver(),
        cg_tol: cfg.tolerances.cg_tol,
        singular_tol: cfg.tolerances.singular_tol,
        null_tol: cfg.tolerances.null_tol,
        ..RnOptions::default()
    }
}

fn matrix_table(name: &str, basis: &WordBasis, m: &DMatrix<C64>) -> Table {
    let mut t = Table::new(name, &["row", "col", "re", "im"]);
    let words: Vec<String> = basis.words().map(|w| w.to_string()).collect();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            t.push(vec![
                words[i].clone(),
                words[j].clone(),
                num(m[(i, j)].re),
                num(m[(i, j)].im),
            ]);
        }
    }
    t
}

/// Vacuum row of every iterate, i.e. the running estimate of `μ_ac`.
fn convergence_table(res: &RNResult, m: usize) -> Table {
    let mut t = Table::new(
        "convergence",
        &["epsilon", "r", "N", "M", "entry_row", "entry_col", "re", "im"],
    );
    let words: Vec<String> = res.basis.words().map(|w| w.to_string()).collect();
    for it in &res.iterates {
        for (j, w) in words.iter().enumerate() {
            let v = it.t_hat[(0, j)];
            t.push(vec![
                num(it.eps),
                num(it.r),
                it.n.to_string(),
                m.to_string(),
                "e".into(),
                w.clone(),
                num(v.re),
                num(v.im),
            ]);
        }
    }
    t
}

fn rn_summary(out: &mut Outcome, res: &RNResult) {
    let d = &res.diagnostics;
    out.note("converged", d.converged);
    out.note("r_max", num(d.r_max));
    out.note("steps", res.primary_iterates().count());
    out.note("eps_consistency", num(d.eps_consistency));
    out.note("vacuum_monotone", d.vacuum_monotone);
    out.note("mu_ac_mass", num(res.mu_ac.mass()));
    out.note("mu_s_mass", num(res.mu_s.mass()));
    out.note("mu_ac_min_eigenvalue", num(d.mu_ac_positivity.min_eigenvalue));
    out.note("singular", d.singular);
}

/// Toeplitz matrix of the Fatou symbol for `d = 1` symbols with `sup |b| < 1` on the circle.
fn fatou_oracle(b: &NCSeries, m: usize) -> Option<DMatrix<C64>> {
    if b.basis().d() != 1 {
        return None;
    }
    let coeffs = b.coeffs().to_vec();
    let grid = oracle1d::circle_grid(oracle1d::DEFAULT_GRID);
    let sup = grid
        .iter()
        .map(|&z| oracle1d::poly_eval(&coeffs, z).norm())
        .fold(0.0, f64::max);
    if sup >= 1.0 - 1e-6 {
        return None;
    }
    let samples: Vec<f64> = grid.iter().map(|&z| oracle1d::fatou_symbol(&coeffs, z)).collect();
    oracle1d::toeplitz_from_symbol(&samples, m).ok()
}

fn classical_fatou(cfg: &Config) -> Result<Outcome, Failure> {
    let input = cfg.rn_input()?;
    let m = cfg.m();
    let res = lebesgue::rn_derivative(&input, &rn_options(cfg))?;
    let mut out = Outcome::default();
    out.note("d", cfg.d);
    out.note("M", m);
    rn_summary(&mut out, &res);
    if let RnInput::Schur(b) = &input {
        if let Some(oracle) = fatou_oracle(b, m) {
            let err = linalg::max_entry(&(&res.t_compression - oracle));
            out.check(Check::at_most("oracle_max_entry_error", err, ORACLE_TOL));
        }
    }
    out.tables.push(matrix_table("t_hat", &res.basis, &res.t_compression));
    out.tables.push(convergence_table(&res, m));
    out.tables.push(moment_table("mu_ac", &res.basis, res.mu_ac.moments()));
    out.tables.push(moment_table("mu_s", &res.basis, res.mu_s.moments()));
    Ok(out)
}

fn inner_singular(cfg: &Config) -> Result<Outcome, Failure> {
    let mut out = Outcome::default();
    if let Some(grid) = &cfg.r_grid {
        // fixed-grade trend of <1, Δ_r 1> over r, for alphabets where the coupled limit is out of reach
        let b = cfg
            .schur_series()?
            .ok_or_else(|| invalid("schur_series_file", "required for an r_grid sweep"))?;
        let n = cfg.require_n()?;
        let basis = WordBasis::new(cfg.d, n)?;
        let mode = match cfg.solver {
            None => SolverMode::MatrixFree,
            Some(_) => cfg.solver(),
        };
        let eps = cfg.eps_grid()[0];
        let mut t = Table::new(
            "trend",
            &["r", "N", "epsilon", "vacuum_resolvent", "cg_iterations", "cg_residual"],
        );
        let mut values = Vec::new();
        for &r in grid {
            let (v, rep) = lebesgue::vacuum_resolvent(&b, r, &basis, eps, mode, cfg.tolerances.cg_tol)?;
            let (it, resid) = rep
                .map(|r| (r.iterations.to_string(), num(r.residual)))
                .unwrap_or(("0".into(), num(0.0)));
            t.push(vec![num(r), n.to_string(), num(eps), num(v), it, resid]);
            values.push(v);
        }
        out.note("N", n);
        out.note("words", basis.count());
        out.check(Check::holds(
            "vacuum_resolvent_increasing",
            values.windows(2).all(|w| w[1] > w[0]),
        ));
        out.tables.push(t);
        return Ok(out);
    }
    let res = lebesgue::rn_derivative(&cfg.rn_input()?, &rn_options(cfg))?;
    rn_summary(&mut out, &res);
    let mut t = Table::new(
        "mass_trend",
        &["epsilon", "j", "r", "N", "mu_ac_mass", "vacuum_resolvent"],
    );
    for it in &res.iterates {
        t.push(vec![
            num(it.eps),
            it.j.to_string(),
            num(it.r),
            it.n.to_string(),
            num(it.t_hat[(0, 0)].re),
            num(it.vacuum_resolvent),
        ]);
    }
    out.check(Check::holds("mu_ac_decreasing", res.diagnostics.mu_ac_decreasing));
    out.check(Check::at_most(
        "mu_ac_mass",
        res.mu_ac.mass(),
        cfg.tolerances.singular_tol,
    ));
    out.tables.push(t);
    out.tables.push(moment_table("mu_s", &res.basis, res.mu_s.moments()));
    Ok(out)
}

fn decompose(cfg: &Config) -> Result<Outcome, Failure> {
    let input = cfg.rn_input()?;
    let res = lebesgue::rn_derivative(&input, &rn_options(cfg))?;
    let mut out = Outcome::default();
    rn_summary(&mut out, &res);
    if let Some(mu) = cfg.classical_measure() {
        let m = cfg.m();
        let atoms = ClassicalMeasure {
            atoms: mu.atoms.clone(),
            density: Vec::new(),
        };
        let sing = oracle1d::classical_moments(&atoms, m)?;
        let ac = oracle1d::classical_moments(&ClassicalMeasure::with_density(mu.density.clone()), m)?;
        let diff = |a: &MomentFunctional, b: &MomentFunctional| {
            a.moments()
                .iter()
                .zip(b.moments())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max)
        };
        out.note("mu_ac_oracle_error", num(diff(&res.mu_ac, &ac)));
        out.note("mu_s_oracle_error", num(diff(&res.mu_s, &sing)));
    }
    let fd = lebesgue::form_decomposition_diagnostic(&res.mu, cfg.tolerances.null_tol.max(0.1))?;
    out.note("q_ac_rank", fd.q_ac_rank);
    out.note(
        "e_min_singular_value",
        num(fd.e_singular_values.first().copied().unwrap_or(0.0)),
    );
    out.tables.push(moment_table("mu_ac", &res.basis, res.mu_ac.moments()));
    out.tables.push(moment_table("mu_s", &res.basis, res.mu_s.moments()));
    out.tables.push(matrix_table("q_ac", &res.mu.basis().clone(), &fd.q_ac));
    Ok(out)
}

fn factor_experiment(cfg: &Config) -> Result<Outcome, Failure> {
    let mut out = Outcome::default();
    let (basis, tau) = if let Some(b) = cfg.schur_series()? {
        let r = cfg.require_r()?;
        let basis = WordBasis::new(cfg.d, cfg.require_n()?)?;
        out.note("tau", format!("T_r, r = {r}"));
        let t = lebesgue::radial_operator(&b, r, &basis)?.dense();
        (basis, t)
    } else {
        // a moments file fixes its own grade; N may only lower it
        let grade = cfg.n.unwrap_or(64);
        let mu = cfg
            .moments(grade)?
            .ok_or_else(|| invalid("schur_series_file", "a symbol or a measure is required"))?;
        let n = cfg.n.unwrap_or(mu.basis().grade());
        if n > mu.basis().grade() {
            return Err(invalid(
                "N",
                format!("{n} exceeds the grade {} of the moments", mu.basis().grade()),
            ));
        }
        out.note("tau", "Gram matrix of the measure");
        let g = measure::gram(&mu.restrict(n));
        (g.basis, g.g)
    };
    let n = basis.grade();
    let op = factor::operator_from_matrix(&basis, tau);
    out.note("N", n);
    for (k, &eps) in cfg.eps_grid().iter().enumerate() {
        let f = factor::outer_factor(&op, eps, cfg.m)?;
        out.note(&format!("eps[{k}]"), num(eps));
        out.note(&format!("residual_grade[{k}]"), f.m);
        let top = linalg::lanczos_extremes(
            |v| f.y_inv.adjoint_apply(&f.y_inv.apply(v)),
            &vec![C64::new(1.0, 0.0); basis.count()],
            basis.count().min(120),
        )
        .1;
        out.check(Check::at_most(&format!("residual[{k}]"), f.residual, FACTOR_RESIDUAL));
        out.check(Check::at_most(
            &format!("y_inv_norm_times_sqrt_eps[{k}]"),
            top.max(0.0).sqrt() * eps.sqrt(),
            1.0 + 1e-8,
        ));
        out.tables
            .push(moment_table(&format!("psi_{k}"), &basis, f.psi.coeffs()));
    }
    Ok(out)
}

fn majorant(cfg: &Config) -> Result<Outcome, Failure> {
    let b = cfg
        .schur_series()?
        .ok_or_else(|| invalid("schur_series_file", "required"))?;
    let r = cfg.require_r()?;
    let m = cfg.m();
    let source = cfg
        .tau
        .ok_or_else(|| invalid("tau", "required (\"clark\" or \"zero\")"))?;
    let x = match source {
        TauSource::Zero => NCSeries::one(b.basis()),
        TauSource::Clark => {
            let n = cfg.require_n()?;
            let mu = measure::clark_measure(&b.with_grade(n))?;
            let g = measure::gram(&mu);
            factor::outer_factor(&factor::operator_from_matrix(&g.basis, g.g), 1.0, None)?.x_symbol()
        }
    };
    let lanczos = cfg.d > 1 || cfg.solver == Some(crate::config::SolverChoice::MatrixFree);
    let rep = lebesgue::majorant_check(&b, &x, r, m, lanczos)?;
    let floor = if lanczos { LANCZOS_PSD_FLOOR } else { DENSE_PSD_FLOOR };
    let mut out = Outcome::default();
    let mut t = Table::new("majorant", &["r", "M", "dim", "method", "min_eigenvalue"]);
    t.push(vec![
        num(r),
        m.to_string(),
        rep.dim.to_string(),
        rep.method.into(),
        num(rep.min_eigenvalue),
    ]);
    out.tables.push(t);
    out.check(Check::at_least("min_eigenvalue", rep.min_eigenvalue, floor));
    Ok(out)
}

pub fn random_point(rng: &mut ChaCha8Rng, d: usize, level: usize, radius: f64) -> MatrixPoint {
    let mats = (0..d).map(|_| linalg::random_matrix(rng, level, level)).collect();
    let z = MatrixPoint::new(mats).expect("square matrices");
    let s = radius / z.row_norm().max(1e-12);
    z.scaled(s)
}

/// Max entry of `K^H(Z,W)[(I-B(Z)) Q (I-B(W))*] - K^B(Z,W)[Q]` with `H` the Cayley transform of `B`.
pub fn kernel_residual(
    b: &NCSeries,
    h: &NCSeries,
    z: &MatrixPoint,
    w: &MatrixPoint,
    q: &DMatrix<C64>,
) -> Result<f64, Failure> {
    let bz = series::evaluate(b, z)?.value;
    let bw = series::evaluate(b, w)?.value;
    let iz = DMatrix::<C64>::identity(z.level(), z.level());
    let iw = DMatrix::<C64>::identity(w.level(), w.level());
    let p = (&iz - &bz) * q * (&iw - &bw).adjoint();
    let kh = series::herglotz_kernel(h, z, w, &p)?.value;
    let kb = series::dbr_kernel(b, z, w, q)?.value;
    Ok(linalg::max_entry(&(kh - kb)))
}

fn kernels(cfg: &Config) -> Result<Outcome, Failure> {
    let n = cfg.n.unwrap_or(if cfg.d == 1 { 40 } else { 14 });
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let b = match cfg.schur_series()? {
        Some(b) => b.with_grade(n),
        None => verify::random_schur(&mut rng, cfg.d, 2, 0.9).with_grade(n),
    };
    let h = series::cayley_to_herglotz(&b)?;
    let radius = cfg.r.unwrap_or(0.2);
    let mut t = Table::new(
        "kernels",
        &["pair", "level_z", "level_w", "kernel_residual", "szego_min_eigenvalue"],
    );
    let (mut worst, mut floor) = (0.0f64, f64::INFINITY);
    for k in 0..cfg.points.unwrap_or(10) {
        let (lz, lw) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let z = random_point(&mut rng, cfg.d, lz, radius);
        let w = random_point(&mut rng, cfg.d, lw, radius);
        let q = linalg::random_matrix(&mut rng, lz, lw);
        let res = kernel_residual(&b, &h, &z, &w, &q)?;
        let choi = series::szego_choi_matrix(&z, n.min(10))?;
        let lo = linalg::min_eigenvalue(&choi);
        worst = worst.max(res);
        floor = floor.min(lo);
        t.push(vec![k.to_string(), lz.to_string(), lw.to_string(), num(res), num(lo)]);
    }
    let mut out = Outcome::default();
    out.note("series_grade", n);
    out.note("point_radius", num(radius));
    out.tables.push(t);
    out.check(Check::at_most("kernel_residual", worst, KERNEL_RESIDUAL));
    out.check(Check::at_least("szego_min_eigenvalue", floor, SZEGO_FLOOR));
    Ok(out)
}
