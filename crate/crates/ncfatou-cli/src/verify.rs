//! Named invariant suites for `ncfatou verify`.

use nalgebra::DMatrix;
use ncfatou::lebesgue::{self, RnInput, RnOptions, Schedule};
use ncfatou::{factor, linalg, measure, oracle1d, series};
use ncfatou::{FockVector, NCSeries, Word, WordBasis, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{invalid, Failure};
use crate::experiments::{kernel_residual, random_point, FACTOR_RESIDUAL, KERNEL_RESIDUAL, SZEGO_FLOOR};
use crate::output::{num, Check, Outcome, Table};

pub const SUITES: &[&str] = &["core"];

/// Random polynomial of degree `deg` whose left multiplier, compressed to grade `deg + 4`,
/// has norm `norm`.
pub fn random_schur(rng: &mut ChaCha8Rng, d: usize, deg: usize, norm: f64) -> NCSeries {
    let basis = WordBasis::new(d, deg).expect("valid alphabet");
    let b = NCSeries::from_coeffs(&basis, linalg::random_vector(rng, basis.count())).expect("same basis");
    let wide = b.with_grade(deg + 4);
    let top = series::left_multiplier(&wide).to_dense().singular_values().max();
    b.scale(C64::new(norm / top, 0.0))
}

/// `‖M^L_B‖` compressed from grade `n` into grade `n + 2`, by Lanczos on `M*M`.
pub fn left_compression_norm(b: &NCSeries, n: usize, seed: u64) -> f64 {
    let d = b.basis().d();
    let dom = WordBasis::new(d, n).expect("valid grade");
    let cod = WordBasis::new(d, n + 2).expect("valid grade");
    let op = series::left_multiplier_between(b, &dom, &cod);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = linalg::random_vector(&mut rng, dom.count());
    let (_, hi) = linalg::lanczos_extremes(|v| op.adjoint_apply(&op.apply(v)), &start, dom.count().min(300));
    hi.sqrt()
}

/// Max column norm of `X*X - I` for the right multiplier of `b` from grade `n - deg` into grade `n`.
pub fn right_isometry_residual(b: &NCSeries, n: usize) -> f64 {
    let d = b.basis().d();
    let dom = WordBasis::new(d, n - b.degree()).expect("valid grade");
    let cod = WordBasis::new(d, n).expect("valid grade");
    let x = series::right_multiplier_between(b, &dom, &cod);
    let mut e = vec![C64::new(0.0, 0.0); dom.count()];
    let mut worst = 0.0f64;
    for j in 0..dom.count() {
        e[j] = C64::new(1.0, 0.0);
        let mut col = x.adjoint_apply(&x.apply(&e));
        col[j] -= C64::new(1.0, 0.0);
        worst = worst.max(linalg::norm(&col));
        e[j] = C64::new(0.0, 0.0);
    }
    worst
}

/// `2^{-1/2} 𝔷₂(1 - 𝔷₁)`.
pub fn asymmetric_symbol() -> NCSeries {
    let b = WordBasis::new(2, 2).expect("valid");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    NCSeries::from_terms(
        &b,
        &[
            (Word::letter(2), C64::new(s, 0.0)),
            ("21".parse().expect("word"), C64::new(-s, 0.0)),
        ],
    )
    .expect("words fit")
}

pub fn run_suite(name: &str, seed: u64) -> Result<Outcome, Failure> {
    match name {
        "core" => core(seed),
        other => Err(invalid(
            "suite",
            format!("unknown suite {other:?}; available: {}", SUITES.join(", ")),
        )),
    }
}

fn core(seed: u64) -> Result<Outcome, Failure> {
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = |x: f64| C64::new(x, 0.0);

    // B = 0 gives T = I for every ε
    let b1 = WordBasis::new(1, 0)?;
    let opts = RnOptions {
        m: 8,
        eps_grid: vec![0.5, 1.0, 2.0],
        schedule: Schedule {
            j_max: 3,
            ..Schedule::default()
        },
        ..RnOptions::default()
    };
    let res = lebesgue::rn_derivative(&RnInput::Schur(NCSeries::zeros(&b1)), &opts)?;
    let dev = res
        .iterates
        .iter()
        .map(|it| linalg::max_entry(&(&it.t_hat - DMatrix::identity(9, 9))))
        .fold(0.0, f64::max);
    out.check(Check::at_most("vacuum_identity", dev, 1e-12));

    // Cayley round trips and the Clark/Herglotz pair on random Schur polynomials
    let mut polys = Table::new(
        "schur_polynomials",
        &["sample", "d", "degree", "cayley_error", "clark_error"],
    );
    let (mut cayley, mut clark) = (0.0f64, 0.0f64);
    for k in 0..20 {
        let d = 1 + k % 2;
        let deg = 1 + k % 4;
        let b = random_schur(&mut rng, d, deg, 0.9);
        let h = series::cayley_to_herglotz(&b)?;
        let e1 = series::cayley_to_schur(&h)?.max_diff(&b);
        // the moments only see Re H(0)
        let mut h_real = h.clone();
        h_real.coeffs_mut()[0].im = 0.0;
        let e2 = measure::herglotz_transform(&measure::clark_measure(&b)?).max_diff(&h_real);
        cayley = cayley.max(e1);
        clark = clark.max(e2);
        polys.push(vec![k.to_string(), d.to_string(), deg.to_string(), num(e1), num(e2)]);
    }
    out.tables.push(polys);
    out.check(Check::at_most("cayley_round_trip", cayley, 1e-12));
    out.check(Check::at_most("clark_herglotz_pair", clark, 1e-12));

    // kernel identity and Szegő positivity at small levels
    let b = random_schur(&mut rng, 2, 2, 0.9).with_grade(12);
    let h = series::cayley_to_herglotz(&b)?;
    let (mut worst, mut floor) = (0.0f64, f64::INFINITY);
    for k in 0..6 {
        let (lz, lw) = (1 + k % 3, 1 + (k + 1) % 3);
        let z = random_point(&mut rng, 2, lz, 0.2);
        let w = random_point(&mut rng, 2, lw, 0.2);
        let q = linalg::random_matrix(&mut rng, lz, lw);
        worst = worst.max(kernel_residual(&b, &h, &z, &w, &q)?);
        floor = floor.min(linalg::min_eigenvalue(&series::szego_choi_matrix(&z, 8)?));
    }
    out.check(Check::at_most("kernel_identity", worst, KERNEL_RESIDUAL));
    out.check(Check::at_least("szego_positivity", floor, SZEGO_FLOOR));

    // left/right asymmetry
    let asym = asymmetric_symbol();
    out.check(Check::at_most(
        "right_multiplier_isometry",
        right_isometry_residual(&asym, 10),
        1e-12,
    ));
    let n = 8;
    let norm = left_compression_norm(&asym, n, seed);
    let closed = (1.0 + (std::f64::consts::PI / (n as f64 + 2.0)).cos()).sqrt();
    out.check(Check::at_most(
        "left_multiplier_norm_closed_form",
        (norm - closed).abs(),
        1e-6,
    ));

    // outer factorization of a vector-state Gram matrix, d = 2
    let basis = WordBasis::new(2, 6)?;
    let mut x = FockVector::vacuum(&basis);
    x.set(&Word::letter(1), one(0.5))?;
    let g = measure::gram(&measure::vector_state(&x));
    let f = factor::outer_factor(&factor::operator_from_matrix(&g.basis, g.g), 1.0, Some(4))?;
    out.check(Check::at_most("outer_factor_residual", f.residual, FACTOR_RESIDUAL));

    // radial operator against the FFT oracle
    let bz = WordBasis::new(1, 1)?;
    let half = NCSeries::from_terms(&bz, &[(Word::letter(1), one(0.5))])?;
    let tb = WordBasis::new(1, 12)?;
    let t = lebesgue::radial_operator(&half, 0.9, &tb)?;
    let samples = oracle1d::fatou_samples(&[one(0.0), one(0.5)], 0.9, 1024);
    let oracle = oracle1d::toeplitz_from_symbol(&samples, 12)?;
    out.check(Check::at_most(
        "radial_operator_oracle",
        linalg::max_entry(&(t.dense() - oracle)),
        1e-12,
    ));
    let rep = factor::ltoeplitz_check(&t.operator(), seed);
    out.check(Check::at_most("radial_operator_toeplitz", rep.violation, 1e-12));
    out.check(Check::at_most(
        "radial_operator_adjointness",
        t.self_adjointness_residual(8, seed),
        1e-12,
    ));

    out.note("suite", "core");
    out.note("checks", out.checks.len());
    out.note("failed", out.failed().len());
    Ok(out)
}
