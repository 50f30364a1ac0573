use nalgebra::DMatrix;
use ncfatou::lebesgue::{self, RnInput, RnOptions, Schedule, SolverMode};
use ncfatou::oracle1d::{self, ClassicalMeasure};
use ncfatou::{linalg, measure, series, NCSeries, Word, WordBasis, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn poly(coeffs: &[f64]) -> NCSeries {
    let b = WordBasis::new(1, coeffs.len() - 1).unwrap();
    NCSeries::from_coeffs(&b, coeffs.iter().map(|&x| c(x)).collect()).unwrap()
}

fn opts(m: usize, j_max: usize) -> RnOptions {
    RnOptions {
        m,
        schedule: Schedule {
            j_max,
            ..Schedule::default()
        },
        ..RnOptions::default()
    }
}

#[test]
fn radial_operator_matches_fft_of_poisson_symbol() {
    let r = 0.8;
    let basis = WordBasis::new(1, 10).unwrap();
    let t = lebesgue::radial_operator(&poly(&[0.0, 1.0]), r, &basis)
        .unwrap()
        .dense();
    let oracle = oracle1d::toeplitz_from_symbol(&oracle1d::poisson_samples(r, 1024), 10).unwrap();
    assert!(linalg::max_entry(&(t - oracle)) < 1e-13);
}

#[test]
fn radial_operator_matches_fatou_symbol_of_dilated_b() {
    // T_r is the Toeplitz matrix of the Fatou symbol of b(r·)
    let coeffs = [0.1, 0.3, -0.2, 0.15];
    let r = 0.7;
    let basis = WordBasis::new(1, 9).unwrap();
    let t = lebesgue::radial_operator(&poly(&coeffs), r, &basis).unwrap().dense();
    let b: Vec<C64> = coeffs.iter().map(|&x| c(x)).collect();
    let oracle = oracle1d::toeplitz_from_symbol(&oracle1d::fatou_samples(&b, r, 4096), 9).unwrap();
    assert!(linalg::max_entry(&(t - oracle)) < 1e-12);
}

#[test]
fn classical_fatou_recovery_half_z() {
    let res = lebesgue::rn_derivative(&RnInput::Schur(poly(&[0.0, 0.5])), &opts(8, 10)).unwrap();
    let b = [c(0.0), c(0.5)];
    let samples: Vec<f64> = oracle1d::circle_grid(4096)
        .into_iter()
        .map(|z| oracle1d::fatou_symbol(&b, z))
        .collect();
    let oracle = oracle1d::toeplitz_from_symbol(&samples, 8).unwrap();
    let err = linalg::max_entry(&(&res.t_compression - &oracle));
    assert!(err < 1e-3, "max entry error {err}");
    // μ is absolutely continuous here
    assert!(res.mu_s.moments().iter().all(|m| m.norm() < 1e-3));
}

#[test]
fn vacuum_identity_for_every_epsilon() {
    let o = RnOptions {
        eps_grid: vec![0.5, 1.0, 2.0],
        ..opts(8, 3)
    };
    let res = lebesgue::rn_derivative(&RnInput::Schur(poly(&[0.0])), &o).unwrap();
    for it in &res.iterates {
        let dev = linalg::max_entry(&(&it.t_hat - DMatrix::identity(9, 9)));
        assert!(dev < 1e-12, "eps {} j {}: {dev}", it.eps, it.j);
    }
}

#[test]
fn epsilon_consistency_for_smooth_symbol() {
    let o = RnOptions {
        eps_grid: vec![0.5, 1.0, 2.0],
        ..opts(6, 10)
    };
    let res = lebesgue::rn_derivative(&RnInput::Schur(poly(&[0.0, 0.5])), &o).unwrap();
    assert!(
        res.diagnostics.eps_consistency < 2e-3,
        "{}",
        res.diagnostics.eps_consistency
    );
}

#[test]
fn inner_symbol_is_singular() {
    let res = lebesgue::rn_derivative(&RnInput::Schur(poly(&[0.0, 1.0])), &opts(8, 12)).unwrap();
    let masses: Vec<f64> = res.primary_iterates().map(|it| it.t_hat[(0, 0)].re).collect();
    assert!(masses.windows(2).all(|w| w[1] < w[0]), "{masses:?}");
    assert!(res.mu_ac.mass() < 0.05);
    assert!(res.diagnostics.singular);
    assert!(res.diagnostics.vacuum_monotone);
    let s = res.mu_s.mass();
    assert!((0.95..=1.0).contains(&s), "{s}");
}

#[test]
fn mixture_decomposition_matches_classical() {
    let mix = ClassicalMeasure::point_mass(0.0, 0.5)
        .plus(ClassicalMeasure::lebesgue(0.5, oracle1d::DEFAULT_GRID))
        .unwrap();
    let mu = oracle1d::classical_moments(&mix, 64).unwrap();
    let res = lebesgue::rn_derivative(&RnInput::Moments(mu), &opts(8, 12)).unwrap();
    for k in 0..=4 {
        let ac = res.mu_ac.moments()[k];
        let want = if k == 0 { 0.5 } else { 0.0 };
        assert!((ac - c(want)).norm() < 5e-2, "mu_ac(S^{k}) = {ac}");
        if k >= 1 {
            assert!((res.mu_s.moments()[k] - c(0.5)).norm() < 5e-2);
        }
    }
}

#[test]
fn fatou_form_half_z() {
    let o = opts(9, 10);
    let res = lebesgue::rn_derivative(&RnInput::Schur(poly(&[0.0, 0.5])), &o).unwrap();
    let rep = lebesgue::fatou_form_check(&poly(&[0.0, 0.5]), &res.t_compression, 8).unwrap();
    assert!(rep.min_eigenvalue >= -5e-3, "{rep:?}");
}

#[test]
fn fatou_form_inner_reduces_to_defect() {
    let z = poly(&[0.0, 1.0]);
    let t0 = DMatrix::<C64>::zeros(10, 10);
    let rep = lebesgue::fatou_form_check(&z, &t0, 8).unwrap();
    assert!(rep.min_eigenvalue.abs() < 1e-12);
    let zero = poly(&[0.0]);
    let rep = lebesgue::fatou_form_check(&zero, &DMatrix::identity(9, 9), 8).unwrap();
    assert!(rep.min_eigenvalue.abs() < 1e-12);
    assert!(lebesgue::fatou_form_check(&z, &t0, 9).is_err());
}

#[test]
fn majorant_trivial_and_half_z() {
    let b2 = WordBasis::new(2, 4).unwrap();
    let zero = NCSeries::zeros(&b2);
    // T = I, so the outer factor of I + T is the constant √2
    let x = NCSeries::constant(&b2, C64::new(2f64.sqrt(), 0.0));
    let rep = lebesgue::majorant_check(&zero, &x, 0.5, 4, false).unwrap();
    assert!(rep.min_eigenvalue.abs() < 1e-14);

    // T for b = z/2 is the Gram matrix of its absolutely continuous Clark measure
    let b = poly(&[0.0, 0.5]).with_grade(80);
    let tau = measure::gram(&measure::clark_measure(&b).unwrap());
    let op = ncfatou::factor::operator_from_matrix(&tau.basis, tau.g);
    let f = ncfatou::factor::outer_factor(&op, 1.0, None).unwrap();
    let rep = lebesgue::majorant_check(&poly(&[0.0, 0.5]), &f.x_symbol(), 0.9, 8, false).unwrap();
    assert!(rep.min_eigenvalue >= -1e-10, "{rep:?}");
}

#[test]
fn solvers_agree_for_d2() {
    let b = WordBasis::new(2, 7).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bb = NCSeries::from_terms(
        &b,
        &[("1".parse::<Word>().unwrap(), c(s)), ("2".parse().unwrap(), c(s))],
    )
    .unwrap();
    let t = lebesgue::radial_operator(&bb, 0.6, &b).unwrap();
    let dense = lebesgue::resolvent(&t, 1.0, SolverMode::Dense, 1e-12)
        .unwrap()
        .compression(2)
        .unwrap()
        .0;
    let cg = lebesgue::resolvent(&t, 1.0, SolverMode::MatrixFree, 1e-12)
        .unwrap()
        .compression(2)
        .unwrap()
        .0;
    assert!(linalg::max_entry(&(dense - cg)) < 1e-10);
}

#[test]
fn form_diagnostic_examples() {
    let b = WordBasis::new(1, 6).unwrap();
    let m = measure::nc_lebesgue(&b);
    let fd = lebesgue::form_decomposition_diagnostic(&m, 0.1).unwrap();
    assert_eq!(fd.q_ac_rank, 7);
    assert!(linalg::max_entry(&(fd.q_ac - DMatrix::identity(7, 7))) < 1e-12);

    // point mass: smallest singular value of E decays with N
    let sv: Vec<f64> = [4, 8, 16]
        .iter()
        .map(|&n| {
            let mu = oracle1d::classical_moments(&ClassicalMeasure::point_mass(0.0, 1.0), n).unwrap();
            lebesgue::form_decomposition_diagnostic(&mu, 0.1)
                .unwrap()
                .e_singular_values[0]
        })
        .collect();
    assert!(sv.windows(2).all(|w| w[1] < w[0]), "{sv:?}");

    // m + point mass: q_ac(1, 1) trends toward 1
    let q: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&n| {
            let bb = WordBasis::new(1, n).unwrap();
            let pm = oracle1d::classical_moments(&ClassicalMeasure::point_mass(0.0, 1.0), n).unwrap();
            let mu = pm.add(&measure::nc_lebesgue(&bb));
            lebesgue::form_decomposition_diagnostic(&mu, 0.1).unwrap().q_ac[(0, 0)].re
        })
        .collect();
    assert!(q.windows(2).all(|w| w[1] > w[0]) && (q[2] - 1.0).abs() < 0.1, "{q:?}");
}

#[test]
fn clark_of_radial_symbol_is_vacuum_row() {
    let b = WordBasis::new(2, 4).unwrap();
    let bb = NCSeries::from_terms(
        &b,
        &[
            ("1".parse::<Word>().unwrap(), c(0.4)),
            ("21".parse().unwrap(), C64::new(0.1, 0.3)),
        ],
    )
    .unwrap();
    let r = 0.7;
    let t = lebesgue::radial_operator(&bb, r, &b).unwrap().dense();
    let mu_r = measure::clark_measure(&series::radial_scale(&bb, r).unwrap()).unwrap();
    for a in 0..b.count() {
        assert!((t[(0, a)] - mu_r.moments()[a]).norm() < 1e-13);
    }
}
