use nalgebra::DMatrix;
use ncfatou::fock::{self, TruncatedOperator};
use ncfatou::{factor, lebesgue, linalg, measure, series};
use ncfatou::{FockVector, MatrixPoint, MomentFunctional, NCSeries, Word, WordBasis, C64};
use proptest::prelude::*;

fn cplx(scale: f64) -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(move |(a, b)| C64::new(a * scale, b * scale))
}

fn coeffs(basis: &WordBasis, scale: f64) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(cplx(scale), basis.count())
}

fn series_on(d: usize, n: usize, scale: f64) -> impl Strategy<Value = NCSeries> {
    let b = WordBasis::new(d, n).unwrap();
    coeffs(&b, scale).prop_map(move |c| NCSeries::from_coeffs(&b, c).unwrap())
}

/// Series whose coefficients sum to less than one in modulus, so `|B(Z)| < 1` on the ball.
fn contraction(d: usize, n: usize) -> impl Strategy<Value = NCSeries> {
    contraction_within(d, n, 0.9)
}

fn contraction_within(d: usize, n: usize, l1_max: f64) -> impl Strategy<Value = NCSeries> {
    series_on(d, n, 1.0).prop_map(move |s| {
        let l1: f64 = s.coeffs().iter().map(|c| c.norm()).sum();
        s.scale(C64::new(l1_max / l1.max(l1_max), 0.0))
    })
}

fn word(d: u32, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(1..=d, 0..=max_len).prop_map(|v| Word::new(v).unwrap())
}

fn point(d: usize, lvl: usize, radius: f64) -> impl Strategy<Value = MatrixPoint> {
    prop::collection::vec(prop::collection::vec(cplx(1.0), lvl * lvl), d).prop_map(move |ms| {
        let z = MatrixPoint::new(ms.into_iter().map(|v| DMatrix::from_vec(lvl, lvl, v)).collect()).unwrap();
        let s = radius / z.row_norm().max(1e-9);
        z.scaled(s)
    })
}

fn positive_functional(d: usize, n: usize) -> impl Strategy<Value = MomentFunctional> {
    let b = WordBasis::new(d, n).unwrap();
    coeffs(&b, 1.0).prop_map(move |c| measure::vector_state(&FockVector::from_coeffs(&b, c).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn concat_is_associative(a in word(3, 4), b in word(3, 4), c in word(3, 4)) {
        prop_assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
    }

    #[test]
    fn transpose_reverses_products(a in word(3, 5), b in word(3, 5)) {
        prop_assert_eq!(a.concat(&b).transpose(), b.transpose().concat(&a.transpose()));
        prop_assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn enumeration_is_a_bijection(d in 1usize..4, n in 0usize..5) {
        let b = WordBasis::new(d, n).unwrap();
        for (i, w) in b.words().enumerate() {
            prop_assert_eq!(b.index(&w), Some(i));
            prop_assert_eq!(b.word(i), w);
        }
        prop_assert_eq!(b.words().count(), b.count());
    }

    #[test]
    fn concat_index_agrees_with_words(a in word(2, 3), c in word(2, 3)) {
        let b = WordBasis::new(2, 6).unwrap();
        let (ia, ic) = (b.index(&a).unwrap(), b.index(&c).unwrap());
        let idx = b.concat_index(a.len(), b.rank_of(ia), c.len(), b.rank_of(ic)).unwrap();
        prop_assert_eq!(b.word(idx), a.concat(&c));
        prop_assert_eq!(b.word(b.transpose_index(ia)), a.transpose());
    }

    #[test]
    fn left_multipliers_are_homomorphic(f in series_on(2, 3, 1.0), g in series_on(2, 3, 1.0)) {
        let fg = series::multiply(&f, &g);
        let lhs = series::left_multiplier(&fg).to_dense();
        let rhs = series::left_multiplier(&f).to_dense() * series::left_multiplier(&g).to_dense();
        prop_assert!(linalg::max_entry(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn right_multipliers_are_antihomomorphic(f in series_on(2, 3, 1.0), g in series_on(2, 3, 1.0)) {
        let fg = series::multiply(&f, &g);
        let lhs = series::right_multiplier(&fg).to_dense();
        let rhs = series::right_multiplier(&g).to_dense() * series::right_multiplier(&f).to_dense();
        prop_assert!(linalg::max_entry(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn right_multiplier_is_transpose_conjugate_of_left(f in series_on(2, 3, 1.0)) {
        let u = fock::transpose_unitary(f.basis()).to_dense();
        let l = series::left_multiplier(&series::transpose_conjugate(&f)).to_dense();
        let r = series::right_multiplier(&f).to_dense();
        let via = &u * l * &u;
        prop_assert!(linalg::max_entry(&(via - r)) < 1e-14);
    }

    #[test]
    fn inverse_is_two_sided(f in series_on(2, 3, 0.3)) {
        let mut f = f;
        f.coeffs_mut()[0] = C64::new(1.0, 0.2);
        let g = series::invert(&f).unwrap();
        let one = NCSeries::one(f.basis());
        prop_assert!(series::multiply(&f, &g).max_diff(&one) < 1e-12);
        prop_assert!(series::multiply(&g, &f).max_diff(&one) < 1e-12);
    }

    #[test]
    fn cayley_round_trip(b in series_on(2, 3, 0.2)) {
        let h = series::cayley_to_herglotz(&b).unwrap();
        let back = series::cayley_to_schur(&h).unwrap();
        prop_assert!(back.max_diff(&b) < 1e-12);
    }

    #[test]
    fn evaluation_respects_direct_sums(f in series_on(2, 4, 1.0), z in point(2, 2, 0.5), w in point(2, 3, 0.7)) {
        let fz = series::evaluate(&f, &z).unwrap().value;
        let fw = series::evaluate(&f, &w).unwrap().value;
        let fzw = series::evaluate(&f, &z.direct_sum(&w).unwrap()).unwrap().value;
        prop_assert!(linalg::max_entry(&(fzw.view((0, 0), (2, 2)).into_owned() - fz)) < 1e-12);
        prop_assert!(linalg::max_entry(&(fzw.view((2, 2), (3, 3)).into_owned() - fw)) < 1e-12);
        prop_assert!(fzw.view((0, 2), (2, 3)).iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn evaluation_is_multiplicative(f in series_on(2, 3, 1.0), g in series_on(2, 3, 1.0), z in point(2, 2, 0.6)) {
        let basis = WordBasis::new(2, 6).unwrap();
        let (f6, g6) = (f.with_grade(6), g.with_grade(6));
        let fg = series::multiply(&f6, &g6);
        let lhs = series::evaluate(&fg, &z).unwrap().value;
        let rhs = series::evaluate(&f, &z).unwrap().value * series::evaluate(&g, &z).unwrap().value;
        prop_assert_eq!(fg.basis(), &basis);
        prop_assert!(linalg::max_entry(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn szego_kernel_is_completely_positive(z in point(2, 2, 0.8)) {
        let choi = series::szego_choi_matrix(&z, 8).unwrap();
        prop_assert!(linalg::min_eigenvalue(&choi) > -1e-12);
    }

    #[test]
    fn dbr_kernel_is_herglotz_kernel_conjugated(b in contraction(2, 2), z in point(2, 2, 0.2), w in point(2, 2, 0.2)) {
        // K^H(Z,W)[(I - B(Z)) Q (I - B(W))*] = K^B(Z,W)[Q]
        let bb = b.with_grade(13);
        let h = series::cayley_to_herglotz(&bb).unwrap();
        let q = DMatrix::from_fn(2, 2, |i, j| C64::new(1.0 + i as f64, j as f64 - 0.5));
        let id = DMatrix::<C64>::identity(2, 2);
        let bz = series::evaluate(&bb, &z).unwrap().value;
        let bw = series::evaluate(&bb, &w).unwrap().value;
        let p = (&id - &bz) * &q * (&id - &bw).adjoint();
        let kh = series::herglotz_kernel(&h, &z, &w, &p).unwrap().value;
        let kb = series::dbr_kernel(&bb, &z, &w, &q).unwrap().value;
        prop_assert!(linalg::max_entry(&(kh - kb)) < 1e-9);
    }

    #[test]
    fn sos_split_reproduces_hermitian_square(p in coeffs(&WordBasis::new(2, 2).unwrap(), 1.0), mu in positive_functional(2, 4)) {
        let pb = WordBasis::new(2, 2).unwrap();
        let pv = FockVector::from_coeffs(&pb, p.clone()).unwrap();
        let u = measure::sos_split(&pv);
        let g = measure::gram_upto(&mu, 2).g;
        let pv = nalgebra::DVector::from_vec(p);
        let lhs = (pv.adjoint() * g * &pv)[(0, 0)];
        let rhs = mu.apply_series(&u.with_grade(4)) * 2.0;
        prop_assert!((lhs.re - rhs.re).abs() < 1e-10 * (1.0 + lhs.norm()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn gram_is_linear(a in positive_functional(2, 3), b in positive_functional(2, 3), s in 0.1..3.0f64) {
        let lhs = measure::gram(&a.scale(s).add(&b)).g;
        let rhs = measure::gram(&a).g * C64::new(s, 0.0) + measure::gram(&b).g;
        prop_assert!(linalg::max_entry(&(lhs - rhs)) < 1e-11);
    }

    #[test]
    fn vector_state_gram_is_inner_product(x in coeffs(&WordBasis::new(2, 2).unwrap(), 1.0)) {
        // x lives on grade <= 2 inside grade 6, so <L^α x, L^β x> is exact for |α|, |β| <= 2
        let big = WordBasis::new(2, 6).unwrap();
        let mut full = vec![C64::new(0.0, 0.0); big.count()];
        full[..x.len()].copy_from_slice(&x);
        let xv = FockVector::from_coeffs(&big, full.clone()).unwrap();
        let g = measure::gram_upto(&measure::vector_state(&xv), 2).g;
        let shifted = |a: usize| -> Vec<C64> {
            let mut out = vec![C64::new(0.0, 0.0); big.count()];
            for (j, c) in full.iter().enumerate().take(x.len()) {
                let t = big.concat_index(big.len_of(a), big.rank_of(a), big.len_of(j), big.rank_of(j)).unwrap();
                out[t] += c;
            }
            out
        };
        for a in 0..g.nrows() {
            for b in 0..g.ncols() {
                let want = linalg::dot(&shifted(a), &shifted(b));
                prop_assert!((g[(a, b)] - want).norm() < 1e-12);
            }
        }
        prop_assert!(linalg::min_eigenvalue(&g) > -1e-12);
    }

    #[test]
    fn herglotz_transform_inverts_clark(b in series_on(2, 3, 0.2)) {
        let mut b = b;
        b.coeffs_mut()[0] = C64::new(0.0, 0.0);
        let mu = measure::clark_measure(&b).unwrap();
        let h = measure::herglotz_transform(&mu);
        let back = series::cayley_to_schur(&h).unwrap();
        prop_assert!(back.max_diff(&b) < 1e-12);
    }

    #[test]
    fn herglotz_eval_matches_cayley_at_matrix_points(b in contraction(2, 2), z in point(2, 2, 0.25)) {
        let mut b = b.with_grade(14);
        b.coeffs_mut()[0] = C64::new(0.0, 0.0);
        let mu = measure::clark_measure(&b).unwrap();
        let got = measure::herglotz_eval(&mu, &z).unwrap();
        let bz = series::evaluate(&b, &z).unwrap().value;
        let id = DMatrix::<C64>::identity(2, 2);
        let want = (&id + &bz) * (&id - &bz).try_inverse().unwrap();
        prop_assert!(linalg::max_entry(&(got.value - want)) < 1e-7);
    }

    #[test]
    fn multipliers_satisfy_adjointness(f in series_on(3, 2, 1.0), seed in 0u64..1000) {
        let op = series::right_multiplier(&f.with_grade(4));
        prop_assert!(op.adjointness_residual(4, seed) < 1e-12);
        let op = series::left_multiplier(&f.with_grade(4));
        prop_assert!(op.adjointness_residual(4, seed) < 1e-12);
    }

    #[test]
    fn radial_operator_is_positive(b in contraction(2, 2), r in 0.1..0.95f64) {
        let basis = WordBasis::new(2, 4).unwrap();
        let t = lebesgue::radial_operator(&b, r, &basis).unwrap();
        prop_assert!(t.self_adjointness_residual(4, 1) < 1e-12);
        prop_assert!(linalg::min_eigenvalue(&t.dense()) > -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn outer_factor_is_gauge_fixed_and_bounded(b in contraction_within(1, 3, 0.5), eps in 0.2..2.0f64) {
        let basis = WordBasis::new(1, 40).unwrap();
        let mut b = b.with_grade(40);
        b.coeffs_mut()[0] = C64::new(0.0, 0.0);
        let tau = measure::gram(&measure::clark_measure(&b).unwrap()).g;
        let op = factor::operator_from_matrix(&basis, tau);
        let f = factor::outer_factor(&op, eps, None).unwrap();
        prop_assert!(f.psi.coeffs()[0].im.abs() < 1e-14 && f.psi.coeffs()[0].re > 0.0);
        prop_assert!(f.residual < 1e-8, "residual {}", f.residual);
        let top = f.y_inv.to_dense().singular_values().max();
        prop_assert!(top <= 1.0 / eps.sqrt() + 1e-10);
        prop_assert!((f.y.apply(f.psi.coeffs())[0] - C64::new(1.0, 0.0)).norm() < 1e-10);
        let again = factor::outer_factor(&op, eps, None).unwrap();
        prop_assert_eq!(again.psi.coeffs(), f.psi.coeffs());
    }
}

#[test]
fn identity_operator_round_trips_through_dense() {
    let b = WordBasis::new(2, 3).unwrap();
    let id = TruncatedOperator::identity(&b);
    assert_eq!(id.to_dense(), DMatrix::identity(b.count(), b.count()));
}
