use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use extremal_rmt::extremum::{self, extremal_bound, genus_exponent, kappa_table_rectangular, kappa_table_symmetric};
use extremal_rmt::montecarlo::{spectral_norm, Matrix};
use extremal_rmt::pairing::{Pairing, Taxonomy};
use extremal_rmt::profile::{ExactProfile, Kind, MatrixParams, VarianceProfile};
use extremal_rmt::rational::{self, int, ratio};
use extremal_rmt::tails::{bound_for_profile, small_dev_bound, Flavor, TailConstants};
use extremal_rmt::wick;
use extremal_rmt::wishart::build_table;

/// Entries `k/4`, so squares and their sums are exact in `f64`. Generated
/// profiles always have a nonzero entry.
fn quarter() -> impl Strategy<Value = f64> {
    (0u32..12).prop_map(|k| k as f64 / 4.0)
}

fn rect_profile() -> impl Strategy<Value = VarianceProfile> {
    (1usize..5, 1usize..5).prop_flat_map(|(n, m)| {
        prop::collection::vec(quarter(), n * m).prop_map(move |mut b| {
            if b.iter().all(|&v| v == 0.0) {
                b[0] = 1.0;
            }
            VarianceProfile::new(Kind::Rectangular, n, m, b).unwrap()
        })
    })
}

fn symmetric_b(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(quarter(), n * n).prop_map(move |mut b| {
        for i in 0..n {
            for j in 0..i {
                b[i * n + j] = b[j * n + i];
            }
        }
        if b.iter().all(|&v| v == 0.0) {
            b[0] = 1.0;
        }
        b
    })
}

fn self_adjoint_profile() -> impl Strategy<Value = VarianceProfile> {
    (1usize..5, prop_oneof![Just(Kind::Hermitian), Just(Kind::RealSymmetric)]).prop_flat_map(|(n, kind)| {
        symmetric_b(n).prop_map(move |b| VarianceProfile::new(kind, n, n, b).unwrap())
    })
}

/// A random pairing of `[2p]` from a sequence of choice digits.
fn pairing(pmax: usize) -> impl Strategy<Value = Pairing> {
    (1..=pmax).prop_flat_map(|p| {
        prop::collection::vec(any::<prop::sample::Index>(), p).prop_map(move |digits| {
            let mut free: Vec<usize> = (1..=2 * p).collect();
            let mut pairs = Vec::new();
            for d in digits {
                let a = free.remove(0);
                let b = free.remove(d.index(free.len()));
                pairs.push((a, b));
            }
            Pairing::from_pairs(&pairs).unwrap()
        })
    })
}

/// Exact profile with weights `a/b`, `a ∈ 0..=3`, `b ∈ 1..=2`, not all zero.
fn exact_profile(kind: Kind, max_n: usize) -> impl Strategy<Value = ExactProfile> {
    (1..=max_n, 1..=max_n).prop_flat_map(move |(n, m0)| {
        let m = if kind.is_self_adjoint() { n } else { m0 };
        prop::collection::vec((0i64..4, 1i64..3), n * m).prop_map(move |v| {
            let mut w: Vec<BigRational> = v.into_iter().map(|(a, b)| ratio(a, b)).collect();
            if kind.is_self_adjoint() {
                for i in 0..n {
                    for j in 0..i {
                        w[i * m + j] = w[j * m + i].clone();
                    }
                }
            }
            if w.iter().all(Zero::is_zero) {
                w[0] = BigRational::one();
            }
            ExactProfile::from_weights(kind, n, m, w).unwrap()
        })
    })
}

fn params_vec(p: &MatrixParams<f64>) -> [f64; 3] {
    match *p {
        MatrixParams::Rectangular { sigma1_sq, sigma2_sq, sigma_star_sq } => [sigma1_sq, sigma2_sq, sigma_star_sq],
        MatrixParams::SelfAdjoint { sigma_sq, sigma_tilde_sq, sigma_star_sq } => [sigma_sq, sigma_tilde_sq, sigma_star_sq],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rect_params_are_permutation_invariant(
        (prof, rows, cols) in rect_profile().prop_flat_map(|p| {
            let (n, m) = (p.n(), p.m());
            (Just(p), Just((0..n).collect::<Vec<_>>()).prop_shuffle(), Just((0..m).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let (n, m) = (prof.n(), prof.m());
        let b: Vec<f64> = (0..n * m).map(|x| prof.get(rows[x / m], cols[x % m])).collect();
        let permuted = VarianceProfile::new(Kind::Rectangular, n, m, b).unwrap();
        prop_assert_eq!(permuted.params(), prof.params());
    }

    #[test]
    fn self_adjoint_params_are_permutation_invariant(
        (prof, perm) in self_adjoint_profile().prop_flat_map(|p| {
            let n = p.n();
            (Just(p), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let n = prof.n();
        let b: Vec<f64> = (0..n * n).map(|x| prof.get(perm[x / n], perm[x % n])).collect();
        let permuted = VarianceProfile::new(prof.kind(), n, n, b).unwrap();
        prop_assert_eq!(permuted.params(), prof.params());
    }

    #[test]
    fn scaling_multiplies_params_by_square(prof in prop_oneof![rect_profile(), self_adjoint_profile()], s in 1u32..8) {
        let s = s as f64 / 2.0;
        let scaled = params_vec(&prof.scaled(s).unwrap().params());
        for (a, b) in scaled.iter().zip(params_vec(&prof.params())) {
            prop_assert_eq!(*a, b * s * s);
        }
    }

    #[test]
    fn sigma_star_is_smallest(prof in prop_oneof![rect_profile(), self_adjoint_profile()]) {
        match prof.params() {
            MatrixParams::Rectangular { sigma1_sq, sigma2_sq, sigma_star_sq } => {
                prop_assert!(sigma_star_sq <= sigma1_sq.min(sigma2_sq));
            }
            MatrixParams::SelfAdjoint { sigma_tilde_sq, sigma_star_sq, .. } => {
                prop_assert!(sigma_star_sq <= sigma_tilde_sq);
            }
        }
    }

    #[test]
    fn transpose_swaps_row_and_column_parameters(prof in rect_profile()) {
        let MatrixParams::Rectangular { sigma1_sq: a1, sigma2_sq: a2, sigma_star_sq: a3 } = prof.params() else { unreachable!() };
        let MatrixParams::Rectangular { sigma1_sq: b1, sigma2_sq: b2, sigma_star_sq: b3 } = prof.transpose().params() else { unreachable!() };
        prop_assert_eq!((a1, a2, a3), (b2, b1, b3));
    }

    #[test]
    fn noncrossing_pairings_have_a_consecutive_pair(pi in pairing(7)) {
        prop_assert_eq!(pi.is_noncrossing(), pi.crossings().is_empty());
        if pi.is_noncrossing() {
            prop_assert!((1..pi.len()).any(|k| pi.partner(k) == k + 1));
        }
    }

    #[test]
    fn every_crossing_gets_exactly_one_class(pi in pairing(6)) {
        for x in pi.crossings() {
            for tax in [Taxonomy::SelfAdjoint, Taxonomy::Rectangular] {
                // Totality: classification never fails on a genuine crossing.
                prop_assert!(pi.classify_crossing(&x, tax).is_ok());
            }
        }
    }

    #[test]
    fn genus_is_zero_exactly_on_noncrossing(pi in pairing(7)) {
        let ell = genus_exponent(&pi);
        prop_assert!(2 * ell <= pi.p());
        prop_assert_eq!(ell == 0, pi.is_noncrossing());
    }

    #[test]
    fn wick_contributions_are_nonnegative(prof in prop_oneof![
        exact_profile(Kind::RealSymmetric, 3),
        exact_profile(Kind::Hermitian, 3),
        exact_profile(Kind::Rectangular, 3),
    ], p in 1usize..4) {
        for c in wick::contributions(&prof, p).unwrap() {
            prop_assert!(c.matrix.iter().all(rational::is_nonnegative));
        }
    }

    #[test]
    fn symmetric_noncrossing_domination(prof in exact_profile(Kind::RealSymmetric, 3), p in 1usize..4) {
        let MatrixParams::SelfAdjoint { sigma_tilde_sq, .. } = prof.params() else { unreachable!() };
        let cap = rational::pow(&sigma_tilde_sq, p as u32);
        for c in wick::contributions(&prof, p).unwrap() {
            if c.pairing.is_noncrossing() {
                prop_assert!(c.max_diag <= cap);
            }
        }
    }

    #[test]
    fn rectangular_noncrossing_parity_bound(prof in exact_profile(Kind::Rectangular, 3), p in 1usize..4) {
        let MatrixParams::Rectangular { sigma1_sq, sigma2_sq, .. } = prof.params() else { unreachable!() };
        for c in wick::contributions(&prof, p).unwrap() {
            if c.pairing.is_noncrossing() {
                let ell = c.pairing.pairs().iter().filter(|(a, b)| a % 2 == 0 && b % 2 == 1).count();
                let cap = rational::pow(&sigma1_sq, ell as u32) * rational::pow(&sigma2_sq, (p - ell) as u32);
                prop_assert!(c.max_diag <= cap);
            }
        }
    }

    #[test]
    fn extremum_inequality(prof in prop_oneof![
        exact_profile(Kind::RealSymmetric, 3),
        exact_profile(Kind::Hermitian, 3),
        exact_profile(Kind::Rectangular, 3),
    ], p in 1usize..4) {
        prop_assume!(!prof.params().sigma_star_sq().is_zero());
        let moment = wick::moment(&prof, p).unwrap();
        let b = extremal_bound(&prof, p).unwrap();
        prop_assert!(moment <= b.at_params);
        prop_assert!(b.at_params <= b.at_ceilings);
    }

    #[test]
    fn moments_are_monotone_in_the_weights(prof in exact_profile(Kind::Rectangular, 3), p in 1usize..4, at in any::<prop::sample::Index>()) {
        let (n, m) = (prof.n(), prof.m());
        let mut w = prof.weights().to_vec();
        let k = at.index(w.len());
        w[k] += BigRational::one();
        let bigger = ExactProfile::from_weights(Kind::Rectangular, n, m, w).unwrap();
        prop_assert!(wick::moment(&prof, p).unwrap() <= wick::moment(&bigger, p).unwrap());
    }

    #[test]
    fn polynomials_are_monotone(x in 0i64..6, y in 0i64..6, s in 0i64..3, p in 1usize..5) {
        for poly in [kappa_table_symmetric(p).unwrap(), kappa_table_rectangular(p).unwrap()] {
            let base = poly.evaluate(&int(x), &int(y), &int(s));
            prop_assert!(poly.evaluate(&int(x + 1), &int(y), &int(s)) >= base);
            prop_assert!(poly.evaluate(&int(x), &int(y + 1), &int(s)) >= base);
            prop_assert!(poly.evaluate(&int(x), &int(y), &int(s + 1)) >= base);
        }
    }

    #[test]
    fn wishart_order_relations(n in 1usize..8, extra in 0usize..8, pmax in 1usize..30) {
        let t = build_table(n, n + extra, pmax).unwrap();
        for p in 0..=pmax {
            prop_assert!(t.a_prime[p] <= t.a[p]);
            prop_assert!(t.a[p] <= t.b[p]);
            prop_assert!(rational::is_nonnegative(&t.d[p]));
        }
    }

    #[test]
    fn tail_probability_is_monotone_and_capped(prof in prop_oneof![rect_profile(), self_adjoint_profile()], flavor in prop_oneof![Just(Flavor::SmallDev), Just(Flavor::LargeDev), Just(Flavor::PropForm)]) {
        let consts = TailConstants::default();
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..40 {
            let t = k as f64 * 0.05;
            match bound_for_profile(&prof, flavor, t, &consts) {
                Ok(b) => {
                    prop_assert!(b.prob <= 1.0);
                    prop_assert_eq!(b.capped, b.raw_prob >= 1.0);
                    if let Some((pt, pp)) = prev {
                        prop_assert!(b.threshold >= pt);
                        prop_assert!(b.prob <= pp);
                    }
                    prev = Some((b.threshold, b.prob));
                }
                Err(_) => break,
            }
        }
    }

    #[test]
    fn tail_bound_is_transpose_symmetric(prof in rect_profile(), t in 0u32..10) {
        let t = t as f64 / 10.0;
        let a = bound_for_profile(&prof, Flavor::SmallDev, t, &TailConstants::default());
        let b = bound_for_profile(&prof.transpose(), Flavor::SmallDev, t, &TailConstants::default());
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "one orientation failed: {:?} / {:?}", a, b),
        }
    }

    #[test]
    fn power_iteration_matches_svd(rows in 1usize..7, cols in 1usize..7, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = Matrix::from_rows(rows, cols, data.clone());
        let est = spectral_norm(&x, 1e-13, 200_000).unwrap();
        let svd = nalgebra::DMatrix::from_row_slice(rows, cols, &data).singular_values().max();
        prop_assert!((est - svd).abs() <= 1e-6 * svd.max(1e-300), "{} vs {}", est, svd);
        prop_assert!(est >= x.max_abs() * (1.0 - 1e-9));
    }

    #[test]
    fn rationals_round_trip_through_text(num in -10_000i64..10_000, den in 1i64..10_000) {
        let r = ratio(num, den);
        prop_assert_eq!(rational::parse(&rational::exact_string(&r)).unwrap(), r.clone());
        let d: f64 = rational::decimal_string(&r).parse().unwrap();
        prop_assert_eq!(d, num as f64 / den as f64);
    }
}

#[test]
fn real_moments_dominate_complex_ones() {
    for n in 1..=3 {
        for m in 1..=3 {
            let prof = ExactProfile::ones(Kind::Rectangular, n, m).unwrap();
            for p in 1..=4 {
                assert!(wick::moment_rect_real(&prof, p).unwrap() >= wick::moment_rect_complex(n, m, p).unwrap());
            }
        }
    }
}

#[test]
fn hermitian_mass_is_double_factorial() {
    for p in 0..=7 {
        let poly = extremum::hermitian_polynomial(p).unwrap();
        assert_eq!(poly.mass(), extremal_rmt::pairing::pairing_count(p));
    }
}

#[test]
fn small_deviation_threshold_matches_iid_form() {
    let prof = extremal_rmt::profile::make_profile(Kind::Rectangular, &extremal_rmt::profile::Generator::Iid { n: 200, m: 200 }).unwrap();
    let b = small_dev_bound(Kind::Rectangular, &prof.params(), 200, 2.0, &TailConstants::default()).unwrap();
    let expect = 2.0 * 200f64.sqrt() + 200f64.powf(-1.0 / 6.0) * 2.0;
    assert!((b.threshold - expect).abs() < 1e-12);
}
