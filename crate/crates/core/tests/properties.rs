use std::sync::Arc;

use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hz_core::cusp::split_sublattices;
use hz_core::fqm::FqModule;
use hz_core::lattice::{build_lattice, HilbertLattice};
use hz_core::qseries::{DirectSum, QSeries};
use hz_core::rat::{int, rat, Rat};
use hz_core::theta::{k_module, unary_theta};
use hz_core::verify::random_series;

const FUNDAMENTAL: [i64; 10] = [5, 8, 12, 13, 17, 21, 24, 28, 29, 33];

fn d5() -> HilbertLattice {
    build_lattice(5).unwrap()
}

fn split_sum(lat: &HilbertLattice) -> hz_core::cusp::SublatticeSplit {
    split_sublattices(lat, &lat.vector_i([-3, -3, 0, 1]).unwrap()).unwrap()
}

fn conj_max_diff(a: &[Vec<num_complex::Complex64>], b: &[Vec<num_complex::Complex64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y.conj()).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weil_relations(idx in 0..FUNDAMENTAL.len()) {
        let lat = build_lattice(FUNDAMENTAL[idx]).unwrap();
        for r in lat.fq.relation_residuals() {
            prop_assert!(r < 1e-12);
        }
        prop_assert!(lat.fq.milgram_residual() < 1e-10);
        let dual = lat.fq.dual();
        prop_assert!(conj_max_diff(&dual.weil_s(), &lat.fq.weil_s()) < 1e-12);
        prop_assert!(conj_max_diff(&dual.weil_t_matrix(), &lat.fq.weil_t_matrix()) < 1e-12);
    }

    #[test]
    fn group_action_preserves_the_pairing(seed in any::<u64>()) {
        let lat = d5();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = lat.random_element(&mut rng, 5);
        let mut v = || lat.vector((0..4).map(|i| if i < 2 { int(rng.gen_range(-9..9)) } else { rat(rng.gen_range(-9..9), 1) }).collect()).unwrap();
        let (x, y) = (v(), v());
        let (gx, gy) = (lat.act(&g, &x).unwrap(), lat.act(&g, &y).unwrap());
        prop_assert_eq!(lat.pair(&gx.coords, &gy.coords), lat.pair(&x.coords, &y.coords));
        prop_assert_eq!(gx.norm, x.norm);
    }

    #[test]
    fn enumeration_is_symmetric_under_negation(j in 1i64..25, beta in 0usize..5) {
        let lat = d5();
        let n = rat(-j, 5);
        let nb = lat.fq.neg(beta);
        let a = lat.enumerate_vectors(beta, &n, 2);
        let b = lat.enumerate_vectors(nb, &n, 2);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.len(), b.len()),
            (a, b) => prop_assert!(a.is_err() && b.is_err()),
        }
    }

    #[test]
    fn arrow_maps_are_adjoint(seed in any::<u64>()) {
        let lat = d5();
        let split = split_sum(&lat);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_series(&mut rng, &lat.fq, true, int(-2), 10);
        let g = random_series(&mut rng, &split.sub.k, false, int(4), 10);
        let down = split.sub.arrow_down(&f).unwrap();
        let up = split.sub.arrow_up(&g).unwrap();
        prop_assert_eq!(down.ct_pair(&g).unwrap(), f.ct_pair(&up).unwrap());
        down.check_grading().unwrap();
        up.check_grading().unwrap();
    }

    #[test]
    fn derivative_commutes_with_arrows(seed in any::<u64>(), r in 0u32..4) {
        let lat = d5();
        let split = split_sum(&lat);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_series(&mut rng, &lat.fq, true, int(-2), 10);
        let g = random_series(&mut rng, &split.sub.k, false, int(4), 10);
        prop_assert_eq!(split.sub.arrow_down(&f.derivative(r)).unwrap().coeffs, split.sub.arrow_down(&f).unwrap().derivative(r).coeffs);
        prop_assert_eq!(split.sub.arrow_up(&g.derivative(r)).unwrap().coeffs, split.sub.arrow_up(&g).unwrap().derivative(r).coeffs);
    }

    #[test]
    fn bracket_of_equal_weights_is_graded_antisymmetric(seed in any::<u64>(), n in 0u32..4) {
        let a = k_module(3).unwrap();
        let sum = DirectSum::new(a.clone(), a.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_series(&mut rng, &a, false, rat(1, 2), 6);
        let g = random_series(&mut rng, &a, false, rat(1, 2), 6);
        let mut swap = vec![0; sum.fq.order()];
        for i in 0..a.order() {
            for j in 0..a.order() {
                swap[sum.map[i][j]] = sum.map[j][i];
            }
        }
        let fg = f.rc_bracket(&g, n, &sum).unwrap();
        let gf = g.rc_bracket(&f, n, &sum).unwrap().transport(&swap, sum.fq.clone()).unwrap();
        let gf = if n % 2 == 1 { gf.neg() } else { gf };
        fg.check_grading().unwrap();
        prop_assert_eq!(fg.coeffs, gf.coeffs);
    }

    #[test]
    fn pairing_is_bilinear(seed in any::<u64>()) {
        let lat = d5();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f1 = random_series(&mut rng, &lat.fq, true, int(-2), 8);
        let f2 = random_series(&mut rng, &lat.fq, true, int(-2), 8);
        let g = random_series(&mut rng, &lat.fq, false, int(4), 8);
        let lhs = f1.add(&f2).unwrap().ct_pair(&g).unwrap();
        let rhs = f1.ct_pair(&g).unwrap().add(&f2.ct_pair(&g).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn series_json_round_trips(seed in any::<u64>(), dual in any::<bool>()) {
        let lat = d5();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_series(&mut rng, &lat.fq, dual, int(-2), 12);
        let back = QSeries::from_json(&f.to_json(), lat.fq.clone()).unwrap();
        prop_assert_eq!(back.coeffs, f.coeffs);
        prop_assert_eq!(back.weight, f.weight);
    }
}

fn neg_symmetric(t: &QSeries, fq: &Arc<FqModule>, sign: i64) -> bool {
    t.coeffs.iter().all(|((n, b), c)| t.get(fq.neg(*b), n) == c * int(sign))
}

#[test]
fn unary_theta_parity_in_the_coset() {
    for n in 1..=6 {
        let fq = k_module(n).unwrap();
        assert!(neg_symmetric(&unary_theta(&fq, 0, &int(6)).unwrap(), &fq, 1));
        assert!(neg_symmetric(&unary_theta(&fq, 1, &int(6)).unwrap(), &fq, -1));
    }
}

#[test]
fn weak_forms_are_symmetric_and_rational() {
    let lat = d5();
    let basis = hz_core::wforms::plus_space_basis(&lat, 4, &rat(6, 5), &int(10)).unwrap();
    assert!(!basis.is_empty());
    for f in &basis {
        assert_eq!(f.series.radicand, 1);
        assert!(neg_symmetric(&f.series, &lat.fq, 1));
        assert!(f.principal_part().iter().all(|(_, m, _)| *m > Rat::zero()));
    }
}
