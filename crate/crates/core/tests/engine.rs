use std::f64::consts::{FRAC_PI_2, PI};

use kdqlab_core::kdq::{
    is_half_periodic, kd_joint, negativity, optimal_action, optimal_spectrum, overlap_direct,
    overlap_from_kd, reconstruct_state, sign_matches_phase, unitary_from_actions, weak_value,
    wrap_phase, ActionSpectrum,
};
use kdqlab_core::qcore::{inner, projector, Operator, OrthonormalBasis, StateVector, TOL};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(seed: u64, d: usize) -> (StateVector, OrthonormalBasis, OrthonormalBasis, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = StateVector::random(&mut rng, d).unwrap();
    let m = OrthonormalBasis::random(&mut rng, d).unwrap();
    let b = OrthonormalBasis::random(&mut rng, d).unwrap();
    (a, m, b, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn entries_match_triple_products(seed in any::<u64>(), d in 2usize..=4) {
        let (a, m, b, _) = setup(seed, d);
        let kd = kd_joint(&a, &m, &b).unwrap();
        for (mi, mv) in m.vectors().iter().enumerate() {
            for (bi, bv) in b.vectors().iter().enumerate() {
                // Tr(|b><b|m><m|a><a|) through explicit projector products
                let prod = projector(bv).checked_mul(&projector(mv)).unwrap()
                    .checked_mul(&projector(&a)).unwrap();
                prop_assert!((kd.entry(mi, bi) - prod.trace()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn normalized_entries_are_weak_values(seed in any::<u64>(), d in 2usize..=4) {
        let (a, m, b, _) = setup(seed, d);
        let kd = kd_joint(&a, &m, &b).unwrap();
        for bi in 0..d {
            let p_b = kd.post_selection_probability(bi);
            prop_assume!(p_b > 1e-6);
            for mi in 0..d {
                let w = weak_value(&a, b.vector(bi), &projector(m.vector(mi))).unwrap();
                prop_assert!((kd.entry(mi, bi) / p_b - w).norm() < 1e-8 * (1.0 + w.norm()));
            }
        }
    }

    #[test]
    fn optimal_phases_beat_random_phases(seed in any::<u64>(), d in 2usize..=4) {
        let (a, m, b, mut rng) = setup(seed, d);
        let kd = kd_joint(&a, &m, &b).unwrap();
        let bi = rng.random_range(0..d);
        let best = optimal_spectrum(&kd, bi).unwrap();
        let top = overlap_direct(&a, b.vector(bi), &unitary_from_actions(&best)).unwrap();
        for _ in 0..20 {
            let phases = (0..d).map(|_| rng.random_range(-PI..PI)).collect();
            let s = ActionSpectrum::new(m.clone(), phases).unwrap();
            let p = overlap_direct(&a, b.vector(bi), &unitary_from_actions(&s)).unwrap();
            prop_assert!(p <= top + 1e-9);
        }
        for mi in 0..d {
            let z = kd.entry(mi, bi);
            let phi = optimal_action(&kd, mi, bi).unwrap();
            prop_assert!(phi > -PI && phi <= PI);
            prop_assert!((Complex64::from_polar(z.norm(), phi) - z).norm() < 1e-12);
        }
    }

    #[test]
    fn sign_law_holds_entrywise(seed in any::<u64>(), d in 2usize..=4) {
        let (a, m, b, _) = setup(seed, d);
        let kd = kd_joint(&a, &m, &b).unwrap();
        for z in kd.table().iter() {
            prop_assert!(sign_matches_phase(*z));
            if z.norm() > TOL {
                prop_assert_eq!(z.re < 0.0, z.im.atan2(z.re).abs() > FRAC_PI_2);
            }
        }
    }

    #[test]
    fn reconstruction_round_trip(seed in any::<u64>(), d in 2usize..=4) {
        let (a, m, b, _) = setup(seed, d);
        let kd = kd_joint(&a, &m, &b).unwrap();
        let rho = reconstruct_state(&kd).unwrap();
        prop_assert!(rho.max_abs_diff(&projector(&a)).unwrap() < 1e-9);
        prop_assert!((rho.trace() - 1.0).norm() < 1e-9);
    }

    #[test]
    fn negativity_is_the_sum_of_negative_parts(seed in any::<u64>(), d in 2usize..=4) {
        let (a, m, b, _) = setup(seed, d);
        let kd = kd_joint(&a, &m, &b).unwrap();
        let report = negativity(&kd);
        let naive: f64 = kd.table().iter().filter(|z| z.re < 0.0).map(|z| -z.re).sum();
        prop_assert!((report.total_negativity - naive).abs() < 1e-15);
        let min = kd.table().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(report.min_real, min);
        prop_assert!(report.max_abs_phase <= PI);
    }

    #[test]
    fn half_periodic_spectra_square_to_a_phase(seed in any::<u64>(), d in 2usize..=4, base in -PI..PI) {
        let (_, m, _, mut rng) = setup(seed, d);
        let phases = (0..d).map(|_| base + if rng.random::<bool>() { PI } else { 0.0 }).collect();
        let s = ActionSpectrum::new(m, phases).unwrap();
        prop_assert!(is_half_periodic(&s));
        let u = unitary_from_actions(&s);
        let u2 = u.checked_mul(&u).unwrap();
        let phase = u2.entry(0, 0);
        prop_assert!(u2.max_abs_diff(&Operator::identity(d).scaled(phase)).unwrap() < 1e-12);
    }

    #[test]
    fn wrapped_phases_are_equivalent(phi in -50.0f64..50.0) {
        let w = wrap_phase(phi);
        prop_assert!(w > -PI && w <= PI);
        prop_assert!((Complex64::from_polar(1.0, w) - Complex64::from_polar(1.0, phi)).norm() < 1e-12);
    }
}

#[test]
fn overlap_needs_a_nonzero_column() {
    let a = StateVector::basis(2, 0).unwrap();
    let m = OrthonormalBasis::fourier(2).unwrap();
    let b = OrthonormalBasis::standard(2).unwrap();
    let kd = kd_joint(&a, &m, &b).unwrap();
    let s = ActionSpectrum::new(m, vec![0.0, PI]).unwrap();
    assert!(overlap_from_kd(&kd, &s, 1).is_err());
    // the direct route is still defined: a half turn maps |0> to |1>
    let p = overlap_direct(&a, b.vector(1), &unitary_from_actions(&s)).unwrap();
    assert!((p - 1.0).abs() < TOL);
    assert!(inner(&a, b.vector(1)).unwrap().norm() < TOL);
}
