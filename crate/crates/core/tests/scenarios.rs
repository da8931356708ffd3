use std::f64::consts::{FRAC_PI_2, PI};

use kdqlab_core::kdq::{marginals, overlap_direct, overlap_from_kd, unitary_from_actions};
use kdqlab_core::scenarios::{
    bell_chsh, cheshire_cat, hardy, leggett_garg, leggett_garg_closed_form, most_negative_angle,
    peres_mermin_swap, three_box, ScenarioReport,
};
use kdqlab_core::qcore::TOL;
use proptest::prelude::*;

fn built_in() -> Vec<ScenarioReport> {
    vec![
        leggett_garg(PI / 3.0).unwrap(),
        three_box().unwrap(),
        cheshire_cat().unwrap(),
        hardy().unwrap(),
        peres_mermin_swap().unwrap(),
        bell_chsh(PI / 4.0).unwrap().to_scenario_report(),
    ]
}

#[test]
fn every_scenario_passes_and_is_consistent() {
    for r in built_in() {
        assert!(r.passed(), "{}: {:?}", r.scenario, r.failed_checks().collect::<Vec<_>>());
        r.kd.check_invariants().unwrap();
        let marg = marginals(&r.kd).unwrap();
        assert!((marg.m.iter().sum::<f64>() - 1.0).abs() < TOL);
        assert!((marg.b.iter().sum::<f64>() - 1.0).abs() < TOL);
        assert_eq!(r.dim, r.kd.dim());
        // each paradox rests on a negative joint quasi-probability
        assert!(r.negativity.min_real < -TOL, "{}", r.scenario);
        assert!(r.violated_inequality.is_some(), "{}", r.scenario);
    }
}

#[test]
fn transformations_agree_on_both_routes() {
    for r in built_in() {
        let s = r.transformation.as_ref().expect("every scenario names a transformation");
        let u = unitary_from_actions(s);
        for b in 0..r.kd.dim() {
            if r.kd.post_selection_probability(b) > TOL {
                let direct = overlap_direct(r.kd.state(), r.kd.basis_b().vector(b), &u).unwrap();
                let via_kd = overlap_from_kd(&r.kd, s, b).unwrap();
                assert!((direct - via_kd).abs() < 1e-9, "{} column {b}", r.scenario);
            }
        }
    }
}

#[test]
fn grid_search_finds_sixty_degrees() {
    let (theta, value) = most_negative_angle(20_000).unwrap();
    assert!((theta - PI / 3.0).abs() < 1e-4);
    assert!((value + 0.125).abs() < 1e-8);
}

proptest! {
    #[test]
    fn leggett_garg_routes_agree(theta in 1e-3..PI - 1e-3) {
        let r = leggett_garg(theta).unwrap();
        prop_assert!(r.passed(), "{:?}", r.failed_checks().collect::<Vec<_>>());
        let entry = r.kd.entry(1, 0);
        prop_assert!((entry.re - leggett_garg_closed_form(theta)).abs() < 1e-10);
        prop_assert_eq!(r.violated_inequality.is_some(), theta < FRAC_PI_2 - 1e-6);
    }

    #[test]
    fn chsh_bound_tracks_negativity(theta in 0.0..FRAC_PI_2) {
        let r = bell_chsh(theta).unwrap();
        prop_assert!(r.passed(), "{:?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        for row in r.table_errors {
            for e in row {
                prop_assert!(e.abs() < 1e-10);
            }
        }
        prop_assert_eq!(r.k_expectation > 2.0 + 1e-9, r.p_k_minus2 < -1e-9 / 4.0);
    }
}
