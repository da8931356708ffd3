use kdqlab_core::kdq::weak_value;
use kdqlab_core::qcore::{OrthonormalBasis, StateVector};
use kdqlab_core::scenarios::three_box;
use kdqlab_core::weaksim::{
    conditional_pointer_mean, observable, pointer_joint_density, sample, PointerConfig,
    PointerModel,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_model(seed: u64, d: usize) -> (PointerModel, PointerConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = StateVector::random(&mut rng, d).unwrap();
    let m = OrthonormalBasis::random(&mut rng, d).unwrap();
    let b = OrthonormalBasis::random(&mut rng, d).unwrap();
    let kappa = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
    let cfg = PointerConfig::new(rng.random_range(0.2..2.0), rng.random_range(0.05..5.0), kappa).unwrap();
    (PointerModel::new(&a, &m, &b, &cfg).unwrap(), cfg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_quadrature(seed in any::<u64>(), d in 2usize..=4) {
        let (model, _) = random_model(seed, d);
        let mut total = 0.0;
        for b in 0..d {
            let q = model.quadrature(b).unwrap();
            total += q.mass;
            prop_assert!((q.mass - model.mass(b).unwrap()).abs() < 1e-10);
            if model.mass(b).unwrap() > 1e-6 {
                let closed = model.conditional_mean(b).unwrap();
                prop_assert!((q.mean.unwrap() - closed).abs() < 1e-8, "{} vs {}", q.mean.unwrap(), closed);
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn density_is_never_negative(seed in any::<u64>(), x in -20.0f64..20.0) {
        let (model, _) = random_model(seed, 3);
        for b in 0..3 {
            prop_assert!(model.density(x, b) >= 0.0);
        }
    }
}

#[test]
fn weak_limit_error_shrinks_quadratically() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let d = 3;
        let a = StateVector::random(&mut rng, d).unwrap();
        let m = OrthonormalBasis::random(&mut rng, d).unwrap();
        let b = OrthonormalBasis::random(&mut rng, d).unwrap();
        let kappa = vec![-1.0, 0.5, 2.0];
        let w = weak_value(&a, b.vector(0), &observable(&m, &kappa).unwrap()).unwrap().re;
        let errors: Vec<f64> = [8.0, 16.0, 32.0]
            .iter()
            .map(|&ratio| {
                let cfg = PointerConfig::with_ratio(1.0, ratio, kappa.clone()).unwrap();
                (conditional_pointer_mean(&a, &m, &b, &cfg, 0).unwrap() - w).abs()
            })
            .collect();
        for pair in errors.windows(2) {
            assert!(pair[0] / pair[1] >= 3.0, "{errors:?}");
        }
    }
}

#[test]
fn unconditioned_pointer_reads_the_expectation_value() {
    // with b = a the mean tends to <a|A|a>
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = StateVector::random(&mut rng, 3).unwrap();
    let m = OrthonormalBasis::random(&mut rng, 3).unwrap();
    let mut rest = OrthonormalBasis::random(&mut rng, 3).unwrap().vectors().to_vec();
    // Gram-Schmidt a into the first slot of a basis
    let mut vectors = vec![a.clone()];
    for v in rest.drain(..) {
        let mut x = v.as_vector().clone();
        for u in &vectors {
            let c = u.as_vector().dotc(&x);
            x -= u.as_vector() * c;
        }
        if x.norm() > 1e-6 && vectors.len() < 3 {
            vectors.push(StateVector::from_dvector(x).unwrap());
        }
    }
    let b = OrthonormalBasis::from_vectors(vectors).unwrap();
    let kappa = vec![0.3, -1.2, 2.0];
    let expect = observable(&m, &kappa).unwrap().expectation(&a).unwrap().re;
    let cfg = PointerConfig::with_ratio(1.0, 1e4, kappa).unwrap();
    let mean = conditional_pointer_mean(&a, &m, &b, &cfg, 0).unwrap();
    assert!((mean - expect).abs() < 1e-6);
}

#[test]
fn free_functions_agree_with_the_model() {
    let r = three_box().unwrap();
    let (a, m, b) = (r.kd.state(), r.kd.basis_m(), r.kd.basis_b());
    let cfg = PointerConfig::new(0.5, 1.5, vec![0.0, 0.0, 1.0]).unwrap();
    let model = PointerModel::new(a, m, b, &cfg).unwrap();
    assert_eq!(pointer_joint_density(a, m, b, &cfg, 0.2, 1).unwrap(), model.density(0.2, 1));
    assert!(pointer_joint_density(a, m, b, &cfg, 0.2, 7).is_err());
    assert_eq!(sample(a, m, b, &cfg, 100, 4).unwrap(), model.sample(100, 4).unwrap());
}

#[test]
fn empirical_means_converge() {
    let r = three_box().unwrap();
    let (a, m, b) = (r.kd.state(), r.kd.basis_m(), r.kd.basis_b());
    let cfg = PointerConfig::new(1.0, 3.0, vec![0.0, 0.0, 1.0]).unwrap();
    let model = PointerModel::new(a, m, b, &cfg).unwrap();
    let batch = model.sample(200_000, 42).unwrap();
    assert_eq!(batch.records.len(), 200_000);
    for k in 0..3 {
        let emp = batch.conditional(k).unwrap();
        let p = emp.count as f64 / 200_000.0;
        let mass = model.mass(k).unwrap();
        assert!((p - mass).abs() < 5.0 * (mass * (1.0 - mass) / 200_000.0).sqrt());
        let mean = model.conditional_mean(k).unwrap();
        assert!((emp.mean - mean).abs() < 5.0 * emp.standard_error(), "b={k}");
    }
}
