mod common;

use common::random_model;
use omega_core::baselines::{
    closest_approximant, degenerate_mix, hum_roots, make_pathology, PathologyParams,
};
use omega_core::ensemble::{random_perturbation, random_unit, seeded_rng};
use omega_core::model_space::{energy, spectral_decompose, subspace_eigenpairs, StateVector};
use omega_core::models::{he_model, he_phi0, he_phi1, HE_ENERGIES};
use omega_core::optimizer::{minimize_energy_orthogonal, OptimizerConfig};
use rand::Rng;

#[test]
fn he_example_numbers() {
    let p = make_pathology(&PathologyParams::helium()).unwrap();
    assert!((p.a - 0.9476).abs() < 5e-5 && (p.b - 0.3194).abs() < 5e-5);
    assert!((p.a - 0.9476198566119825).abs() < 1e-15);
    assert!((p.b - 0.3194003872174948).abs() < 1e-15);
    let e0 = energy(&p.h, &p.phi0).unwrap();
    let e1 = energy(&p.h, &p.phi1).unwrap();
    assert!((e0 - -2.817).abs() < 1e-12);
    assert!((e1 - -2.146).abs() < 1e-12);
    assert_eq!(p.phi1.components()[1], 0.0);
    assert!(p.phi0.overlap(&p.phi1).abs() < 1e-15);
}

#[test]
fn generic_pathology_energies() {
    let params = PathologyParams {
        e0: 0.0,
        e1: 1.0,
        e2: 1.1,
        epsilon: 0.01,
    };
    let p = make_pathology(&params).unwrap();
    assert!((energy(&p.h, &p.phi0).unwrap() - 0.11).abs() < 1e-12);
    assert!((energy(&p.h, &p.phi1).unwrap() - 0.99).abs() < 1e-12);
    assert!(p.phi0.overlap(&p.phi1).abs() < 1e-12);
    assert!((p.phi0.as_vector().norm() - 1.0).abs() < 1e-12);
}

#[test]
fn pathology_exact_ground_relation() {
    let mut rng = seeded_rng(40);
    for _ in 0..100 {
        let e0 = rng.random::<f64>() * 2.0 - 1.0;
        let e1 = e0 + 0.1 + rng.random::<f64>();
        let e2 = e1 + 0.01 + rng.random::<f64>();
        let epsilon = rng.random::<f64>() * (e1 - e0) * 0.9;
        let p = make_pathology(&PathologyParams {
            e0,
            e1,
            e2,
            epsilon,
        })
        .unwrap();
        let e_phi0 = energy(&p.h, &p.phi0).unwrap();
        assert!((e_phi0 - (e0 + e2 - (e1 - epsilon))).abs() < 1e-12);
        assert!((energy(&p.h, &p.phi1).unwrap() - (e1 - epsilon)).abs() < 1e-12);
    }
}

#[test]
fn pathology_witness_below_first_excited_energy() {
    let params = PathologyParams {
        epsilon: 0.01,
        ..PathologyParams::helium()
    };
    let p = make_pathology(&params).unwrap();
    let start = StateVector::normalized(
        p.phi1.as_vector() * 0.8 + StateVector::basis(3, 1).as_vector() * 0.6,
    )
    .unwrap();
    let trace = minimize_energy_orthogonal(
        &p.h,
        std::slice::from_ref(&p.phi0),
        &start,
        &OptimizerConfig::default(),
    )
    .unwrap();
    assert!(p.phi1.overlap(&p.phi0).abs() < 1e-12);
    assert!((energy(&p.h, &p.phi1).unwrap() - (HE_ENERGIES[1] - 0.01)).abs() < 1e-12);
    assert!(trace.final_value <= HE_ENERGIES[1] - 0.01 + 1e-10);
    assert!(trace.final_state.overlap(&p.phi1).abs() > 1.0 - 1e-8);
    assert!(trace.final_state.components()[1].abs() < 1e-6);
}

#[test]
fn closest_approximant_energy_identity() {
    let mut rng = seeded_rng(41);
    for seed in 0..200u64 {
        let dim = 3 + (seed as usize % 6);
        let (h, spec) = random_model(dim, 100 + seed);
        let phi0 = random_unit(dim, &mut rng);
        let c = closest_approximant(&h, &spec, &phi0, 1).unwrap();
        assert!((c.energy - c.energy_formula).abs() < 1e-12);
        assert!(c.state.overlap(&phi0).abs() < 1e-14);
        if energy(&h, &phi0).unwrap() < spec.energy(1) && c.overlap.abs() > 1e-8 {
            assert!(c.energy < spec.energy(1));
        }
    }
}

#[test]
fn inequality_chain_with_hum_bound() {
    let mut rng = seeded_rng(42);
    let mut tested = 0;
    let mut seed = 0u64;
    while tested < 100 {
        seed += 1;
        let dim = 3 + (seed as usize % 6);
        let (h, spec) = random_model(dim, 3000 + seed);
        let phi0 = random_perturbation(spec.vector(0), 0.6 * rng.random::<f64>(), &mut rng);
        if energy(&h, &phi0).unwrap() >= spec.energy(1) {
            continue;
        }
        let plus = closest_approximant(&h, &spec, &phi0, 1).unwrap();
        let min = minimize_energy_orthogonal(
            &h,
            std::slice::from_ref(&phi0),
            &plus.state,
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!(min.final_value <= plus.energy + 1e-9);
        assert!(plus.energy < spec.energy(1) + 1e-9);
        if plus.overlap.abs() > 1e-6 {
            assert!(plus.energy < spec.energy(1));
        }
        let roots = hum_roots(&h, &[phi0, min.final_state]).unwrap();
        assert!(roots[0] >= spec.energy(0) - 1e-10);
        assert!(roots[1] >= spec.energy(1) - 1e-10);
        tested += 1;
    }
}

#[test]
fn he_secular_roots() {
    let roots = hum_roots(&he_model(), &[he_phi0(), he_phi1()]).unwrap();
    assert!((roots[0] - -2.903).abs() < 1e-12);
    assert!((roots[1] - -2.06).abs() < 1e-12);
    assert!(roots[1] >= HE_ENERGIES[1]);
    let spec = spectral_decompose(&he_model()).unwrap();
    assert_eq!(
        hum_roots(&he_model(), spec.vectors()).unwrap(),
        HE_ENERGIES.to_vec()
    );
}

#[test]
fn hum_bound_on_perturbed_eigenvector_bases() {
    let mut rng = seeded_rng(43);
    for seed in 0..500u64 {
        let dim = 3 + (seed as usize % 8);
        let (h, spec) = random_model(dim, 8000 + seed);
        let m = 1 + rng.random_range(0..dim);
        let basis: Vec<StateVector> = (0..m)
            .map(|k| random_perturbation(spec.vector(k), 0.3, &mut rng))
            .collect();
        let Ok(roots) = hum_roots(&h, &basis) else {
            continue;
        };
        for (k, r) in roots.iter().enumerate() {
            assert!(*r >= spec.energy(k) - 1e-10);
        }
    }
}

#[test]
fn he_degenerate_mix_reproduces_example_state() {
    let h = he_model();
    let psi0 = StateVector::basis(3, 0);
    let psi2 = StateVector::basis(3, 2);
    let mix = degenerate_mix(
        &h,
        &psi0,
        &psi2,
        HE_ENERGIES[0],
        HE_ENERGIES[2],
        HE_ENERGIES[1],
        -1.0,
    )
    .unwrap();
    assert!((mix.components()[0] - 0.3194).abs() < 5e-5);
    assert!((mix.components()[2] + 0.9476).abs() < 5e-5);
    assert!((mix.overlap(&he_phi1()) - 1.0).abs() < 1e-15);
    assert!((energy(&h, &mix).unwrap() - HE_ENERGIES[1]).abs() < 1e-14);
}

#[test]
fn degenerate_mix_hits_target_energy() {
    let mut rng = seeded_rng(44);
    for seed in 0..200u64 {
        let dim = 3 + (seed as usize % 6);
        let (h, _) = random_model(dim, 9000 + seed);
        let a = random_unit(dim, &mut rng);
        let b = random_unit(dim, &mut rng);
        let ritz = subspace_eigenpairs(&h, &[a, b]).unwrap();
        let (lo, hi) = (ritz.energies[0], ritz.energies[1]);
        let target = lo + rng.random::<f64>() * (hi - lo);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let mix =
            degenerate_mix(&h, &ritz.vectors[0], &ritz.vectors[1], lo, hi, target, sign).unwrap();
        assert!((energy(&h, &mix).unwrap() - target).abs() < 1e-10);
        assert!((mix.as_vector().norm() - 1.0).abs() < 1e-12);
    }
}
