mod common;

use common::random_model;
use nalgebra::DVector;
use omega_core::ensemble::{random_perturbation, random_unit, seeded_rng};
use omega_core::functional::{estimate_curvature_t, omega, OmegaProblem, SteepeningParams};
use omega_core::model_space::{energy, spectral_decompose, subspace_eigenpairs, StateVector};
use omega_core::models::{he_model, he_phi0, he_trial, HE_DEMO_START, HE_ENERGIES};
use omega_core::optimizer::{
    minimize_energy_orthogonal, minimize_omega, minimize_omega_multistart, minimize_steepened,
    OptimizerConfig, Termination,
};
use rand::Rng;
use std::time::Instant;

fn he_start() -> StateVector {
    he_trial(HE_DEMO_START.0, HE_DEMO_START.1).unwrap()
}

#[test]
fn he_demonstration_converges_to_first_excited_state() {
    let clock = Instant::now();
    let problem = OmegaProblem::new(he_model(), vec![he_phi0()]).unwrap();
    let trace = minimize_omega(&problem, &he_start(), &OptimizerConfig::default()).unwrap();
    let x = trace.final_state.components();
    let sign = x[1].signum();
    assert!(
        (x[0] * sign).abs() < 1e-8 && (x[2] * sign).abs() < 1e-8,
        "c = {:e}, d = {:e}",
        x[0],
        x[2]
    );
    assert!((trace.final_value - HE_ENERGIES[1]).abs() < 1e-8);
    assert!(matches!(
        trace.termination,
        Termination::GradientConverged | Termination::StepConverged
    ));
    assert!(clock.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn multistart_finds_first_excited_state_in_random_models() {
    let mut rng = seeded_rng(14);
    for seed in 0..20u64 {
        let (h, spec) = random_model(6, 60 + seed);
        let phi0 = random_perturbation(spec.vector(0), 0.05, &mut rng);
        let problem = OmegaProblem::new(h, vec![phi0]).unwrap();
        let cfg = OptimizerConfig {
            seed,
            ..OptimizerConfig::with_tol(1e-8)
        };
        let result = minimize_omega_multistart(&problem, None, &cfg).unwrap();
        assert_eq!(result.runs.len(), cfg.restart_count);
        let best = result.best_trace();
        assert!(result
            .runs
            .iter()
            .all(|r| r.trace.final_value >= best.final_value));
        let overlap = best.final_state.overlap(spec.vector(1)).abs();
        assert!(overlap >= 0.999, "seed {seed}: overlap {overlap}");
    }
}

/// Orthonormal basis of the complement of `constraints`, from Householder QR
/// of `[constraints | I]`.
fn complement_basis(constraints: &[StateVector], dim: usize) -> Vec<StateVector> {
    let k = constraints.len();
    let m = nalgebra::DMatrix::from_fn(dim, k + dim, |r, c| {
        if c < k {
            constraints[c].as_vector()[r]
        } else if r == c - k {
            1.0
        } else {
            0.0
        }
    });
    let q = m.qr().q();
    (k..dim)
        .map(|c| StateVector::normalized(q.column(c).into_owned()).unwrap())
        .collect()
}

#[test]
fn constrained_minimum_matches_restricted_ground_state() {
    let mut rng = seeded_rng(5);
    for instance in 0..200u64 {
        let dim = 3 + (instance as usize % 6);
        let (h, _) = random_model(dim, 2000 + instance);
        let k = 1 + rng.random_range(0..dim - 1);
        let constraints: Vec<StateVector> = (0..k).map(|_| random_unit(dim, &mut rng)).collect();
        let complement = complement_basis(&constraints, dim);
        let oracle = subspace_eigenpairs(&h, &complement).unwrap().energies[0];
        let weights = DVector::from_fn(complement.len(), |_, _| rng.random::<f64>() - 0.5);
        let mut v = DVector::zeros(dim);
        for (w, c) in weights.iter().zip(&complement) {
            v.axpy(*w, c.as_vector(), 1.0);
        }
        let start = StateVector::normalized(v).unwrap();
        let cfg = OptimizerConfig {
            record_path: true,
            ..OptimizerConfig::default()
        };
        let trace = minimize_energy_orthogonal(&h, &constraints, &start, &cfg).unwrap();
        assert!(
            (trace.final_value - oracle).abs() < 1e-8,
            "instance {instance}: {} vs {oracle}",
            trace.final_value
        );
        for state in &trace.path {
            assert!((state.as_vector().norm() - 1.0).abs() < 1e-12);
            for c in &constraints {
                assert!(state.overlap(c).abs() < 1e-10);
            }
        }
        assert_monotone(&trace.samples);
    }
}

fn assert_monotone(samples: &[omega_core::optimizer::TraceSample]) {
    for w in samples.windows(2) {
        let slack = 1e-14 * w[0].objective.abs().max(1.0);
        assert!(
            w[1].objective <= w[0].objective + slack,
            "objective rose from {} to {}",
            w[0].objective,
            w[1].objective
        );
    }
}

#[test]
fn omega_descent_is_monotone_and_unit_norm() {
    let mut rng = seeded_rng(6);
    for seed in 0..30u64 {
        let (h, spec) = random_model(5, 4000 + seed);
        let phi0 = random_perturbation(spec.vector(0), 0.1, &mut rng);
        let problem = OmegaProblem::new(h, vec![phi0]).unwrap();
        let start = random_perturbation(spec.vector(1), 0.4, &mut rng);
        if !problem.is_feasible(&start) {
            continue;
        }
        let cfg = OptimizerConfig {
            record_path: true,
            ..OptimizerConfig::default()
        };
        let trace = minimize_omega(&problem, &start, &cfg).unwrap();
        assert_monotone(&trace.samples);
        assert_eq!(trace.path.len(), trace.iterations + 1);
        for state in &trace.path {
            assert!((state.as_vector().norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn fixed_seed_is_bit_reproducible() {
    let (h, spec) = random_model(7, 31);
    let phi0 = random_perturbation(spec.vector(0), 0.05, &mut seeded_rng(1));
    let problem = OmegaProblem::new(h, vec![phi0]).unwrap();
    let cfg = OptimizerConfig {
        seed: 99,
        restart_count: 4,
        ..OptimizerConfig::default()
    };
    let a = minimize_omega_multistart(&problem, None, &cfg).unwrap();
    let b = minimize_omega_multistart(&problem, None, &cfg).unwrap();
    assert_eq!(a.best, b.best);
    for (x, y) in a.runs.iter().zip(&b.runs) {
        assert_eq!(x.trace.iterations, y.trace.iterations);
        assert_eq!(x.trace.final_value.to_bits(), y.trace.final_value.to_bits());
        assert_eq!(x.trace.final_state, y.trace.final_state);
    }
}

#[test]
fn infeasible_inputs_are_rejected() {
    let problem = OmegaProblem::new(he_model(), vec![he_phi0()]).unwrap();
    let below = StateVector::basis(3, 0);
    assert_eq!(
        minimize_omega(&problem, &below, &OptimizerConfig::default())
            .unwrap_err()
            .kind(),
        "InfeasibleStart"
    );
    let h = he_model();
    let all: Vec<StateVector> = (0..3).map(|k| StateVector::basis(3, k)).collect();
    assert_eq!(
        minimize_energy_orthogonal(&h, &all, &all[0], &OptimizerConfig::default())
            .unwrap_err()
            .kind(),
        "EmptyComplement"
    );
    assert_eq!(
        minimize_energy_orthogonal(&h, &all[..1], &all[0], &OptimizerConfig::default())
            .unwrap_err()
            .kind(),
        "InfeasibleStart"
    );
    let bad = OptimizerConfig {
        backtrack_factor: 1.5,
        ..OptimizerConfig::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn steepened_joint_minimization_matches_plain_omega() {
    let problem = OmegaProblem::new(he_model(), vec![he_phi0()]).unwrap();
    let start = he_start();
    let params = SteepeningParams {
        scale_n: 1.0,
        curvature_t: estimate_curvature_t(&problem, &start).unwrap(),
        e_f: omega(&problem, &start).unwrap(),
    };
    let cfg = OptimizerConfig::default();
    let joint = minimize_steepened(&problem, &start, &params, &cfg).unwrap();
    let plain = minimize_omega(&problem, &start, &cfg).unwrap();
    let spec = spectral_decompose(&he_model()).unwrap();
    let psi1 = spec.vector(1);
    assert!(joint.trace.final_state.overlap(psi1).abs() >= 1.0 - 1e-8);
    assert!(joint.trace.final_state.overlap(&plain.final_state).abs() >= 1.0 - 1e-8);
    assert!((joint.f_scaled - HE_ENERGIES[1]).abs() < 1e-6);
    assert!((joint.params.e_f - HE_ENERGIES[1]).abs() < 1e-6);
    assert!((energy(&he_model(), &joint.trace.final_state).unwrap() - HE_ENERGIES[1]).abs() < 1e-6);
    assert_monotone(&joint.trace.samples);
}

#[test]
fn steepened_with_scale_and_small_curvature() {
    let problem = OmegaProblem::new(he_model(), vec![he_phi0()]).unwrap();
    let start = he_start();
    for (scale_n, curvature_t) in [(2.0, 1.0), (1.0, 0.05), (0.5, 10.0)] {
        let params = SteepeningParams {
            scale_n,
            curvature_t,
            e_f: -2.5,
        };
        let out =
            minimize_steepened(&problem, &start, &params, &OptimizerConfig::default()).unwrap();
        assert!(
            (out.omega - HE_ENERGIES[1]).abs() < 1e-6,
            "N {scale_n} T {curvature_t}"
        );
        assert!((out.f_scaled - scale_n * out.f_raw).abs() < 1e-12);
    }
}
