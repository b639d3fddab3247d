#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use omega_core::ensemble::{random_perturbation, ModelRng, RandomModelSpec};
use omega_core::model_space::{
    spectral_decompose, SpectralDecomposition, StateVector, SymmetricOperator,
};
use rand::Rng;

/// Model seeds are kept apart from the small seeds the tests' own state
/// generators use, so the two streams never coincide.
pub fn random_model(dim: usize, seed: u64) -> (SymmetricOperator, SpectralDecomposition) {
    let model = RandomModelSpec {
        dim,
        seed: seed ^ MODEL_SEED_OFFSET,
        min_gap: 0.1,
        spread: 4.0,
    }
    .generate()
    .unwrap();
    let spec = spectral_decompose(&model.operator).unwrap();
    (model.operator, spec)
}

pub const MODEL_SEED_OFFSET: u64 = 0x6d6f_6465_6c00_0000;

/// Eigenvalues from nalgebra's Householder/QR solver, ascending.
pub fn independent_eigenvalues(h: &SymmetricOperator) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(h.matrix().clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `φ_i` for `i < n`, each within `max_angle` of `ψ_i`.
pub fn near_approximants(
    spec: &SpectralDecomposition,
    n: usize,
    max_angle: f64,
    rng: &mut ModelRng,
) -> Vec<StateVector> {
    (0..n)
        .map(|i| {
            let angle = max_angle * rng.random::<f64>();
            random_perturbation(spec.vector(i), angle, rng)
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Second derivatives of Ω_n at ψ_n in the eigenbasis chart, from
/// `2(H − E) + (4/D) Σ_i (E − H)φ_i φ_iᵀ(E − H)/(E − Eφ_i)` restricted to
/// the complement of ψ_n.
pub fn analytic_hessian_at_eigenstate(
    h: &SymmetricOperator,
    spec: &SpectralDecomposition,
    lower: &[StateVector],
) -> DMatrix<f64> {
    let n = lower.len();
    let dim = h.dim();
    let e = spec.energy(n);
    let psi_n = spec.vector(n).as_vector();
    let shifted = DMatrix::identity(dim, dim) * e - h.matrix();
    let d = 1.0
        - lower
            .iter()
            .map(|p| p.as_vector().dot(psi_n).powi(2))
            .sum::<f64>();
    let mut m = -&shifted * 2.0;
    for p in lower {
        let e_p = p.as_vector().dot(&h.apply(p.as_vector()));
        let w = &shifted * p.as_vector();
        m += (&w * w.transpose()) * (4.0 / (d * (e - e_p)));
    }
    let chart: Vec<usize> = (0..dim).filter(|&k| k != n).collect();
    let v = DMatrix::from_fn(dim, chart.len(), |r, c| {
        spec.vector(chart[c]).as_vector()[r]
    });
    v.transpose() * m * v
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
