//! Browser bindings for the three-level model. Trial states are written as
//! `c ψ_0 + √(1 − c² − d²) ψ_1 + d ψ_2`; the ground approximant is
//! `cos θ ψ_0 + sin θ ψ_2`.

use omega_core::baselines::{closest_approximant, hum_roots, make_pathology, PathologyParams};
use omega_core::models::{he_model, he_trial, HE_ENERGIES};
use omega_core::optimizer::{minimize_omega, OptimizerConfig};
use omega_core::refine::leading_order_condition;
use omega_core::{energy, omega, spectral_decompose, OmegaProblem, Result, StateVector};
use wasm_bindgen::prelude::*;

/// `θ` of the ground approximant used in the worked three-level example.
#[wasm_bindgen]
pub fn example_theta() -> f64 {
    let p = PathologyParams::helium();
    p.b().atan2(p.a())
}

#[wasm_bindgen]
pub fn energies() -> Vec<f64> {
    HE_ENERGIES.to_vec()
}

fn ground(theta: f64) -> Result<StateVector> {
    StateVector::from_slice(&[theta.cos(), 0.0, theta.sin()])
}

fn problem(theta: f64) -> Result<OmegaProblem> {
    OmegaProblem::new(he_model(), vec![ground(theta)?])
}

fn grid_point(i: usize, resolution: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / (resolution - 1) as f64
}

/// Row-major `resolution²` samples over `c, d ∈ [−1, 1]` (rows follow `d`).
/// Points outside the unit disk, or where Ω_1 is undefined, are NaN.
#[wasm_bindgen]
pub fn omega_landscape(theta: f64, resolution: usize) -> Vec<f64> {
    let Ok(problem) = problem(theta) else {
        return vec![f64::NAN; resolution * resolution];
    };
    landscape(resolution, |phi| omega(&problem, phi).ok())
}

/// Same grid as [`omega_landscape`], holding the plain energy.
#[wasm_bindgen]
pub fn energy_landscape(resolution: usize) -> Vec<f64> {
    let h = he_model();
    landscape(resolution, |phi| energy(&h, phi).ok())
}

fn landscape(resolution: usize, f: impl Fn(&StateVector) -> Option<f64>) -> Vec<f64> {
    let resolution = resolution.max(2);
    let mut out = Vec::with_capacity(resolution * resolution);
    for row in 0..resolution {
        let d = grid_point(resolution - 1 - row, resolution);
        for col in 0..resolution {
            let c = grid_point(col, resolution);
            let value = if c * c + d * d <= 1.0 {
                he_trial(c, d).ok().and_then(|phi| f(&phi))
            } else {
                None
            };
            out.push(value.unwrap_or(f64::NAN));
        }
    }
    out
}

/// Descent path of Ω_1 from `(c, d)` as flattened `(c, d, Ω)` triples.
/// Empty when the start is infeasible.
#[wasm_bindgen]
pub fn minimize_path(theta: f64, c: f64, d: f64, tol: f64) -> Vec<f64> {
    path(theta, c, d, tol).unwrap_or_default()
}

fn path(theta: f64, c: f64, d: f64, tol: f64) -> Result<Vec<f64>> {
    let problem = problem(theta)?;
    let start = he_trial(c, d)?;
    let cfg = OptimizerConfig {
        record_path: true,
        max_iters: 2000,
        ..OptimizerConfig::with_tol(tol)
    };
    let trace = minimize_omega(&problem, &start, &cfg)?;
    let mut out = Vec::with_capacity(3 * trace.path.len());
    for phi in &trace.path {
        let v = phi.components();
        let sign = if v[1] < 0.0 { -1.0 } else { 1.0 };
        out.extend([sign * v[0], sign * v[2], omega(&problem, phi)?]);
    }
    Ok(out)
}

/// Labels of the values returned by [`pathology`], comma separated.
#[wasm_bindgen]
pub fn pathology_labels() -> String {
    [
        "a",
        "b",
        "E(phi0)",
        "E(phi1)",
        "<phi1|psi1>",
        "HUM root 0",
        "HUM root 1",
        "closest approximant energy",
        "Omega1(psi1)",
        "Omega1(phi1)",
        "leading-order lhs",
        "leading-order rhs",
    ]
    .join(",")
}

/// The three-level construction for shift `epsilon`, in the order of
/// [`pathology_labels`]. Empty for an invalid `epsilon`.
#[wasm_bindgen]
pub fn pathology(epsilon: f64) -> Vec<f64> {
    pathology_values(epsilon).unwrap_or_default()
}

fn pathology_values(epsilon: f64) -> Result<Vec<f64>> {
    let p = make_pathology(&PathologyParams {
        epsilon,
        ..PathologyParams::helium()
    })?;
    let spec = spectral_decompose(&p.h)?;
    let roots = hum_roots(&p.h, &[p.phi0.clone(), p.phi1.clone()])?;
    let closest = closest_approximant(&p.h, &spec, &p.phi0, 1)?;
    let problem = OmegaProblem::new(p.h.clone(), vec![p.phi0.clone()])?;
    let leading = leading_order_condition(&spec, &p.phi0)?;
    Ok(vec![
        p.a,
        p.b,
        energy(&p.h, &p.phi0)?,
        energy(&p.h, &p.phi1)?,
        p.phi1.overlap(spec.vector(1)),
        roots[0],
        roots[1],
        closest.energy,
        omega(&problem, spec.vector(1))?,
        omega(&problem, &p.phi1)?,
        leading.lhs,
        leading.rhs,
    ])
}
