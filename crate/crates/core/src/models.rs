//! The builtin three-level "he-model": `diag(−2.903, −2.146, −2.06)` in the
//! computational basis, so ψ_i are the standard basis vectors.

use crate::baselines::{make_pathology, PathologyParams};
use crate::error::Result;
use crate::model_space::{StateVector, SymmetricOperator};

pub const HE_ENERGIES: [f64; 3] = [-2.903, -2.146, -2.06];

/// Start coordinates `(c, d)` of the Ω_1 demonstration run.
pub const HE_DEMO_START: (f64, f64) = (0.3, -0.5);

pub fn he_model() -> SymmetricOperator {
    SymmetricOperator::diagonal(&HE_ENERGIES).expect("valid builtin model")
}

/// `a ψ_0 + b ψ_2` with the exact `a, b` of the ε = 0 construction.
pub fn he_phi0() -> StateVector {
    make_pathology(&PathologyParams::helium())
        .expect("valid builtin parameters")
        .phi0
}

/// `b ψ_0 − a ψ_2`.
pub fn he_phi1() -> StateVector {
    make_pathology(&PathologyParams::helium())
        .expect("valid builtin parameters")
        .phi1
}

/// `c ψ_0 + √(1 − c² − d²) ψ_1 + d ψ_2`.
pub fn he_trial(c: f64, d: f64) -> Result<StateVector> {
    let principal = (1.0 - c * c - d * d).max(0.0).sqrt();
    StateVector::normalized(nalgebra::DVector::from_vec(vec![c, principal, d]))
}
