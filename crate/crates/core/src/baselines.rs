//! Reference constructions that Ω_n is compared against: the closest state
//! to ψ_n orthogonal to a ground approximant, secular-equation roots, the
//! two-state mix with a prescribed energy, and the three-level example in
//! which energy alone misidentifies the excited state.

use serde::{Deserialize, Serialize};

use crate::error::{OmegaError, Result};
use crate::model_space::{
    energy, gram_schmidt_against, subspace_eigenpairs, SpectralDecomposition, StateVector,
    SymmetricOperator,
};

#[derive(Debug, Clone)]
pub struct ClosestApproximant {
    pub state: StateVector,
    /// Rayleigh quotient of `state`.
    pub energy: f64,
    /// `Eψ_n − (Eψ_n − Eφ_0)⟨ψ_n|φ_0⟩² / (1 − ⟨ψ_n|φ_0⟩²)`.
    pub energy_formula: f64,
    /// `⟨ψ_n|φ_0⟩`.
    pub overlap: f64,
}

/// Gram–Schmidt projection of ψ_n orthogonal to `phi0`: the state orthogonal
/// to `phi0` with the largest overlap with ψ_n.
pub fn closest_approximant(
    h: &SymmetricOperator,
    spec: &SpectralDecomposition,
    phi0: &StateVector,
    n: usize,
) -> Result<ClosestApproximant> {
    spec.check_level(n)?;
    let psi = spec.vector(n);
    let state = gram_schmidt_against(psi, phi0)?;
    let s = psi.overlap(phi0);
    let e_phi0 = energy(h, phi0)?;
    let e_n = spec.energy(n);
    let energy_formula = e_n - (e_n - e_phi0) * s * s / (1.0 - s * s);
    Ok(ClosestApproximant {
        energy: energy(h, &state)?,
        state,
        energy_formula,
        overlap: s,
    })
}

/// Ascending roots of the secular equation on `span(trial_basis)`.
pub fn hum_roots(h: &SymmetricOperator, trial_basis: &[StateVector]) -> Result<Vec<f64>> {
    Ok(subspace_eigenpairs(h, trial_basis)?.energies)
}

/// Largest coupling `⟨Ψ−|H|Ψ+⟩` still accepted as an eigenpair of the
/// restricted two-state operator.
pub const EIGENPAIR_TOLERANCE: f64 = 1e-10;

/// `Ψ = Ψ− √((E+ − E)/(E+ − E−)) ± Ψ+ √((E − E−)/(E+ − E−))`, whose energy
/// is the target `E`.
pub fn degenerate_mix(
    h: &SymmetricOperator,
    minus: &StateVector,
    plus: &StateVector,
    e_minus: f64,
    e_plus: f64,
    e_target: f64,
    sign: f64,
) -> Result<StateVector> {
    let coupling = h.matrix_element(minus, plus);
    let overlap = minus.overlap(plus);
    if coupling.abs() > EIGENPAIR_TOLERANCE || overlap.abs() > EIGENPAIR_TOLERANCE {
        return Err(OmegaError::NonEigenPair {
            coupling: coupling.abs().max(overlap.abs()),
        });
    }
    for (state, e) in [(minus, e_minus), (plus, e_plus)] {
        let actual = energy(h, state)?;
        if (actual - e).abs() > EIGENPAIR_TOLERANCE * e.abs().max(1.0) {
            return Err(OmegaError::InvalidParameter(format!(
                "stated energy {e} differs from the state's energy {actual}"
            )));
        }
    }
    if !(e_minus <= e_target && e_target <= e_plus) {
        return Err(OmegaError::TargetOutOfRange {
            target: e_target,
            low: e_minus,
            high: e_plus,
        });
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(OmegaError::InvalidParameter(format!(
            "sign must be ±1, got {sign}"
        )));
    }
    let width = e_plus - e_minus;
    if width == 0.0 {
        return Ok(minus.clone());
    }
    let w_minus = ((e_plus - e_target) / width).sqrt();
    let w_plus = sign * ((e_target - e_minus) / width).sqrt();
    StateVector::combination(&[(w_minus, minus), (w_plus, plus)])
}

/// Three-level model energies and the small shift ε of the pathology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathologyParams {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub epsilon: f64,
}

impl PathologyParams {
    pub fn helium() -> Self {
        Self {
            e0: crate::models::HE_ENERGIES[0],
            e1: crate::models::HE_ENERGIES[1],
            e2: crate::models::HE_ENERGIES[2],
            epsilon: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            e0,
            e1,
            e2,
            epsilon,
        } = *self;
        if ![e0, e1, e2, epsilon].iter().all(|x| x.is_finite()) {
            return Err(OmegaError::NonFinite);
        }
        if !(e0 < e1 && e1 < e2) {
            return Err(OmegaError::InvalidParameter(
                "energies must satisfy e0 < e1 < e2".into(),
            ));
        }
        if epsilon < 0.0 {
            return Err(OmegaError::InvalidParameter(
                "epsilon must be non-negative".into(),
            ));
        }
        if !(e1 - epsilon > e0) {
            return Err(OmegaError::InvalidParameter(
                "e1 - epsilon must exceed e0".into(),
            ));
        }
        if !(e2 > e1 - epsilon) {
            return Err(OmegaError::InvalidParameter(
                "e2 must exceed e1 - epsilon".into(),
            ));
        }
        Ok(())
    }

    /// `a = √((e1 − ε − e0)/(e2 − e0))`.
    pub fn a(&self) -> f64 {
        ((self.e1 - self.epsilon - self.e0) / (self.e2 - self.e0)).sqrt()
    }

    /// `b = √((e2 − (e1 − ε))/(e2 − e0))`.
    pub fn b(&self) -> f64 {
        ((self.e2 - (self.e1 - self.epsilon)) / (self.e2 - self.e0)).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct Pathology {
    pub h: SymmetricOperator,
    pub a: f64,
    pub b: f64,
    /// `a ψ_0 + b ψ_2`.
    pub phi0: StateVector,
    /// `b ψ_0 − a ψ_2`, orthogonal to both `phi0` and ψ_1, with energy `e1 − ε`.
    pub phi1: StateVector,
}

pub fn make_pathology(params: &PathologyParams) -> Result<Pathology> {
    params.validate()?;
    let h = SymmetricOperator::diagonal(&[params.e0, params.e1, params.e2])?;
    let (a, b) = (params.a(), params.b());
    let phi0 = StateVector::normalized(nalgebra::DVector::from_vec(vec![a, 0.0, b]))?;
    let phi1 = StateVector::normalized(nalgebra::DVector::from_vec(vec![b, 0.0, -a]))?;
    Ok(Pathology {
        h,
        a,
        b,
        phi0,
        phi1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_space::spectral_decompose;

    #[test]
    fn closest_to_exact_ground_is_first_excited() {
        let p = make_pathology(&PathologyParams::helium()).unwrap();
        let spec = spectral_decompose(&p.h).unwrap();
        let c = closest_approximant(&p.h, &spec, spec.vector(0), 1).unwrap();
        assert_eq!(c.state, *spec.vector(1));
        assert_eq!(c.energy, -2.146);
        // the example's φ0 has no ψ1 component either
        let c = closest_approximant(&p.h, &spec, &p.phi0, 1).unwrap();
        assert_eq!(c.state, *spec.vector(1));
        assert!((c.energy_formula + 2.146).abs() < 1e-15);
    }

    #[test]
    fn pathology_boundary_rejected() {
        let base = PathologyParams::helium();
        let at_boundary = PathologyParams {
            epsilon: base.e1 - base.e0,
            ..base
        };
        assert!(make_pathology(&at_boundary).is_err());
        assert!(make_pathology(&PathologyParams {
            epsilon: -0.1,
            ..base
        })
        .is_err());
        assert!(make_pathology(&PathologyParams { e1: -3.0, ..base }).is_err());
    }

    #[test]
    fn mix_endpoints_and_midpoint() {
        let h = SymmetricOperator::diagonal(&[0.0, 1.0, 2.0]).unwrap();
        let e0 = StateVector::basis(3, 0);
        let e2 = StateVector::basis(3, 2);
        assert_eq!(
            degenerate_mix(&h, &e0, &e2, 0.0, 2.0, 0.0, 1.0).unwrap(),
            e0
        );
        let mid = degenerate_mix(&h, &e0, &e2, 0.0, 2.0, 1.0, -1.0).unwrap();
        let w = std::f64::consts::FRAC_1_SQRT_2;
        assert!((mid.components()[0] - w).abs() < 1e-15);
        assert!((mid.components()[2] + w).abs() < 1e-15);
    }

    #[test]
    fn mix_errors() {
        let h = SymmetricOperator::from_rows(&[
            vec![0.0, 0.1, 0.0],
            vec![0.1, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let e0 = StateVector::basis(3, 0);
        let e1 = StateVector::basis(3, 1);
        let e2 = StateVector::basis(3, 2);
        assert_eq!(
            degenerate_mix(&h, &e0, &e1, 0.0, 1.0, 0.5, 1.0)
                .unwrap_err()
                .kind(),
            "NonEigenPair"
        );
        assert_eq!(
            degenerate_mix(&h, &e0, &e2, 0.0, 2.0, 3.0, 1.0)
                .unwrap_err()
                .kind(),
            "TargetOutOfRange"
        );
    }
}
