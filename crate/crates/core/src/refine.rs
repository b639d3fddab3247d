//! Improving a ground approximant φ_0 orthogonally to an excited
//! approximant φ_1, and the alternation between Ω_1 minimization and that
//! improvement.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{OmegaError, Result};
use crate::functional::{collect_perp, OmegaProblem};
use crate::model_space::{
    energy, gram_schmidt_against, subspace_eigenpairs, SpectralDecomposition, StateVector,
    SymmetricOperator,
};
use crate::optimizer::{minimize_omega, minimize_omega_multistart, OptimizerConfig};

/// Largest `|⟨φ_0|φ_1⟩|` accepted as orthogonal.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ProjectionOutcome {
    /// `φ_0⁺ = (φ_0 − φ_1⟨φ_1|φ_0⟩)/√(1 − ⟨φ_1|φ_0⟩²)`.
    pub state: StateVector,
    /// `(Eφ_0 + Eφ_1 s² − 2⟨φ_0|H|φ_1⟩ s)/(1 − s²)` with `s = ⟨φ_1|φ_0⟩`.
    pub energy_closed: f64,
    pub energy_direct: f64,
    /// `Eφ_0⁺ − Eφ_0`, computed without cancellation against Eφ_0.
    pub energy_change: f64,
    pub overlap: f64,
    /// `Eφ_0⁺ ≤ Eφ_0`.
    pub admissible: bool,
}

pub fn project_out_phi1(
    phi0: &StateVector,
    phi1: &StateVector,
    h: &SymmetricOperator,
) -> Result<ProjectionOutcome> {
    let state = gram_schmidt_against(phi0, phi1)?;
    let s = phi1.overlap(phi0);
    let e0 = energy(h, phi0)?;
    let e1 = energy(h, phi1)?;
    let h01 = h.matrix_element(phi0, phi1);
    let denom = 1.0 - s * s;
    let energy_closed = (e0 + e1 * s * s - 2.0 * h01 * s) / denom;
    let energy_change = s * (s * (e0 + e1) - 2.0 * h01) / denom;
    Ok(ProjectionOutcome {
        energy_direct: energy(h, &state)?,
        state,
        energy_closed,
        energy_change,
        overlap: s,
        admissible: energy_change <= 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingOrder {
    /// `(Eψ_1 − Eψ_0)(1 − ⟨ψ_1|φ_0⟩²)`.
    pub lhs: f64,
    /// `(Eφ_0^⊥ − Eψ_0)⟨φ_0^⊥|φ_0⟩²`, zero without a component above ψ_1.
    pub rhs: f64,
}

impl LeadingOrder {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

/// Both sides of the leading-order admissibility condition, expanded about ψ_1.
pub fn leading_order_condition(
    spec: &SpectralDecomposition,
    phi0: &StateVector,
) -> Result<LeadingOrder> {
    spec.check_level(1)?;
    let c1 = spec.vector(1).overlap(phi0);
    let lhs = (spec.energy(1) - spec.energy(0)) * (1.0 - c1 * c1);
    let rhs = match collect_perp(spec, phi0, 1) {
        Ok(perp) => {
            let e_perp: f64 = spec
                .coefficients(&perp)
                .iter()
                .zip(spec.energies())
                .map(|(c, e)| c * c * e)
                .sum();
            let w = perp.overlap(phi0);
            (e_perp - spec.energy(0)) * w * w
        }
        Err(OmegaError::NoHigherComponent { .. }) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(LeadingOrder { lhs, rhs })
}

/// Supplies a new direction orthogonal to the current φ_0 and to φ_1.
pub trait DirectionSource {
    fn next_direction(
        &mut self,
        h: &SymmetricOperator,
        current: &StateVector,
        phi1: &StateVector,
    ) -> Result<StateVector>;
}

/// The normalized part of `Hφ_0` orthogonal to `{φ_0, φ_1}`; when that part
/// vanishes, computational basis vectors projected onto the same complement,
/// taken in order.
#[derive(Debug, Clone, Default)]
pub struct GreedyResidual {
    cursor: usize,
}

fn project_pair(v: &mut DVector<f64>, a: &StateVector, b: &StateVector) {
    for _ in 0..2 {
        for q in [a, b] {
            let c = q.as_vector().dot(v);
            v.axpy(-c, q.as_vector(), 1.0);
        }
    }
}

impl DirectionSource for GreedyResidual {
    fn next_direction(
        &mut self,
        h: &SymmetricOperator,
        current: &StateVector,
        phi1: &StateVector,
    ) -> Result<StateVector> {
        // {current, φ_1} are orthonormal, so a plain two-vector projection suffices
        let hv = h.apply(current.as_vector());
        let scale = hv.norm().max(f64::MIN_POSITIVE);
        let mut r = hv;
        project_pair(&mut r, current, phi1);
        if r.norm() > 1e-10 * scale {
            return StateVector::normalized(r);
        }
        let dim = h.dim();
        while self.cursor < dim {
            let mut e = DVector::zeros(dim);
            e[self.cursor] = 1.0;
            self.cursor += 1;
            project_pair(&mut e, current, phi1);
            if e.norm() > 1e-8 {
                return StateVector::normalized(e);
            }
        }
        Err(OmegaError::NoCandidateDirection)
    }
}

#[derive(Debug, Clone)]
pub struct RefinementStep {
    pub iteration: usize,
    pub phi0_current: StateVector,
    pub energy_current: f64,
    /// The new direction φ_0^{(m+)}.
    pub direction_added: StateVector,
    /// Both Ritz values of the two-state diagonalization.
    pub ritz_energies: [f64; 2],
    /// The discarded upper Ritz vector Ψ⁺.
    pub discarded: StateVector,
    /// Rayleigh quotients of the two spanning states.
    pub spanning_energies: [f64; 2],
    pub accepted: bool,
}

/// Repeated two-state Rayleigh–Ritz rotations of φ_0 around φ_1, each time
/// keeping the lower Ritz vector. Stops after the first round whose
/// relative energy improvement is below `tol`.
pub fn rotate_improve(
    h: &SymmetricOperator,
    phi0: &StateVector,
    phi1: &StateVector,
    source: &mut dyn DirectionSource,
    max_rounds: usize,
    tol: f64,
) -> Result<Vec<RefinementStep>> {
    let s = phi0.overlap(phi1);
    if s.abs() > ORTHOGONALITY_TOLERANCE {
        return Err(OmegaError::InvalidParameter(format!(
            "φ0 must be orthogonal to φ1, overlap {s:e}"
        )));
    }
    let mut current = phi0.clone();
    let mut e_current = energy(h, &current)?;
    let mut steps = Vec::new();
    for iteration in 1..=max_rounds {
        let e_before = e_current;
        let direction = source.next_direction(h, &current, phi1)?;
        let e_direction = energy(h, &direction)?;
        let ritz = subspace_eigenpairs(h, &[current.clone(), direction.clone()])?;
        let mut lowest = ritz.vectors[0].as_vector().clone();
        let c = phi1.as_vector().dot(&lowest);
        lowest.axpy(-c, phi1.as_vector(), 1.0);
        let lowest = StateVector::normalized(lowest)?;
        let e_new = energy(h, &lowest)?;
        let accepted = e_new <= e_current;
        let improvement = if accepted { e_current - e_new } else { 0.0 };
        let scale = e_current.abs().max(1.0);
        if accepted {
            current = lowest;
            e_current = e_new;
        }
        steps.push(RefinementStep {
            iteration,
            phi0_current: current.clone(),
            energy_current: e_current,
            direction_added: direction,
            ritz_energies: [ritz.energies[0], ritz.energies[1]],
            discarded: ritz.vectors[1].clone(),
            spanning_energies: [e_before, e_direction],
            accepted,
        });
        if improvement < tol * scale {
            break;
        }
    }
    Ok(steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlternationPhase {
    /// Ω_1 minimized for the current φ_0.
    Omega,
    /// φ_0 projected orthogonal to φ_1 and rotated.
    Refine,
    /// Projection was inadmissible; φ_0 kept.
    Skipped,
}

/// Overlaps against the exact eigenstates, logged when an oracle is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOverlaps {
    /// `⟨ψ_0|φ_0⟩²`.
    pub psi0_phi0: f64,
    /// `⟨ψ_1|φ_1⟩²`.
    pub psi1_phi1: f64,
    /// `⟨ψ_0|φ_1⟩²`.
    pub psi0_phi1: f64,
    /// `⟨ψ_1|φ_0⟩²`.
    pub psi1_phi0: f64,
}

impl OracleOverlaps {
    pub fn measure(spec: &SpectralDecomposition, phi0: &StateVector, phi1: &StateVector) -> Self {
        let sq = |i: usize, p: &StateVector| spec.vector(i).overlap(p).powi(2);
        Self {
            psi0_phi0: sq(0, phi0),
            psi1_phi1: sq(1, phi1),
            psi0_phi1: sq(0, phi1),
            psi1_phi0: sq(1, phi0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlternationRecord {
    pub round: usize,
    pub phase: AlternationPhase,
    pub energy_phi0: f64,
    pub energy_phi1: f64,
    pub omega: f64,
    pub admissible: Option<bool>,
    pub rotation_rounds: usize,
    pub oracle: Option<OracleOverlaps>,
}

#[derive(Debug, Clone)]
pub struct Alternation {
    pub phi0: StateVector,
    pub phi1: StateVector,
    pub history: Vec<AlternationRecord>,
    pub outer_rounds: usize,
}

/// Alternate Ω_1 minimization for φ_1 with projection and rotation of φ_0,
/// until neither changes by more than `cfg.tol_omega` (relative) or
/// `outer_rounds` is reached.
pub fn alternate(
    h: &SymmetricOperator,
    phi0_init: &StateVector,
    cfg: &OptimizerConfig,
    outer_rounds: usize,
    oracle: Option<&SpectralDecomposition>,
) -> Result<Alternation> {
    cfg.validate()?;
    if phi0_init.dim() != h.dim() {
        return Err(OmegaError::DimensionMismatch {
            expected: h.dim(),
            found: phi0_init.dim(),
        });
    }
    let mut phi0 = phi0_init.clone();
    let mut phi1: Option<StateVector> = None;
    let mut history = Vec::new();
    let mut rounds_done = 0;
    for round in 0..outer_rounds {
        rounds_done = round + 1;
        let problem = OmegaProblem::new(h.clone(), vec![phi0.clone()])?;
        let warm = phi1
            .as_ref()
            .filter(|p| problem.is_feasible(p))
            .map(|p| minimize_omega(&problem, p, cfg))
            .transpose()?;
        let trace = match warm {
            Some(t) => t,
            None => minimize_omega_multistart(&problem, None, cfg)?
                .best_trace()
                .clone(),
        };
        let new_phi1 = trace.final_state;
        let e1_new = energy(h, &new_phi1)?;
        // the first minimization has nothing to improve on
        let omega_improved = match &phi1 {
            None => false,
            Some(old) => {
                let e1_old = energy(h, old)?;
                (e1_new - e1_old).abs() > cfg.tol_omega * e1_old.abs().max(1.0)
                    || 1.0 - old.overlap(&new_phi1).powi(2) > cfg.tol_omega
            }
        };
        phi1 = Some(new_phi1.clone());
        history.push(AlternationRecord {
            round,
            phase: AlternationPhase::Omega,
            energy_phi0: energy(h, &phi0)?,
            energy_phi1: e1_new,
            omega: trace.final_value,
            admissible: None,
            rotation_rounds: 0,
            oracle: oracle.map(|s| OracleOverlaps::measure(s, &phi0, &new_phi1)),
        });

        let e0_old = energy(h, &phi0)?;
        let projection = project_out_phi1(&phi0, &new_phi1, h)?;
        let refine_improved = if projection.admissible {
            let mut source = GreedyResidual::default();
            let steps = match rotate_improve(
                h,
                &projection.state,
                &new_phi1,
                &mut source,
                h.dim(),
                cfg.tol_omega,
            ) {
                Ok(steps) => steps,
                Err(OmegaError::NoCandidateDirection) => Vec::new(),
                Err(e) => return Err(e),
            };
            let rotation_rounds = steps.len();
            phi0 = steps
                .last()
                .map(|s| s.phi0_current.clone())
                .unwrap_or(projection.state);
            let e0_new = energy(h, &phi0)?;
            history.push(AlternationRecord {
                round,
                phase: AlternationPhase::Refine,
                energy_phi0: e0_new,
                energy_phi1: e1_new,
                omega: trace.final_value,
                admissible: Some(true),
                rotation_rounds,
                oracle: oracle.map(|s| OracleOverlaps::measure(s, &phi0, &new_phi1)),
            });
            e0_old - e0_new > cfg.tol_omega * e0_old.abs().max(1.0)
        } else {
            history.push(AlternationRecord {
                round,
                phase: AlternationPhase::Skipped,
                energy_phi0: e0_old,
                energy_phi1: e1_new,
                omega: trace.final_value,
                admissible: Some(false),
                rotation_rounds: 0,
                oracle: oracle.map(|s| OracleOverlaps::measure(s, &phi0, &new_phi1)),
            });
            false
        };
        if !omega_improved && !refine_improved {
            break;
        }
    }
    let phi1 =
        phi1.ok_or_else(|| OmegaError::InvalidParameter("outer_rounds must be positive".into()))?;
    Ok(Alternation {
        phi0,
        phi1,
        history,
        outer_rounds: rounds_done,
    })
}
