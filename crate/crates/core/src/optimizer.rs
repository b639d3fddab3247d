//! Projected-gradient descent on the unit sphere with Armijo backtracking.
//!
//! Iterates live in the ambient computational basis; steps are retracted by
//! renormalization (and, for orthogonality constraints, by projection onto
//! the complement first). The optimizer never sees the exact eigenbasis.
//!
//! Line-search comparisons are made on objectives shifted by the current
//! energy so that progress remains measurable after Ω has converged to the
//! last few ulps of its absolute value.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::ensemble::{random_unit, seeded_stream, START_STREAM};
use crate::error::{OmegaError, Result};
use crate::functional::{steepened_from_omega, OmegaProblem, SteepeningParams};
use crate::model_space::{orthonormalize, StateVector, SymmetricOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Target accuracy of the converged state and relative-improvement
    /// threshold for outer loops.
    pub tol_omega: f64,
    /// Stop when the tangent gradient norm falls to this value.
    pub grad_tol: f64,
    /// Stop when an accepted step moves the state by less than this.
    pub step_tol: f64,
    pub max_iters: usize,
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    pub restart_count: usize,
    pub seed: u64,
    /// Keep one trace sample every this many iterations.
    pub sample_every: usize,
    /// Keep every iterate in the trace.
    pub record_path: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::with_tol(1e-8)
    }
}

impl OptimizerConfig {
    /// Defaults with the gradient and step thresholds derived from `tol`
    /// (`tol · 1e-4` and `tol · 1e-7`).
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol_omega: tol,
            grad_tol: tol * 1e-4,
            step_tol: tol * 1e-7,
            max_iters: 10_000,
            step_init: 1.0,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            restart_count: 8,
            seed: 0,
            sample_every: 1,
            record_path: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_omega", self.tol_omega),
            ("grad_tol", self.grad_tol),
            ("step_tol", self.step_tol),
            ("step_init", self.step_init),
            ("armijo_c", self.armijo_c),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(OmegaError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(OmegaError::InvalidParameter(format!(
                "backtrack_factor must lie in (0, 1), got {}",
                self.backtrack_factor
            )));
        }
        if self.armijo_c >= 1.0 {
            return Err(OmegaError::InvalidParameter(
                "armijo_c must be below 1".into(),
            ));
        }
        if self.max_iters == 0 || self.sample_every == 0 {
            return Err(OmegaError::InvalidParameter(
                "max_iters and sample_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    GradientConverged,
    StepConverged,
    MaxIters,
    PreconditionLost,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationTrace {
    pub samples: Vec<TraceSample>,
    pub termination: Termination,
    pub iterations: usize,
    pub final_state: StateVector,
    pub final_value: f64,
    pub final_grad_norm: f64,
    /// Every iterate, when requested in the config.
    pub path: Vec<StateVector>,
}

/// One evaluation of a sphere objective.
struct Probe {
    /// Objective minus the shift it was evaluated at.
    shifted: f64,
    value: f64,
    /// Energy, used as the shift for the next line search.
    energy: f64,
    gradient: DVector<f64>,
}

trait SphereObjective {
    fn probe(&self, phi: &StateVector, shift: f64) -> Result<Probe>;

    /// Shifted objective only, for line-search trials.
    fn shifted_value(&self, phi: &StateVector, shift: f64) -> Result<f64> {
        self.probe(phi, shift).map(|p| p.shifted)
    }

    fn retract(&self, v: DVector<f64>) -> Result<StateVector> {
        StateVector::normalized(v)
    }
}

impl SphereObjective for OmegaProblem {
    fn probe(&self, phi: &StateVector, shift: f64) -> Result<Probe> {
        let parts = self.evaluate_shifted(phi, shift)?;
        let gradient = self.gradient_from_parts(phi, &parts);
        Ok(Probe {
            shifted: parts.value_shifted(),
            value: parts.value(),
            energy: parts.energy,
            gradient,
        })
    }

    fn shifted_value(&self, phi: &StateVector, shift: f64) -> Result<f64> {
        self.evaluate_shifted(phi, shift).map(|p| p.value_shifted())
    }
}

fn descend<O: SphereObjective>(
    objective: &O,
    start: &StateVector,
    cfg: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    cfg.validate()?;
    let mut phi = start.clone();
    let mut samples = Vec::new();
    let mut path = Vec::new();
    let mut alpha = cfg.step_init;
    let mut iteration = 0;

    let mut current = objective
        .probe(&phi, 0.0)
        .map_err(|e| OmegaError::InfeasibleStart(e.to_string()))?;
    let termination = loop {
        let grad_norm = current.gradient.norm();
        if iteration % cfg.sample_every == 0 {
            samples.push(TraceSample {
                iteration,
                objective: current.value,
                grad_norm,
            });
        }
        if cfg.record_path {
            path.push(phi.clone());
        }
        if grad_norm <= cfg.grad_tol {
            break Termination::GradientConverged;
        }
        if iteration >= cfg.max_iters {
            break Termination::MaxIters;
        }

        let shift = current.energy;
        let f_cur = objective.shifted_value(&phi, shift)?;
        let slope = grad_norm * grad_norm;
        let mut trial_alpha = alpha;
        let mut any_feasible = false;
        let mut accepted = None;
        while trial_alpha * grad_norm > cfg.step_tol {
            let mut v = phi.as_vector().clone();
            v.axpy(-trial_alpha, &current.gradient, 1.0);
            if let Ok(trial) = objective.retract(v) {
                if let Ok(f_trial) = objective.shifted_value(&trial, shift) {
                    any_feasible = true;
                    if f_trial <= f_cur - cfg.armijo_c * trial_alpha * slope {
                        accepted = Some(trial);
                        break;
                    }
                }
            }
            trial_alpha *= cfg.backtrack_factor;
        }

        let Some(next) = accepted else {
            break if any_feasible {
                Termination::StepConverged
            } else {
                Termination::PreconditionLost
            };
        };
        let moved = (next.as_vector() - phi.as_vector()).norm();
        phi = next;
        iteration += 1;
        alpha = (trial_alpha / cfg.backtrack_factor).min(cfg.step_init);
        current = objective.probe(&phi, 0.0)?;
        if moved <= cfg.step_tol {
            samples.push(TraceSample {
                iteration,
                objective: current.value,
                grad_norm: current.gradient.norm(),
            });
            if cfg.record_path {
                path.push(phi.clone());
            }
            break Termination::StepConverged;
        }
    };

    let final_grad_norm = current.gradient.norm();
    if samples.last().map(|s| s.iteration) != Some(iteration) {
        samples.push(TraceSample {
            iteration,
            objective: current.value,
            grad_norm: final_grad_norm,
        });
    }
    Ok(OptimizationTrace {
        samples,
        termination,
        iterations: iteration,
        final_state: phi,
        final_value: current.value,
        final_grad_norm,
        path,
    })
}

/// Minimize Ω_n from `start`.
pub fn minimize_omega(
    problem: &OmegaProblem,
    start: &StateVector,
    cfg: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    problem
        .evaluate(start)
        .map_err(|e| OmegaError::InfeasibleStart(e.to_string()))?;
    descend(problem, start, cfg)
}

/// Outcome of one run of a multi-start minimization.
#[derive(Debug, Clone)]
pub struct RestartOutcome {
    /// `None` for the caller-supplied start, otherwise the restart index.
    pub restart: Option<usize>,
    pub trace: OptimizationTrace,
}

#[derive(Debug, Clone)]
pub struct MultiStart {
    pub runs: Vec<RestartOutcome>,
    /// Index into `runs` of the lowest final Ω.
    pub best: usize,
}

impl MultiStart {
    pub fn best_trace(&self) -> &OptimizationTrace {
        &self.runs[self.best].trace
    }
}

/// Draw a feasible uniform random start for `problem`.
pub fn random_feasible_start(
    problem: &OmegaProblem,
    rng: &mut crate::ensemble::ModelRng,
) -> Option<StateVector> {
    (0..1000)
        .map(|_| random_unit(problem.dim(), rng))
        .find(|s| problem.is_feasible(s))
}

/// Run from `start` (if any) and from `cfg.restart_count` seeded random
/// feasible starts; keep every outcome and point at the lowest final Ω.
pub fn minimize_omega_multistart(
    problem: &OmegaProblem,
    start: Option<&StateVector>,
    cfg: &OptimizerConfig,
) -> Result<MultiStart> {
    cfg.validate()?;
    let mut runs = Vec::new();
    if let Some(s) = start {
        runs.push(RestartOutcome {
            restart: None,
            trace: minimize_omega(problem, s, cfg)?,
        });
    }
    let mut rng = seeded_stream(cfg.seed, START_STREAM);
    for r in 0..cfg.restart_count {
        let Some(s) = random_feasible_start(problem, &mut rng) else {
            continue;
        };
        if let Ok(trace) = minimize_omega(problem, &s, cfg) {
            runs.push(RestartOutcome {
                restart: Some(r),
                trace,
            });
        }
    }
    let best = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| problem.is_feasible(&r.trace.final_state))
        .min_by(|a, b| a.1.trace.final_value.total_cmp(&b.1.trace.final_value))
        .map(|(i, _)| i)
        .ok_or_else(|| OmegaError::InfeasibleStart("no feasible start found".into()))?;
    Ok(MultiStart { runs, best })
}

/// Energy on the unit sphere intersected with the orthogonal complement of
/// a set of constraint vectors.
struct ConstrainedEnergy<'a> {
    h: &'a SymmetricOperator,
    constraint_basis: Vec<DVector<f64>>,
}

impl ConstrainedEnergy<'_> {
    fn project(&self, v: &mut DVector<f64>) {
        for _ in 0..2 {
            for q in &self.constraint_basis {
                let c = q.dot(v);
                v.axpy(-c, q, 1.0);
            }
        }
    }
}

impl SphereObjective for ConstrainedEnergy<'_> {
    fn probe(&self, phi: &StateVector, shift: f64) -> Result<Probe> {
        let v = phi.as_vector();
        let hv = self.h.apply(v);
        let mut shifted = hv.clone();
        shifted.axpy(-shift, v, 1.0);
        let energy_shifted = v.dot(&shifted);
        let energy = shift + energy_shifted;
        let mut gradient = hv;
        gradient.axpy(-energy, v, 1.0);
        gradient *= 2.0;
        self.project(&mut gradient);
        let radial = v.dot(&gradient);
        gradient.axpy(-radial, v, 1.0);
        Ok(Probe {
            shifted: energy_shifted,
            value: energy,
            energy,
            gradient,
        })
    }

    fn retract(&self, mut v: DVector<f64>) -> Result<StateVector> {
        self.project(&mut v);
        StateVector::normalized(v)
    }
}

/// Orthonormal basis of `span(constraints)`.
pub fn constraint_basis(constraints: &[StateVector]) -> Vec<DVector<f64>> {
    let raw: Vec<DVector<f64>> = constraints.iter().map(|c| c.as_vector().clone()).collect();
    orthonormalize(&raw, 1e-12)
}

/// Minimize the energy over unit states orthogonal to every constraint.
pub fn minimize_energy_orthogonal(
    h: &SymmetricOperator,
    constraints: &[StateVector],
    start: &StateVector,
    cfg: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    for c in constraints.iter().chain(std::iter::once(start)) {
        if c.dim() != h.dim() {
            return Err(OmegaError::DimensionMismatch {
                expected: h.dim(),
                found: c.dim(),
            });
        }
    }
    let basis = constraint_basis(constraints);
    if basis.len() >= h.dim() {
        return Err(OmegaError::EmptyComplement);
    }
    for (i, c) in constraints.iter().enumerate() {
        let s = c.overlap(start);
        if s.abs() > 1e-10 {
            return Err(OmegaError::InfeasibleStart(format!(
                "start overlaps constraint {i} by {s:e}"
            )));
        }
    }
    let objective = ConstrainedEnergy {
        h,
        constraint_basis: basis,
    };
    // remove the sub-tolerance overlap the start is allowed to carry
    let start = objective.retract(start.as_vector().clone())?;
    descend(&objective, &start, cfg)
}

/// Result of the joint (φ, E_f) minimization of the steepened functional.
#[derive(Debug, Clone)]
pub struct SteepenedTrace {
    pub trace: OptimizationTrace,
    pub params: SteepeningParams,
    /// `Ω + |Ω − E_f| / |E_f T|` at the final point.
    pub f_raw: f64,
    /// `N` times `f_raw`.
    pub f_scaled: f64,
    pub omega: f64,
}

/// Block-coordinate minimization of `N (Ω + |Ω − E_f| / |E_f T|)`: an
/// Armijo step in φ at fixed E_f, then the exact minimizer in E_f
/// (`E_f = Ω`), repeated until the Ω gradient vanishes. `trace.samples`
/// record the scaled objective.
pub fn minimize_steepened(
    problem: &OmegaProblem,
    start: &StateVector,
    initial: &SteepeningParams,
    cfg: &OptimizerConfig,
) -> Result<SteepenedTrace> {
    cfg.validate()?;
    initial.validate()?;
    problem
        .evaluate(start)
        .map_err(|e| OmegaError::InfeasibleStart(e.to_string()))?;
    let mut params = *initial;
    let mut phi = start.clone();
    let mut samples = Vec::new();
    let mut path = Vec::new();
    let mut alpha = cfg.step_init;
    let mut iteration = 0;
    let n_scale = params.scale_n;

    let termination = loop {
        let parts = problem.evaluate(&phi)?;
        let grad = problem.gradient_from_parts(&phi, &parts);
        let grad_norm = grad.norm();
        let f = steepened_from_omega(parts.value(), &params)?;
        if iteration % cfg.sample_every == 0 {
            samples.push(TraceSample {
                iteration,
                objective: f.scaled,
                grad_norm: grad_norm * n_scale,
            });
        }
        if cfg.record_path {
            path.push(phi.clone());
        }
        if grad_norm * n_scale <= cfg.grad_tol {
            break Termination::GradientConverged;
        }
        if iteration >= cfg.max_iters {
            break Termination::MaxIters;
        }

        // F in φ at fixed E_f, relative to the current energy:
        // N (Ω + slope |Ω − E_f|)
        let shift = parts.energy;
        let slope = params.penalty_slope();
        let e_f = params.e_f;
        let f_at = |s: &StateVector| -> Result<f64> {
            let p = problem.evaluate_shifted(s, shift)?;
            let om_shifted = p.value_shifted();
            Ok(n_scale * (om_shifted + slope * ((om_shifted + shift) - e_f).abs()))
        };
        let f_cur = f_at(&phi)?;
        // one-sided derivative factor in the direction that lowers Ω
        let below = parts.value() <= e_f;
        let factor = if below { 1.0 - slope } else { 1.0 + slope };
        let joint = factor <= 0.0;
        let descent = grad_norm * grad_norm * n_scale * factor.abs();

        let mut trial_alpha = alpha;
        let mut any_feasible = false;
        let mut accepted = None;
        while trial_alpha * grad_norm > cfg.step_tol {
            let mut v = phi.as_vector().clone();
            v.axpy(-trial_alpha, &grad, 1.0);
            if let Ok(trial) = StateVector::normalized(v) {
                // when the penalty outweighs Ω at fixed E_f, move E_f along
                // with φ and compare plain N Ω instead
                let value = if joint {
                    problem
                        .evaluate_shifted(&trial, shift)
                        .map(|p| n_scale * p.value_shifted())
                } else {
                    f_at(&trial)
                };
                if let Ok(f_trial) = value {
                    any_feasible = true;
                    let reference = if joint {
                        n_scale * problem.evaluate_shifted(&phi, shift)?.value_shifted()
                    } else {
                        f_cur
                    };
                    if f_trial <= reference - cfg.armijo_c * trial_alpha * descent {
                        accepted = Some(trial);
                        break;
                    }
                }
            }
            trial_alpha *= cfg.backtrack_factor;
        }
        let Some(next) = accepted else {
            break if any_feasible {
                Termination::StepConverged
            } else {
                Termination::PreconditionLost
            };
        };
        let moved = (next.as_vector() - phi.as_vector()).norm();
        phi = next;
        iteration += 1;
        alpha = (trial_alpha / cfg.backtrack_factor).min(cfg.step_init);
        // exact minimization over E_f
        let omega_new = problem.evaluate(&phi)?.value();
        if omega_new.abs() >= 1e-300 {
            params.e_f = omega_new;
        }
        if moved <= cfg.step_tol {
            break Termination::StepConverged;
        }
    };

    let parts = problem.evaluate(&phi)?;
    let grad_norm = problem.gradient_from_parts(&phi, &parts).norm();
    let f = steepened_from_omega(parts.value(), &params)?;
    if samples.last().map(|s| s.iteration) != Some(iteration) {
        samples.push(TraceSample {
            iteration,
            objective: f.scaled,
            grad_norm: grad_norm * n_scale,
        });
    }
    Ok(SteepenedTrace {
        trace: OptimizationTrace {
            samples,
            termination,
            iterations: iteration,
            final_state: phi,
            final_value: f.scaled,
            final_grad_norm: grad_norm * n_scale,
            path,
        },
        params,
        f_raw: f.raw,
        f_scaled: f.scaled,
        omega: f.omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_space::spectral_decompose;

    fn he() -> SymmetricOperator {
        SymmetricOperator::diagonal(&[-2.903, -2.146, -2.06]).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig {
            backtrack_factor: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig {
            step_init: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn start_at_eigenstate_stops_immediately() {
        let h = he();
        let spec = spectral_decompose(&h).unwrap();
        let problem = OmegaProblem::new(h, vec![spec.vector(0).clone()]).unwrap();
        let trace = minimize_omega(&problem, spec.vector(1), &OptimizerConfig::default()).unwrap();
        assert_eq!(trace.termination, Termination::GradientConverged);
        assert!(trace.iterations <= 1);
        assert_eq!(trace.final_value, -2.146);
    }

    #[test]
    fn infeasible_start_rejected() {
        let h = he();
        let spec = spectral_decompose(&h).unwrap();
        let phi0 = StateVector::combination(&[(0.9476, spec.vector(0)), (0.3194, spec.vector(2))])
            .unwrap();
        let problem = OmegaProblem::new(h.clone(), vec![phi0.clone()]).unwrap();
        assert!(matches!(
            minimize_omega(&problem, spec.vector(0), &OptimizerConfig::default()),
            Err(OmegaError::InfeasibleStart(_))
        ));
        assert!(matches!(
            minimize_energy_orthogonal(&h, &[phi0], spec.vector(0), &OptimizerConfig::default()),
            Err(OmegaError::InfeasibleStart(_))
        ));
    }

    #[test]
    fn empty_complement() {
        let h = SymmetricOperator::diagonal(&[0.0, 1.0]).unwrap();
        let e0 = StateVector::basis(2, 0);
        let e1 = StateVector::basis(2, 1);
        assert_eq!(
            minimize_energy_orthogonal(&h, &[e0, e1.clone()], &e1, &OptimizerConfig::default())
                .unwrap_err(),
            OmegaError::EmptyComplement
        );
    }

    #[test]
    fn exact_ground_constraint_gives_first_excited() {
        let h = he();
        let start = StateVector::combination(&[
            (1.0, &StateVector::basis(3, 1)),
            (1.0, &StateVector::basis(3, 2)),
        ])
        .unwrap();
        let trace = minimize_energy_orthogonal(
            &h,
            &[StateVector::basis(3, 0)],
            &start,
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!((trace.final_value + 2.146).abs() < 1e-12);
        assert!(trace.final_state.components()[1].abs() > 1.0 - 1e-12);
    }
}
