//! The excited-state functional
//!
//! ```text
//! Ω_n[φ] = Eφ + 2 · Σ_{i<n} (Eφ⟨φ_i|φ⟩ − ⟨φ_i|H|φ⟩)² / (Eφ − Eφ_i)
//!              / (1 − Σ_{i<n} ⟨φ_i|φ⟩²)
//! ```
//!
//! built from fixed lower approximants `φ_i`, together with its tangent
//! gradient on the unit sphere, the saddle decomposition of the plain energy,
//! a finite-difference Hessian in the eigenbasis chart, and the steepened
//! variant `F = Ω + |Ω − E_f| / |E_f T|`.
//!
//! Ω_n equals `Eψ_n` at the exact eigenstate whatever the lower approximants
//! are, since every numerator `⟨φ_i|(E − H)|φ⟩` vanishes there.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{OmegaError, Result};
use crate::model_space::{
    to_eigenbasis, EigenbasisCoordinates, SpectralDecomposition, StateVector, SymmetricOperator,
    PARALLEL_GUARD,
};

/// Lower bound on both `Eφ − Eφ_i` and `1 − Σ⟨φ_i|φ⟩²`.
pub const DENOMINATOR_GUARD: f64 = 1e-10;

/// Central-difference step of the chart Hessian.
pub const HESSIAN_STEP: f64 = 1e-4;

/// Ω_n for a fixed list of lower approximants. The list order is never
/// changed after construction.
#[derive(Debug, Clone)]
pub struct OmegaProblem {
    h: SymmetricOperator,
    lower: Vec<StateVector>,
    lower_energies: Vec<f64>,
    h_lower: Vec<DVector<f64>>,
}

/// Everything computed during one evaluation of Ω_n.
#[derive(Debug, Clone)]
pub struct OmegaParts {
    /// `Eφ`.
    pub energy: f64,
    /// `Eφ − shift`, accurate even when the two are nearly equal.
    pub energy_shifted: f64,
    /// `Hφ − Eφ φ`.
    pub residual: DVector<f64>,
    /// `⟨φ_i|φ⟩`.
    pub overlaps: Vec<f64>,
    /// `Eφ⟨φ_i|φ⟩ − ⟨φ_i|H|φ⟩`.
    pub numerators: Vec<f64>,
    /// `Eφ − Eφ_i`.
    pub denominators: Vec<f64>,
    /// `Σ numerator² / denominator`.
    pub sum: f64,
    /// `1 − Σ⟨φ_i|φ⟩²`.
    pub normalizer: f64,
    /// The correction term `2 · sum / normalizer`.
    pub correction: f64,
}

impl OmegaParts {
    pub fn value(&self) -> f64 {
        self.energy + self.correction
    }

    /// `Ω − shift` for the shift passed to [`OmegaProblem::evaluate_shifted`].
    pub fn value_shifted(&self) -> f64 {
        self.energy_shifted + self.correction
    }
}

impl OmegaProblem {
    /// `lower` holds `φ_0 … φ_{n−1}`; its length is the target level `n`.
    pub fn new(h: SymmetricOperator, lower: Vec<StateVector>) -> Result<Self> {
        for phi in &lower {
            if phi.dim() != h.dim() {
                return Err(OmegaError::DimensionMismatch {
                    expected: h.dim(),
                    found: phi.dim(),
                });
            }
        }
        if lower.len() >= h.dim() {
            return Err(OmegaError::LevelOutOfRange {
                index: lower.len(),
                dim: h.dim(),
            });
        }
        for (i, a) in lower.iter().enumerate() {
            for b in &lower[i + 1..] {
                let s = a.overlap(b);
                if s.abs() >= 1.0 - PARALLEL_GUARD {
                    return Err(OmegaError::ParallelStates { overlap_sq: s * s });
                }
            }
        }
        let h_lower: Vec<DVector<f64>> = lower.iter().map(|p| h.apply(p.as_vector())).collect();
        let lower_energies = lower
            .iter()
            .zip(&h_lower)
            .map(|(p, hp)| p.as_vector().dot(hp))
            .collect();
        Ok(Self {
            h,
            lower,
            lower_energies,
            h_lower,
        })
    }

    /// The target level `n`.
    pub fn level(&self) -> usize {
        self.lower.len()
    }

    pub fn hamiltonian(&self) -> &SymmetricOperator {
        &self.h
    }

    pub fn lower_approximants(&self) -> &[StateVector] {
        &self.lower
    }

    pub fn lower_energies(&self) -> &[f64] {
        &self.lower_energies
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn evaluate(&self, phi: &StateVector) -> Result<OmegaParts> {
        self.evaluate_shifted(phi, 0.0)
    }

    /// Evaluate with energies reported relative to `shift`, so that two
    /// nearby evaluations can be compared below the rounding level of Eφ.
    pub fn evaluate_shifted(&self, phi: &StateVector, shift: f64) -> Result<OmegaParts> {
        if phi.dim() != self.dim() {
            return Err(OmegaError::DimensionMismatch {
                expected: self.dim(),
                found: phi.dim(),
            });
        }
        let v = phi.as_vector();
        let hv = self.h.apply(v);
        let mut shifted = hv.clone();
        shifted.axpy(-shift, v, 1.0);
        let energy_shifted = v.dot(&shifted);
        let energy = shift + energy_shifted;
        let mut residual = hv;
        residual.axpy(-energy, v, 1.0);

        let mut overlaps = Vec::with_capacity(self.level());
        let mut numerators = Vec::with_capacity(self.level());
        let mut denominators = Vec::with_capacity(self.level());
        let mut sum = 0.0;
        for (i, phi_i) in self.lower.iter().enumerate() {
            let c = phi_i.overlap(phi);
            let r = -phi_i.as_vector().dot(&residual);
            let den = energy - self.lower_energies[i];
            if !(den > DENOMINATOR_GUARD) {
                return Err(OmegaError::EnergyOrderingViolation {
                    index: i,
                    energy,
                    lower: self.lower_energies[i],
                });
            }
            sum += r * r / den;
            overlaps.push(c);
            numerators.push(r);
            denominators.push(den);
        }
        let normalizer = 1.0 - overlaps.iter().map(|c| c * c).sum::<f64>();
        if !(normalizer > DENOMINATOR_GUARD) {
            return Err(OmegaError::OverlapSaturation {
                remainder: normalizer,
            });
        }
        Ok(OmegaParts {
            energy,
            energy_shifted,
            residual,
            overlaps,
            numerators,
            denominators,
            sum,
            normalizer,
            correction: 2.0 * sum / normalizer,
        })
    }

    /// Whether `phi` satisfies the evaluation preconditions.
    pub fn is_feasible(&self, phi: &StateVector) -> bool {
        self.evaluate(phi).is_ok()
    }

    /// Tangent-space gradient from already computed parts.
    pub fn gradient_from_parts(&self, phi: &StateVector, parts: &OmegaParts) -> DVector<f64> {
        let v = phi.as_vector();
        let d_energy = &parts.residual * 2.0;
        let d = parts.normalizer;
        // coefficient collecting every ∂E contribution
        let mut energy_coeff = 1.0;
        let mut g = DVector::zeros(self.dim());
        for i in 0..self.level() {
            let r = parts.numerators[i];
            let den = parts.denominators[i];
            let c = parts.overlaps[i];
            // ∂r_i = c_i ∂E + E φ_i − Hφ_i
            // ∂S  ∋ 2 r_i ∂r_i / den_i − r_i² ∂E / den_i²
            energy_coeff += (2.0 / d) * (2.0 * r * c / den - r * r / (den * den));
            let w = (2.0 / d) * 2.0 * r / den;
            g.axpy(w * parts.energy, self.lower[i].as_vector(), 1.0);
            g.axpy(-w, &self.h_lower[i], 1.0);
            // −2 S ∂D / D², ∂D = −2 Σ c_i φ_i
            g.axpy(
                4.0 * parts.sum * c / (d * d),
                self.lower[i].as_vector(),
                1.0,
            );
        }
        g.axpy(energy_coeff, &d_energy, 1.0);
        let radial = v.dot(&g);
        g.axpy(-radial, v, 1.0);
        g
    }
}

/// Ω_n at `phi`.
pub fn omega(problem: &OmegaProblem, phi: &StateVector) -> Result<f64> {
    problem.evaluate(phi).map(|p| p.value())
}

/// Gradient of Ω_n on the unit sphere (Euclidean gradient projected onto the
/// tangent space at `phi`).
pub fn omega_gradient(problem: &OmegaProblem, phi: &StateVector) -> Result<DVector<f64>> {
    let parts = problem.evaluate(phi)?;
    Ok(problem.gradient_from_parts(phi, &parts))
}

/// `Eφ_n = Eψ_n − P_L + P_H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleDecomposition {
    pub e_psi_n: f64,
    pub p_low: f64,
    pub p_high: f64,
}

impl SaddleDecomposition {
    pub fn e_phi(&self) -> f64 {
        self.e_psi_n - self.p_low + self.p_high
    }

    /// `Eψ_n + P_L + P_H`, minimized exactly at ψ_n.
    pub fn paraboloid(&self) -> f64 {
        self.e_psi_n + self.p_low + self.p_high
    }
}

pub fn saddle_decompose(
    spec: &SpectralDecomposition,
    phi: &StateVector,
    n: usize,
) -> Result<SaddleDecomposition> {
    spec.check_level(n)?;
    if phi.dim() != spec.dim() {
        return Err(OmegaError::DimensionMismatch {
            expected: spec.dim(),
            found: phi.dim(),
        });
    }
    let e_n = spec.energy(n);
    let coeffs = spec.coefficients(phi);
    let p_low = (0..n)
        .map(|i| (e_n - spec.energy(i)) * coeffs[i] * coeffs[i])
        .sum();
    let p_high = (n + 1..spec.dim())
        .map(|i| (spec.energy(i) - e_n) * coeffs[i] * coeffs[i])
        .sum();
    Ok(SaddleDecomposition {
        e_psi_n: e_n,
        p_low,
        p_high,
    })
}

/// Normalized component of `phi` above level `n`:
/// `Σ_{j>n} ψ_j⟨ψ_j|φ⟩ / √(Σ_{j>n}⟨ψ_j|φ⟩²)`.
pub fn collect_perp(
    spec: &SpectralDecomposition,
    phi: &StateVector,
    n: usize,
) -> Result<StateVector> {
    spec.check_level(n)?;
    let coeffs = spec.coefficients(phi);
    let weight: f64 = coeffs[n + 1..].iter().map(|c| c * c).sum();
    if weight <= 1e-24 {
        return Err(OmegaError::NoHigherComponent { level: n });
    }
    let mut v = DVector::zeros(spec.dim());
    for j in n + 1..spec.dim() {
        v.axpy(coeffs[j], spec.vector(j).as_vector(), 1.0);
    }
    StateVector::normalized(v)
}

/// Second derivatives of Ω_n in the eigenbasis chart
/// `(⟨ψ_0|φ⟩, …, ⟨ψ_{n−1}|φ⟩, ⟨ψ_{n+1}|φ⟩, …)`.
#[derive(Debug, Clone)]
pub struct HessianReport {
    pub n: usize,
    /// Chart coordinates of the evaluation point.
    pub coordinates: Vec<f64>,
    pub matrix: DMatrix<f64>,
    /// Leading principal minors, one per chart dimension. The first `n`
    /// run over the lower-level coordinates.
    pub principal_minors: Vec<f64>,
}

impl HessianReport {
    pub fn is_positive_definite(&self) -> bool {
        self.principal_minors.iter().all(|m| *m > 0.0)
    }

    /// Hessian restricted to the lower-level coordinates plus a single
    /// direction `high` in the span of the higher levels (chart components
    /// `n..`). Its leading minors are the lower minors followed by the full
    /// determinant on that reduced space.
    pub fn reduced(&self, high: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.matrix.nrows();
        if high.len() != m - self.n {
            return Err(OmegaError::DimensionMismatch {
                expected: m - self.n,
                found: high.len(),
            });
        }
        let norm = high.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(OmegaError::InvalidParameter(
                "zero reduction direction".into(),
            ));
        }
        let mut basis = DMatrix::zeros(m, self.n + 1);
        for i in 0..self.n {
            basis[(i, i)] = 1.0;
        }
        for (k, x) in high.iter().enumerate() {
            basis[(self.n + k, self.n)] = x / norm;
        }
        Ok(basis.transpose() * &self.matrix * basis)
    }
}

/// Determinants of the leading `k × k` blocks, `k = 1..=dim`.
pub fn leading_principal_minors(matrix: &DMatrix<f64>) -> Vec<f64> {
    (1..=matrix.nrows())
        .map(|k| matrix.view((0, 0), (k, k)).into_owned().determinant())
        .collect()
}

/// The lower-level gap products attached to the leading minors, in both
/// prefactor conventions: `2^k ∏_{i≤k}(Eψ_n − Eψ_i)` as printed, and
/// `2^{k+1} ∏_{i≤k}(Eψ_n − Eψ_i)`, which is the determinant of a
/// `(k+1) × (k+1)` diagonal block with entries `2(Eψ_n − Eψ_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinorConventions {
    pub k: usize,
    pub gap_product: f64,
    pub printed: f64,
    pub diagonal_block: f64,
}

pub fn lower_minor_conventions(spec: &SpectralDecomposition, n: usize) -> Vec<MinorConventions> {
    let e_n = spec.energy(n);
    let mut product = 1.0;
    (0..n)
        .map(|k| {
            product *= e_n - spec.energy(k);
            MinorConventions {
                k,
                gap_product: product,
                printed: 2f64.powi(k as i32) * product,
                diagonal_block: 2f64.powi(k as i32 + 1) * product,
            }
        })
        .collect()
}

/// The full-minor counterpart with the higher-level gap `E_perp − Eψ_n`.
pub fn full_minor_conventions(
    spec: &SpectralDecomposition,
    n: usize,
    e_perp: f64,
) -> MinorConventions {
    let e_n = spec.energy(n);
    let product = (e_perp - e_n) * (0..n).map(|i| e_n - spec.energy(i)).product::<f64>();
    MinorConventions {
        k: n,
        gap_product: product,
        printed: 2f64.powi(n as i32) * product,
        diagonal_block: 2f64.powi(n as i32 + 1) * product,
    }
}

/// Central finite-difference Hessian of Ω_n in the eigenbasis chart at `phi`.
pub fn omega_hessian(
    problem: &OmegaProblem,
    spec: &SpectralDecomposition,
    phi: &StateVector,
) -> Result<HessianReport> {
    omega_hessian_with_step(problem, spec, phi, HESSIAN_STEP)
}

pub fn omega_hessian_with_step(
    problem: &OmegaProblem,
    spec: &SpectralDecomposition,
    phi: &StateVector,
    step: f64,
) -> Result<HessianReport> {
    let n = problem.level();
    let dim = problem.dim();
    let centre = to_eigenbasis(phi, spec, n)?;
    let x0 = centre.chart();
    let m = x0.len();
    let shift = problem.evaluate(phi)?.energy;
    let f = |x: &[f64]| -> Result<f64> {
        let coords = EigenbasisCoordinates::from_chart(n, dim, x)?;
        let state = StateVector::normalized(coords.synthesize(spec))?;
        Ok(problem.evaluate_shifted(&state, shift)?.value_shifted())
    };
    let f0 = problem.evaluate_shifted(phi, shift)?.value_shifted();
    let mut hess = DMatrix::zeros(m, m);
    let mut x = x0.clone();
    for a in 0..m {
        x[a] = x0[a] + step;
        let fp = f(&x)?;
        x[a] = x0[a] - step;
        let fm = f(&x)?;
        x[a] = x0[a];
        hess[(a, a)] = (fp - 2.0 * f0 + fm) / (step * step);
        for b in 0..a {
            let mut corner = |sa: f64, sb: f64| -> Result<f64> {
                x[a] = x0[a] + sa * step;
                x[b] = x0[b] + sb * step;
                let v = f(&x);
                x[a] = x0[a];
                x[b] = x0[b];
                v
            };
            let fpp = corner(1.0, 1.0)?;
            let fpm = corner(1.0, -1.0)?;
            let fmp = corner(-1.0, 1.0)?;
            let fmm = corner(-1.0, -1.0)?;
            let value = (fpp - fpm - fmp + fmm) / (4.0 * step * step);
            hess[(a, b)] = value;
            hess[(b, a)] = value;
        }
    }
    let principal_minors = leading_principal_minors(&hess);
    Ok(HessianReport {
        n,
        coordinates: x0,
        matrix: hess,
        principal_minors,
    })
}

/// Parameters of the steepened functional `N · (Ω + |Ω − E_f| / |E_f T|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteepeningParams {
    pub scale_n: f64,
    pub curvature_t: f64,
    pub e_f: f64,
}

impl SteepeningParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale_n.is_finite() && self.scale_n > 0.0) {
            return Err(OmegaError::InvalidSteepening(format!(
                "N must be finite and positive, got {}",
                self.scale_n
            )));
        }
        if !(self.curvature_t.is_finite() && self.curvature_t > 0.0) {
            return Err(OmegaError::InvalidSteepening(format!(
                "T must be finite and positive, got {}",
                self.curvature_t
            )));
        }
        if !self.e_f.is_finite() {
            return Err(OmegaError::InvalidSteepening("E_f is not finite".into()));
        }
        if self.e_f.abs() < 1e-300 {
            return Err(OmegaError::ZeroEf);
        }
        Ok(())
    }

    /// Slope of the penalty with respect to Ω: `1 / |E_f T|`.
    pub fn penalty_slope(&self) -> f64 {
        1.0 / (self.e_f * self.curvature_t).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteepenedValue {
    pub omega: f64,
    pub raw: f64,
    pub scaled: f64,
}

pub fn steepened_from_omega(omega_value: f64, params: &SteepeningParams) -> Result<SteepenedValue> {
    params.validate()?;
    let raw = omega_value + (omega_value - params.e_f).abs() * params.penalty_slope();
    Ok(SteepenedValue {
        omega: omega_value,
        raw,
        scaled: params.scale_n * raw,
    })
}

pub fn steepened(
    problem: &OmegaProblem,
    phi: &StateVector,
    params: &SteepeningParams,
) -> Result<SteepenedValue> {
    params.validate()?;
    steepened_from_omega(omega(problem, phi)?, params)
}

/// Curvature scale `T = 1 / max(1, c)` where `c` is the largest second
/// derivative of Ω along the sphere-retracted computational-basis tangent
/// directions at `phi`. Needs no knowledge of the exact spectrum.
pub fn estimate_curvature_t(problem: &OmegaProblem, phi: &StateVector) -> Result<f64> {
    let shift = problem.evaluate(phi)?.energy;
    let f0 = problem.evaluate_shifted(phi, shift)?.value_shifted();
    let step = HESSIAN_STEP;
    let mut largest: f64 = 0.0;
    for k in 0..problem.dim() {
        let mut d = DVector::zeros(problem.dim());
        d[k] = 1.0;
        let radial = phi.as_vector().dot(&d);
        d.axpy(-radial, phi.as_vector(), 1.0);
        let norm = d.norm();
        if norm < 1e-8 {
            continue;
        }
        d /= norm;
        let along = |t: f64| -> Result<f64> {
            let v = phi.as_vector() * t.cos() + &d * t.sin();
            let s = StateVector::normalized(v)?;
            Ok(problem.evaluate_shifted(&s, shift)?.value_shifted())
        };
        let curvature = (along(step)? - 2.0 * f0 + along(-step)?) / (step * step);
        largest = largest.max(curvature);
    }
    Ok(1.0 / largest.max(1.0))
}
