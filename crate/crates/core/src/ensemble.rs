//! Seeded random model Hamiltonians and random trial states.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{OmegaError, Result};
use crate::model_space::{orthonormalize, StateVector, SymmetricOperator, DEGENERACY_GUARD};

pub type ModelRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> ModelRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream used for random models.
pub const MODEL_STREAM: u64 = 0;
/// Stream used for random optimizer starts.
pub const START_STREAM: u64 = 1;
/// Stream used for random trial states.
pub const STATE_STREAM: u64 = 2;

/// Independent stream `stream` of the generator seeded with `seed`, so that
/// equal seeds for different purposes never share random numbers.
pub fn seeded_stream(seed: u64, stream: u64) -> ModelRng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(stream);
    rng
}

/// Parameters of a random model: ascending eigenvalues with adjacent gaps of
/// at least `min_gap`, all within an interval of width `spread` centred on
/// zero, conjugated by a random orthogonal matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomModelSpec {
    pub dim: usize,
    pub seed: u64,
    pub min_gap: f64,
    pub spread: f64,
}

#[derive(Debug, Clone)]
pub struct RandomModel {
    pub operator: SymmetricOperator,
    /// The sampled spectrum the operator was built from.
    pub energies: Vec<f64>,
}

impl RandomModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(OmegaError::DimensionTooSmall(self.dim));
        }
        if !(self.min_gap.is_finite() && self.min_gap > DEGENERACY_GUARD) {
            return Err(OmegaError::InvalidParameter(format!(
                "min_gap must exceed {DEGENERACY_GUARD:e}, got {}",
                self.min_gap
            )));
        }
        let needed = (self.dim - 1) as f64 * self.min_gap;
        if !(self.spread.is_finite() && self.spread >= needed) {
            return Err(OmegaError::InvalidParameter(format!(
                "spread {} cannot hold {} gaps of {}",
                self.spread,
                self.dim - 1,
                self.min_gap
            )));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<RandomModel> {
        self.validate()?;
        let mut rng = seeded_rng(self.seed);
        let energies = sample_spectrum(self, &mut rng);
        let q = random_orthogonal(self.dim, &mut rng);
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&energies));
        let h = &q * lambda * q.transpose();
        Ok(RandomModel {
            operator: SymmetricOperator::symmetrized(h)?,
            energies,
        })
    }
}

fn sample_spectrum(spec: &RandomModelSpec, rng: &mut ModelRng) -> Vec<f64> {
    let slack = spec.spread - (spec.dim - 1) as f64 * spec.min_gap;
    let mut offsets: Vec<f64> = (0..spec.dim).map(|_| rng.random::<f64>() * slack).collect();
    offsets.sort_by(f64::total_cmp);
    offsets
        .iter()
        .enumerate()
        .map(|(k, s)| -0.5 * spec.spread + s + k as f64 * spec.min_gap)
        .collect()
}

pub fn generate_random_model(
    dim: usize,
    seed: u64,
    min_gap: f64,
    spread: f64,
) -> Result<SymmetricOperator> {
    RandomModelSpec {
        dim,
        seed,
        min_gap,
        spread,
    }
    .generate()
    .map(|m| m.operator)
}

/// Haar-like orthogonal matrix from Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal(dim: usize, rng: &mut ModelRng) -> DMatrix<f64> {
    loop {
        let cols: Vec<DVector<f64>> = (0..dim).map(|_| gaussian_vector(dim, rng)).collect();
        let q = orthonormalize(&cols, 1e-8);
        if q.len() == dim {
            return DMatrix::from_columns(&q);
        }
    }
}

pub fn gaussian_vector(dim: usize, rng: &mut ModelRng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Uniform random point on the unit sphere.
pub fn random_unit(dim: usize, rng: &mut ModelRng) -> StateVector {
    loop {
        if let Ok(v) = StateVector::normalized(gaussian_vector(dim, rng)) {
            return v;
        }
    }
}

/// Rotate `base` by `angle` toward the part of `toward` orthogonal to it.
pub fn rotate_toward(base: &StateVector, toward: &StateVector, angle: f64) -> Result<StateVector> {
    let mut d = toward.as_vector().clone();
    d.axpy(-base.overlap(toward), base.as_vector(), 1.0);
    let d = StateVector::normalized(d)?;
    StateVector::combination(&[(angle.cos(), base), (angle.sin(), &d)])
}

/// Rotate `base` by `angle` toward a uniformly random orthogonal direction.
pub fn random_perturbation(base: &StateVector, angle: f64, rng: &mut ModelRng) -> StateVector {
    loop {
        let dir = random_unit(base.dim(), rng);
        if base.overlap(&dir).abs() < 0.99 {
            if let Ok(v) = rotate_toward(base, &dir, angle) {
                return v;
            }
        }
    }
}

/// Random unit vector in the span of `directions` (assumed orthonormal).
pub fn random_in_span(directions: &[&StateVector], rng: &mut ModelRng) -> Result<StateVector> {
    let dim = directions
        .first()
        .map(|d| d.dim())
        .ok_or(OmegaError::EmptyComplement)?;
    loop {
        let mut v = DVector::zeros(dim);
        for d in directions {
            v.axpy(rng.sample::<f64, _>(StandardNormal), d.as_vector(), 1.0);
        }
        if let Ok(s) = StateVector::normalized(v) {
            return Ok(s);
        }
    }
}
