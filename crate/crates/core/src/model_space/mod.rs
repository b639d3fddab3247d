//! Finite-dimensional real Hilbert space: states, symmetric operators, exact
//! spectra, Gram–Schmidt and Rayleigh–Ritz on trial subspaces.

pub mod jacobi;
pub mod matrix_file;

use nalgebra::{DMatrix, DVector};

use crate::error::{OmegaError, Result};
use jacobi::{fix_sign, jacobi_eigen};

/// Normalization tolerance for [`StateVector`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Smallest admissible gap between adjacent exact eigenvalues.
pub const DEGENERACY_GUARD: f64 = 1e-8;

/// Largest admissible Gram-matrix condition number for a trial basis.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Squared overlaps above `1 - PARALLEL_GUARD` count as parallel.
pub const PARALLEL_GUARD: f64 = 1e-12;

/// A Hamiltonian represented as a dense real symmetric matrix on an
/// orthonormal computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    matrix: DMatrix<f64>,
}

impl SymmetricOperator {
    /// Wrap a matrix that is exactly symmetric as stored.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(OmegaError::DimensionMismatch {
                expected: n,
                found: matrix.ncols(),
            });
        }
        if n < 2 {
            return Err(OmegaError::DimensionTooSmall(n));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(OmegaError::NonFinite);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if matrix[(i, j)] != matrix[(j, i)] {
                    return Err(OmegaError::Asymmetric {
                        row: i,
                        col: j,
                        deviation: (matrix[(i, j)] - matrix[(j, i)]).abs(),
                    });
                }
            }
        }
        Ok(Self { matrix })
    }

    /// Symmetrize `(A + Aᵀ)/2` first, then wrap.
    pub fn symmetrized(matrix: DMatrix<f64>) -> Result<Self> {
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Self::new(sym)
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(OmegaError::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    /// `H v` for an arbitrary vector of matching dimension.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    /// `⟨a|H|b⟩`.
    pub fn matrix_element(&self, a: &StateVector, b: &StateVector) -> f64 {
        a.as_vector().dot(&self.apply(b.as_vector()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(OmegaError::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

/// A real unit vector: a trial state φ or an eigenstate ψ.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<f64>);

impl StateVector {
    /// Accept a vector whose norm is within [`NORM_TOLERANCE`] of one.
    pub fn new(components: DVector<f64>) -> Result<Self> {
        if components.iter().any(|x| !x.is_finite()) {
            return Err(OmegaError::NonFinite);
        }
        let norm = components.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(OmegaError::NotNormalized(norm));
        }
        Ok(Self(components))
    }

    /// Scale an arbitrary nonzero vector to unit length.
    pub fn normalized(components: DVector<f64>) -> Result<Self> {
        if components.iter().any(|x| !x.is_finite()) {
            return Err(OmegaError::NonFinite);
        }
        let norm = components.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(OmegaError::NotNormalized(norm));
        }
        Ok(Self(components / norm))
    }

    pub fn from_slice(components: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(components))
    }

    /// The `k`-th computational basis vector.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[k] = 1.0;
        Self(v)
    }

    /// Normalized linear combination `Σ w_k v_k`.
    pub fn combination(terms: &[(f64, &StateVector)]) -> Result<Self> {
        let dim = terms
            .first()
            .map(|(_, v)| v.dim())
            .ok_or_else(|| OmegaError::InvalidParameter("empty combination".into()))?;
        let mut acc = DVector::zeros(dim);
        for (w, v) in terms {
            if v.dim() != dim {
                return Err(OmegaError::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
            acc.axpy(*w, v.as_vector(), 1.0);
        }
        Self::normalized(acc)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn components(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn negated(&self) -> Self {
        Self(-&self.0)
    }
}

/// Exact eigenpairs of a non-degenerate operator, ascending in energy.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    energies: Vec<f64>,
    vectors: Vec<StateVector>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.energies[i]
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &StateVector {
        &self.vectors[i]
    }

    /// All overlaps `⟨ψ_i|φ⟩`.
    pub fn coefficients(&self, phi: &StateVector) -> Vec<f64> {
        self.vectors.iter().map(|psi| psi.overlap(phi)).collect()
    }

    /// `Σ Eψ_i ψ_i ψ_iᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (e, psi) in self.energies.iter().zip(&self.vectors) {
            let v = psi.as_vector();
            m += v * v.transpose() * *e;
        }
        m
    }

    pub fn check_level(&self, n: usize) -> Result<()> {
        if n >= self.dim() {
            return Err(OmegaError::LevelOutOfRange {
                index: n,
                dim: self.dim(),
            });
        }
        Ok(())
    }
}

/// A trial state written in the eigenbasis of the target level `n`:
/// φ = Σ_{i<n} ψ_i low_i + ψ_n principal + Σ_{i>n} ψ_i high_i.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenbasisCoordinates {
    pub n: usize,
    pub coeffs_low: Vec<f64>,
    pub coeffs_high: Vec<f64>,
    pub principal: f64,
}

impl EigenbasisCoordinates {
    /// Build from the chart `coeffs_low ++ coeffs_high`, fixing the
    /// principal coefficient by normalization.
    pub fn from_chart(n: usize, dim: usize, chart: &[f64]) -> Result<Self> {
        if chart.len() + 1 != dim {
            return Err(OmegaError::DimensionMismatch {
                expected: dim - 1,
                found: chart.len(),
            });
        }
        if n >= dim {
            return Err(OmegaError::LevelOutOfRange { index: n, dim });
        }
        let radicand = 1.0 - chart.iter().map(|c| c * c).sum::<f64>();
        if radicand < 0.0 {
            return Err(OmegaError::InvalidParameter(format!(
                "chart point outside the unit ball: 1 - Σc² = {radicand:e}"
            )));
        }
        Ok(Self {
            n,
            coeffs_low: chart[..n].to_vec(),
            coeffs_high: chart[n..].to_vec(),
            principal: radicand.sqrt(),
        })
    }

    pub fn chart(&self) -> Vec<f64> {
        self.coeffs_low
            .iter()
            .chain(&self.coeffs_high)
            .copied()
            .collect()
    }

    /// `principal² + Σ coeffs²`, one for a normalized state.
    pub fn weight(&self) -> f64 {
        self.principal * self.principal + self.chart().iter().map(|c| c * c).sum::<f64>()
    }

    /// Re-synthesize the ambient vector.
    pub fn synthesize(&self, spec: &SpectralDecomposition) -> DVector<f64> {
        let dim = spec.dim();
        let mut v = DVector::zeros(dim);
        for (i, c) in self.coeffs_low.iter().enumerate() {
            v.axpy(*c, spec.vector(i).as_vector(), 1.0);
        }
        v.axpy(self.principal, spec.vector(self.n).as_vector(), 1.0);
        for (k, c) in self.coeffs_high.iter().enumerate() {
            v.axpy(*c, spec.vector(self.n + 1 + k).as_vector(), 1.0);
        }
        v
    }
}

/// Energy `⟨φ|H|φ⟩` of a normalized state.
pub fn energy(h: &SymmetricOperator, phi: &StateVector) -> Result<f64> {
    h.check_dim(phi.dim())?;
    Ok(h.matrix_element(phi, phi))
}

/// Rayleigh quotient of an arbitrary nonzero vector.
pub fn rayleigh_quotient(h: &SymmetricOperator, v: &DVector<f64>) -> f64 {
    v.dot(&h.apply(v)) / v.dot(v)
}

/// Exact eigenpairs by cyclic Jacobi, with the degeneracy guard applied.
pub fn spectral_decompose(h: &SymmetricOperator) -> Result<SpectralDecomposition> {
    let eig = jacobi_eigen(h.matrix())?;
    for (i, pair) in eig.values.windows(2).enumerate() {
        let gap = pair[1] - pair[0];
        if gap < DEGENERACY_GUARD {
            return Err(OmegaError::DegenerateSpectrum { index: i, gap });
        }
    }
    let vectors = eig
        .vectors
        .column_iter()
        .map(|c| StateVector(c.into_owned()))
        .collect();
    Ok(SpectralDecomposition {
        energies: eig.values,
        vectors,
    })
}

/// `(φ − χ⟨χ|φ⟩)/√(1 − ⟨χ|φ⟩²)`.
pub fn gram_schmidt_against(phi: &StateVector, chi: &StateVector) -> Result<StateVector> {
    if phi.dim() != chi.dim() {
        return Err(OmegaError::DimensionMismatch {
            expected: chi.dim(),
            found: phi.dim(),
        });
    }
    let s = chi.overlap(phi);
    let overlap_sq = s * s;
    if overlap_sq >= 1.0 - PARALLEL_GUARD {
        return Err(OmegaError::ParallelStates { overlap_sq });
    }
    let mut v = phi.as_vector().clone();
    v.axpy(-s, chi.as_vector(), 1.0);
    // divide by the closed-form norm, then clean up residual rounding
    v /= (1.0 - overlap_sq).sqrt();
    let residual = chi.as_vector().dot(&v);
    v.axpy(-residual, chi.as_vector(), 1.0);
    StateVector::normalized(v)
}

/// Orthonormalize a set of vectors by two passes of modified Gram–Schmidt.
/// Vectors whose remainder vanishes relative to `drop_below` are skipped.
pub(crate) fn orthonormalize(vectors: &[DVector<f64>], drop_below: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = v.norm();
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let norm = w.norm();
        if norm > drop_below * scale.max(f64::MIN_POSITIVE) {
            out.push(w / norm);
        }
    }
    out
}

/// Ritz values (ascending) and Ritz vectors of `H` restricted to a trial span.
#[derive(Debug, Clone)]
pub struct RitzPairs {
    pub energies: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

/// Gram-matrix condition number of a trial basis.
pub fn gram_condition(basis: &[StateVector]) -> Result<f64> {
    let m = basis.len();
    let gram = DMatrix::from_fn(m, m, |i, j| basis[i].overlap(&basis[j]));
    let gram = (&gram + gram.transpose()) * 0.5;
    let eig = jacobi_eigen(&gram)?;
    let lo = eig.values[0];
    let hi = eig.values[m - 1];
    Ok(if lo <= 0.0 { f64::INFINITY } else { hi / lo })
}

/// Rayleigh–Ritz: diagonalize `H` on `span(basis)`.
pub fn subspace_eigenpairs(h: &SymmetricOperator, basis: &[StateVector]) -> Result<RitzPairs> {
    if basis.is_empty() {
        return Err(OmegaError::InvalidParameter("empty trial basis".into()));
    }
    for b in basis {
        h.check_dim(b.dim())?;
    }
    let condition = gram_condition(basis)?;
    if condition.is_nan() || condition >= MAX_GRAM_CONDITION {
        return Err(OmegaError::IllConditionedBasis { condition });
    }
    let raw: Vec<DVector<f64>> = basis.iter().map(|b| b.as_vector().clone()).collect();
    let q = orthonormalize(&raw, 0.0);
    let m = q.len();
    let hq: Vec<DVector<f64>> = q.iter().map(|v| h.apply(v)).collect();
    let mut projected = DMatrix::from_fn(m, m, |i, j| q[i].dot(&hq[j]));
    projected = (&projected + projected.transpose()) * 0.5;
    let eig = jacobi_eigen(&projected)?;
    let vectors = eig
        .vectors
        .column_iter()
        .map(|y| {
            let mut v = DVector::zeros(h.dim());
            for (k, coeff) in y.iter().enumerate() {
                v.axpy(*coeff, &q[k], 1.0);
            }
            let mut comps: Vec<f64> = v.iter().copied().collect();
            fix_sign(&mut comps);
            StateVector::normalized(DVector::from_vec(comps))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RitzPairs {
        energies: eig.values,
        vectors,
    })
}

/// Express `φ` in the eigenbasis chart of level `n`. A global sign flip makes
/// `⟨ψ_n|φ⟩ ≥ 0`; when that overlap vanishes the first non-negligible
/// eigenbasis coefficient is made positive instead.
pub fn to_eigenbasis(
    phi: &StateVector,
    spec: &SpectralDecomposition,
    n: usize,
) -> Result<EigenbasisCoordinates> {
    if phi.dim() != spec.dim() {
        return Err(OmegaError::DimensionMismatch {
            expected: spec.dim(),
            found: phi.dim(),
        });
    }
    spec.check_level(n)?;
    let mut coeffs = spec.coefficients(phi);
    if coeffs[n].abs() > PARALLEL_GUARD {
        if coeffs[n] < 0.0 {
            coeffs.iter_mut().for_each(|c| *c = -*c);
        }
    } else {
        fix_sign(&mut coeffs);
    }
    Ok(EigenbasisCoordinates {
        n,
        coeffs_low: coeffs[..n].to_vec(),
        coeffs_high: coeffs[n + 1..].to_vec(),
        principal: coeffs[n].abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn he() -> SymmetricOperator {
        SymmetricOperator::diagonal(&[-2.903, -2.146, -2.06]).unwrap()
    }

    #[test]
    fn rejects_tiny_and_asymmetric_operators() {
        assert_eq!(
            SymmetricOperator::diagonal(&[1.0]).unwrap_err(),
            OmegaError::DimensionTooSmall(1)
        );
        let err = SymmetricOperator::from_rows(&[vec![0.0, 1.0], vec![1.5, 0.0]]).unwrap_err();
        assert_eq!(err.kind(), "Asymmetric");
    }

    #[test]
    fn state_vector_requires_unit_norm() {
        assert!(StateVector::from_slice(&[1.0, 0.0]).is_ok());
        assert!(matches!(
            StateVector::from_slice(&[1.0, 1.0]),
            Err(OmegaError::NotNormalized(_))
        ));
        assert!(StateVector::normalized(DVector::zeros(3)).is_err());
    }

    #[test]
    fn he_energies_of_eigen_and_example_states() {
        let h = he();
        let spec = spectral_decompose(&h).unwrap();
        assert_eq!(spec.energies(), &[-2.903, -2.146, -2.06]);
        for i in 0..3 {
            assert_eq!(spec.vector(i), &StateVector::basis(3, i));
        }
        assert_eq!(energy(&h, spec.vector(0)).unwrap(), -2.903);
        let phi0 = StateVector::normalized(DVector::from_vec(vec![0.9476, 0.0, 0.3194])).unwrap();
        assert!((energy(&h, &phi0).unwrap() + 2.817).abs() < 5e-4);
    }

    #[test]
    fn energy_dimension_mismatch() {
        let err = energy(&he(), &StateVector::basis(2, 0)).unwrap_err();
        assert_eq!(
            err,
            OmegaError::DimensionMismatch {
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn degenerate_spectrum_rejected() {
        let h = SymmetricOperator::diagonal(&[0.0, 1.0, 1.0 + 1e-9]).unwrap();
        assert!(matches!(
            spectral_decompose(&h),
            Err(OmegaError::DegenerateSpectrum { index: 1, .. })
        ));
    }

    #[test]
    fn gram_schmidt_cases() {
        let e = |k| StateVector::basis(3, k);
        // already orthogonal
        assert_eq!(gram_schmidt_against(&e(0), &e(1)).unwrap(), e(0));
        // exact removal
        let mix = StateVector::combination(&[(1.0, &e(0)), (1.0, &e(1))]).unwrap();
        let out = gram_schmidt_against(&mix, &e(1)).unwrap();
        assert!((out.as_vector() - e(0).as_vector()).norm() < 1e-15);
        // parallel
        assert!(matches!(
            gram_schmidt_against(&e(2), &e(2).negated()),
            Err(OmegaError::ParallelStates { .. })
        ));
    }

    #[test]
    fn ritz_on_invariant_subspace() {
        let h = he();
        let spec = spectral_decompose(&h).unwrap();
        let ritz = subspace_eigenpairs(&h, &spec.vectors()[..2]).unwrap();
        assert!((ritz.energies[0] + 2.903).abs() < 1e-15);
        assert!((ritz.energies[1] + 2.146).abs() < 1e-15);
    }

    #[test]
    fn ritz_rejects_dependent_basis() {
        let h = he();
        let a = StateVector::basis(3, 0);
        let b = StateVector::combination(&[(1.0, &a), (1e-9, &StateVector::basis(3, 1))]).unwrap();
        assert!(matches!(
            subspace_eigenpairs(&h, &[a, b]),
            Err(OmegaError::IllConditionedBasis { .. })
        ));
    }

    #[test]
    fn eigenbasis_chart_of_eigenstate() {
        let h = he();
        let spec = spectral_decompose(&h).unwrap();
        let coords = to_eigenbasis(&spec.vector(1).negated(), &spec, 1).unwrap();
        assert_eq!(coords.coeffs_low, vec![0.0]);
        assert_eq!(coords.coeffs_high, vec![0.0]);
        assert_eq!(coords.principal, 1.0);
    }

    #[test]
    fn chart_round_trip() {
        let coords = EigenbasisCoordinates::from_chart(1, 3, &[0.6, 0.0]).unwrap();
        assert!((coords.principal - 0.8).abs() < 1e-15);
        assert_eq!(coords.chart(), vec![0.6, 0.0]);
        assert!(EigenbasisCoordinates::from_chart(1, 3, &[0.9, 0.9]).is_err());
    }
}
