//! Variational functionals whose local minima sit at the excited states of
//! a non-degenerate finite model Hamiltonian, with the reference
//! constructions they are compared against and the ground-state refinement
//! procedures that use them.
//!
//! * [`model_space`]: states, symmetric operators, exact spectra, Rayleigh–Ritz.
//! * [`functional`]: Ω_n, its gradient and Hessian, the saddle decomposition,
//!   the steepened functional.
//! * [`optimizer`]: sphere-constrained descent for Ω_n, F, and the energy
//!   under orthogonality constraints.
//! * [`baselines`]: closest orthogonal approximant, secular roots, the
//!   prescribed-energy mix and the three-level pathology.
//! * [`refine`]: improving φ_0 orthogonally to φ_1 and the alternation loop.

pub mod baselines;
pub mod ensemble;
pub mod error;
pub mod functional;
pub mod model_space;
pub mod models;
pub mod optimizer;
pub mod refine;

pub use error::{OmegaError, Result};
pub use functional::{omega, omega_gradient, OmegaProblem};
pub use model_space::{
    energy, spectral_decompose, SpectralDecomposition, StateVector, SymmetricOperator,
};
