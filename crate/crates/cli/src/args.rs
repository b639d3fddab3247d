use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "omega",
    version,
    about = "Variational excited-state experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues and eigenvectors of the Hamiltonian.
    Spectrum(CommonArgs),
    /// Minimize Ω_1 for the first excited state given a ground approximant.
    OmegaMin(CommonArgs),
    /// Secular-equation roots on a trial basis and the upper-bound check.
    Hum(CommonArgs),
    /// Alternate Ω_1 minimization with ground-state refinement.
    Refine(CommonArgs),
    /// The three-level construction where energy misidentifies the excited state.
    Pathology(CommonArgs),
    /// Repeated random trials of the above properties.
    Bench(CommonArgs),
}

impl Command {
    pub fn split(self) -> (crate::config::Task, CommonArgs) {
        use crate::config::Task;
        match self {
            Command::Spectrum(a) => (Task::Spectrum, a),
            Command::OmegaMin(a) => (Task::OmegaMin, a),
            Command::Hum(a) => (Task::Hum, a),
            Command::Refine(a) => (Task::Refine, a),
            Command::Pathology(a) => (Task::Pathology, a),
            Command::Bench(a) => (Task::Bench, a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON matrix file `{"dim": n, "entries": [[...], ...]}`.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Named builtin model (`he-model`).
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,
    /// Random model, e.g. `dim=6,seed=42,min-gap=0.1,spread=4`.
    #[arg(long, value_name = "SPEC")]
    pub random: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Steepened functional, e.g. `N=1,T=0.5` (T defaults to a curvature estimate).
    #[arg(long, value_name = "SPEC")]
    pub steepen: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for random starts and random trial states.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Energy shift ε of the pathology construction.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Number of bench trials.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Angle between ψ_0 and the generated ground approximant on non-builtin models.
    #[arg(long, default_value_t = 0.05)]
    pub phi0_angle: f64,
    /// Maximum outer rounds of `refine`.
    #[arg(long, default_value_t = 10)]
    pub outer_rounds: usize,
    /// Trial basis size for `hum` on non-builtin models.
    #[arg(long)]
    pub basis_size: Option<usize>,
}
