use std::path::PathBuf;

use omega_core::ensemble::RandomModelSpec;
use omega_core::optimizer::OptimizerConfig;
use serde::Serialize;

use crate::args::{CommonArgs, Format};
use crate::error::{CliError, CliResult};

pub const BUILTIN_HE: &str = "he-model";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    OmegaMin,
    Hum,
    Refine,
    Pathology,
    Bench,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HamiltonianSource {
    File { path: PathBuf },
    Builtin { name: String },
    Random(RandomModelSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteepeningSpec {
    pub scale_n: f64,
    /// `None` means estimate from the curvature at the start.
    pub curvature_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub task: Task,
    pub hamiltonian_source: HamiltonianSource,
    pub optimizer: OptimizerConfig,
    pub steepening: Option<SteepeningSpec>,
    pub output: OutputSpec,
    pub seed: u64,
    pub epsilon: f64,
    pub trials: usize,
    pub phi0_angle: f64,
    pub outer_rounds: usize,
    pub basis_size: Option<usize>,
}

fn key_values(spec: &str, flag: &str) -> CliResult<Vec<(String, String)>> {
    spec.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                CliError::Config(format!("--{flag}: expected key=value, got '{part}'"))
            })?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn number<T: std::str::FromStr>(flag: &str, key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("--{flag}: invalid value '{value}' for {key}")))
}

/// Parse `dim=<n>,seed=<s>,min-gap=<g>,spread=<r>`; `min-gap` defaults to
/// 0.1 and `spread` to `max(4, (dim − 1)·min-gap)`.
pub fn parse_random(spec: &str) -> CliResult<RandomModelSpec> {
    let (mut dim, mut seed, mut min_gap, mut spread) = (None, None, 0.1, None);
    for (k, v) in key_values(spec, "random")? {
        match k.as_str() {
            "dim" => dim = Some(number("random", &k, &v)?),
            "seed" => seed = Some(number("random", &k, &v)?),
            "min-gap" | "min_gap" => min_gap = number("random", &k, &v)?,
            "spread" => spread = Some(number("random", &k, &v)?),
            _ => return Err(CliError::Config(format!("--random: unknown key '{k}'"))),
        }
    }
    let dim: usize = dim.ok_or_else(|| CliError::Config("--random: dim is required".into()))?;
    let seed = seed.ok_or_else(|| CliError::Config("--random: seed is required".into()))?;
    let spread = spread.unwrap_or_else(|| f64::max(4.0, dim.saturating_sub(1) as f64 * min_gap));
    let spec = RandomModelSpec {
        dim,
        seed,
        min_gap,
        spread,
    };
    spec.validate()
        .map_err(|e| CliError::Config(format!("--random: {e}")))?;
    Ok(spec)
}

/// Parse `N=<n>,T=<t>`; both keys are optional.
pub fn parse_steepen(spec: &str) -> CliResult<SteepeningSpec> {
    let mut out = SteepeningSpec {
        scale_n: 1.0,
        curvature_t: None,
    };
    for (k, v) in key_values(spec, "steepen")? {
        match k.as_str() {
            "N" | "n" => out.scale_n = number("steepen", &k, &v)?,
            "T" | "t" => out.curvature_t = Some(number("steepen", &k, &v)?),
            _ => return Err(CliError::Config(format!("--steepen: unknown key '{k}'"))),
        }
    }
    if !(out.scale_n.is_finite() && out.scale_n > 0.0) {
        return Err(CliError::Config("--steepen: N must be positive".into()));
    }
    if let Some(t) = out.curvature_t {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Config("--steepen: T must be positive".into()));
        }
    }
    Ok(out)
}

impl ScenarioConfig {
    pub fn from_args(task: Task, args: &CommonArgs) -> CliResult<Self> {
        let given = [
            args.input.is_some(),
            args.builtin.is_some(),
            args.random.is_some(),
        ];
        let count = given.iter().filter(|g| **g).count();
        if count != 1 {
            return Err(CliError::Config(format!(
                "exactly one of --input, --builtin, --random is required, got {count}"
            )));
        }
        let hamiltonian_source = if let Some(path) = &args.input {
            HamiltonianSource::File { path: path.clone() }
        } else if let Some(name) = &args.builtin {
            if name != BUILTIN_HE {
                return Err(CliError::Config(format!(
                    "unknown builtin '{name}', available: {BUILTIN_HE}"
                )));
            }
            HamiltonianSource::Builtin { name: name.clone() }
        } else {
            HamiltonianSource::Random(parse_random(args.random.as_deref().unwrap_or_default())?)
        };

        if !(args.tol.is_finite() && args.tol > 0.0) {
            return Err(CliError::Config(format!(
                "--tol must be positive, got {}",
                args.tol
            )));
        }
        let mut optimizer = OptimizerConfig::with_tol(args.tol);
        optimizer.seed = args.seed;
        if let Some(k) = args.max_iters {
            optimizer.max_iters = k;
        }
        if let Some(r) = args.restarts {
            optimizer.restart_count = r;
        }
        optimizer
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let steepening = args.steepen.as_deref().map(parse_steepen).transpose()?;
        if !(args.epsilon.is_finite() && args.epsilon >= 0.0) {
            return Err(CliError::Config("--epsilon must be non-negative".into()));
        }
        if !(args.phi0_angle.is_finite() && args.phi0_angle >= 0.0) {
            return Err(CliError::Config("--phi0-angle must be non-negative".into()));
        }
        if task == Task::Bench {
            if !matches!(hamiltonian_source, HamiltonianSource::Random(_)) {
                return Err(CliError::Config("bench requires --random".into()));
            }
            if args.trials == 0 {
                return Err(CliError::Config("--trials must be positive".into()));
            }
        }
        if task == Task::Refine && args.outer_rounds == 0 {
            return Err(CliError::Config("--outer-rounds must be positive".into()));
        }
        if args.basis_size == Some(0) {
            return Err(CliError::Config("--basis-size must be positive".into()));
        }
        Ok(Self {
            task,
            hamiltonian_source,
            optimizer,
            steepening,
            output: OutputSpec {
                path: args.out.clone(),
                format: args.format,
            },
            seed: args.seed,
            epsilon: args.epsilon,
            trials: args.trials,
            phi0_angle: args.phi0_angle,
            outer_rounds: args.outer_rounds,
            basis_size: args.basis_size,
        })
    }
}
