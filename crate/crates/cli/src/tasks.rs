use std::time::{SystemTime, UNIX_EPOCH};

use log::{debug, info};
use omega_core::baselines::{
    closest_approximant, degenerate_mix, hum_roots, make_pathology, PathologyParams,
};
use omega_core::ensemble::{
    random_perturbation, random_unit, seeded_stream, ModelRng, RandomModelSpec, STATE_STREAM,
};
use omega_core::functional::{estimate_curvature_t, SteepeningParams};
use omega_core::model_space::matrix_file::parse_matrix_json;
use omega_core::models::{he_model, he_phi0, he_phi1, he_trial, HE_DEMO_START};
use omega_core::optimizer::{
    minimize_energy_orthogonal, minimize_omega_multistart, minimize_steepened,
    random_feasible_start, OptimizationTrace, OptimizerConfig,
};
use omega_core::refine::{alternate, leading_order_condition, project_out_phi1};
use omega_core::{
    energy, omega, spectral_decompose, OmegaProblem, SpectralDecomposition, StateVector,
    SymmetricOperator,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{HamiltonianSource, ScenarioConfig, SteepeningSpec, Task};
use crate::error::{CliError, CliResult};

const MAX_TRACE_SAMPLES: usize = 200;
const OVERLAP_TARGET: f64 = 0.999;
const BOUND_SLACK: f64 = 1e-10;

pub fn load_hamiltonian(source: &HamiltonianSource) -> CliResult<SymmetricOperator> {
    match source {
        HamiltonianSource::File { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(parse_matrix_json(&text)?)
        }
        HamiltonianSource::Builtin { .. } => Ok(he_model()),
        HamiltonianSource::Random(spec) => Ok(spec.generate()?.operator),
    }
}

fn is_he(cfg: &ScenarioConfig) -> bool {
    matches!(cfg.hamiltonian_source, HamiltonianSource::Builtin { .. })
}

fn state_rng(cfg: &ScenarioConfig) -> ModelRng {
    seeded_stream(cfg.seed, STATE_STREAM)
}

fn vec_of(s: &StateVector) -> Vec<f64> {
    s.components().to_vec()
}

fn trace_json(trace: &OptimizationTrace) -> Value {
    let stride = trace.samples.len().div_ceil(MAX_TRACE_SAMPLES).max(1);
    let mut kept: Vec<_> = trace.samples.iter().step_by(stride).collect();
    if let Some(last) = trace.samples.last() {
        if kept.last().map(|s| s.iteration) != Some(last.iteration) {
            kept.push(last);
        }
    }
    json!({
        "termination": trace.termination,
        "iterations": trace.iterations,
        "final_value": trace.final_value,
        "final_grad_norm": trace.final_grad_norm,
        "final_state": vec_of(&trace.final_state),
        "sample_stride": stride,
        "samples": kept,
    })
}

/// Run the configured task and assemble the report.
pub fn run_scenario(cfg: &ScenarioConfig) -> CliResult<Value> {
    let h = load_hamiltonian(&cfg.hamiltonian_source)?;
    info!("task {:?} on a {}-dimensional operator", cfg.task, h.dim());
    let results = match cfg.task {
        Task::Spectrum => spectrum(&h)?,
        Task::OmegaMin => omega_min(cfg, &h)?,
        Task::Hum => hum(cfg, &h)?,
        Task::Refine => refine(cfg, &h)?,
        Task::Pathology => pathology(cfg, &h)?,
        Task::Bench => bench(cfg)?,
    };
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(json!({
        "tool": "omega",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": timestamp,
        "scenario": cfg,
        "results": results,
    }))
}

fn spectrum(h: &SymmetricOperator) -> CliResult<Value> {
    let spec = spectral_decompose(h)?;
    let gaps: Vec<f64> = spec.energies().windows(2).map(|w| w[1] - w[0]).collect();
    Ok(json!({
        "dim": h.dim(),
        "energies": spec.energies(),
        "gaps": gaps,
        "eigenvectors": spec.vectors().iter().map(vec_of).collect::<Vec<_>>(),
        "frobenius_norm": h.frobenius_norm(),
    }))
}

/// The ground approximant used by the non-builtin tasks: ψ_0 turned by
/// `phi0_angle` in a seeded random direction.
fn perturbed_ground(
    cfg: &ScenarioConfig,
    spec: &SpectralDecomposition,
    rng: &mut ModelRng,
) -> StateVector {
    random_perturbation(spec.vector(0), cfg.phi0_angle, rng)
}

fn require_dim(h: &SymmetricOperator, min: usize, task: &str) -> CliResult<()> {
    if h.dim() < min {
        return Err(CliError::Config(format!(
            "{task} needs at least {min} levels, the operator has {}",
            h.dim()
        )));
    }
    Ok(())
}

fn steepened_run(
    problem: &OmegaProblem,
    spec: &SpectralDecomposition,
    start: &StateVector,
    steep: &SteepeningSpec,
    opt: &OptimizerConfig,
) -> CliResult<Value> {
    let curvature_t = match steep.curvature_t {
        Some(t) => t,
        None => estimate_curvature_t(problem, start)?,
    };
    let initial = SteepeningParams {
        scale_n: steep.scale_n,
        curvature_t,
        e_f: omega(problem, start)?,
    };
    let run = minimize_steepened(problem, start, &initial, opt)?;
    let phi1 = &run.trace.final_state;
    Ok(json!({
        "initial_params": initial,
        "final_params": run.params,
        "f_raw": run.f_raw,
        "f_scaled": run.f_scaled,
        "omega": run.omega,
        "energy": energy(problem.hamiltonian(), phi1)?,
        "psi1_overlap_sq": spec.vector(1).overlap(phi1).powi(2),
        "trace": trace_json(&run.trace),
    }))
}

fn omega_min(cfg: &ScenarioConfig, h: &SymmetricOperator) -> CliResult<Value> {
    require_dim(h, 2, "omega-min")?;
    let spec = spectral_decompose(h)?;
    let mut rng = state_rng(cfg);
    let (phi0, start) = if is_he(cfg) {
        let (c, d) = HE_DEMO_START;
        (he_phi0(), Some(he_trial(c, d)?))
    } else {
        (perturbed_ground(cfg, &spec, &mut rng), None)
    };
    let problem = OmegaProblem::new(h.clone(), vec![phi0.clone()])?;
    let multi = minimize_omega_multistart(&problem, start.as_ref(), &cfg.optimizer)?;
    let best = multi.best_trace();
    let phi1 = &best.final_state;
    let coeffs = spec.coefficients(phi1);
    let sign = if coeffs[1] < 0.0 { -1.0 } else { 1.0 };
    let coeffs: Vec<f64> = coeffs.iter().map(|c| sign * c).collect();
    let off_target_max = coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != 1)
        .map(|(_, c)| c.abs())
        .fold(0.0, f64::max);
    let e_phi1 = energy(h, phi1)?;
    info!(
        "best of {} runs: Ω = {:.12}, largest off-target coefficient {:.3e}",
        multi.runs.len(),
        best.final_value,
        off_target_max
    );
    let runs: Vec<Value> = multi
        .runs
        .iter()
        .map(|r| {
            json!({
                "restart": r.restart,
                "termination": r.trace.termination,
                "iterations": r.trace.iterations,
                "final_value": r.trace.final_value,
                "psi1_overlap_sq": spec.vector(1).overlap(&r.trace.final_state).powi(2),
            })
        })
        .collect();
    let steepened = match &cfg.steepening {
        None => Value::Null,
        Some(steep) => {
            let s = match &start {
                Some(s) => s.clone(),
                None => random_feasible_start(&problem, &mut rng).ok_or_else(|| {
                    CliError::Config("no feasible start for the steepened run".into())
                })?,
            };
            steepened_run(&problem, &spec, &s, steep, &cfg.optimizer)?
        }
    };
    Ok(json!({
        "level": 1,
        "exact_energies": spec.energies(),
        "phi0": vec_of(&phi0),
        "energy_phi0": energy(h, &phi0)?,
        "start": start.as_ref().map(vec_of),
        "best_run": multi.best,
        "runs": runs,
        "phi1": vec_of(phi1),
        "energy_phi1": e_phi1,
        "energy_error": e_phi1 - spec.energy(1),
        "omega": best.final_value,
        "eigenbasis_coefficients": coeffs,
        "off_target_max": off_target_max,
        "within_tol": off_target_max < cfg.optimizer.tol_omega,
        "oracle": {
            "psi1_phi1_sq": spec.vector(1).overlap(phi1).powi(2),
            "psi0_phi1_sq": spec.vector(0).overlap(phi1).powi(2),
        },
        "trace": trace_json(best),
        "steepened": steepened,
    }))
}

/// `root_k ≥ E_k` and `root_k ≤ E_{dim−m+k}` for every root.
fn hum_bounds_hold(roots: &[f64], exact: &[f64]) -> bool {
    let (dim, m) = (exact.len(), roots.len());
    roots
        .iter()
        .enumerate()
        .all(|(k, r)| *r >= exact[k] - BOUND_SLACK && *r <= exact[dim - m + k] + BOUND_SLACK)
}

fn hum(cfg: &ScenarioConfig, h: &SymmetricOperator) -> CliResult<Value> {
    let spec = spectral_decompose(h)?;
    let basis: Vec<StateVector> = if is_he(cfg) && cfg.basis_size.is_none() {
        vec![he_phi0(), he_phi1()]
    } else {
        let m = cfg.basis_size.unwrap_or(2).min(h.dim());
        let mut rng = state_rng(cfg);
        (0..m)
            .map(|i| random_perturbation(spec.vector(i), cfg.phi0_angle, &mut rng))
            .collect()
    };
    let roots = hum_roots(h, &basis)?;
    let lower_bound_margins: Vec<f64> = roots
        .iter()
        .zip(spec.energies())
        .map(|(r, e)| r - e)
        .collect();
    Ok(json!({
        "exact_energies": spec.energies(),
        "basis": basis.iter().map(vec_of).collect::<Vec<_>>(),
        "basis_energies": basis.iter().map(|b| energy(h, b)).collect::<Result<Vec<_>, _>>()?,
        "roots": roots,
        "lower_bound_margins": lower_bound_margins,
        "bounds_hold": hum_bounds_hold(&roots, spec.energies()),
    }))
}

fn refine(cfg: &ScenarioConfig, h: &SymmetricOperator) -> CliResult<Value> {
    require_dim(h, 3, "refine")?;
    let spec = spectral_decompose(h)?;
    let phi0 = if is_he(cfg) {
        he_phi0()
    } else {
        perturbed_ground(cfg, &spec, &mut state_rng(cfg))
    };
    let leading = leading_order_condition(&spec, &phi0)?;
    let run = alternate(h, &phi0, &cfg.optimizer, cfg.outer_rounds, Some(&spec))?;
    let e0 = energy(h, &run.phi0)?;
    let e1 = energy(h, &run.phi1)?;
    let final_projection = project_out_phi1(&run.phi0, &run.phi1, h)?;
    debug!("alternation finished after {} rounds", run.outer_rounds);
    Ok(json!({
        "exact_energies": spec.energies(),
        "phi0_initial": vec_of(&phi0),
        "energy_phi0_initial": energy(h, &phi0)?,
        "leading_order": {"lhs": leading.lhs, "rhs": leading.rhs, "holds": leading.holds()},
        "outer_rounds": run.outer_rounds,
        "history": run.history,
        "phi0": vec_of(&run.phi0),
        "phi1": vec_of(&run.phi1),
        "energy_phi0": e0,
        "energy_phi1": e1,
        "phi0_phi1_overlap": final_projection.overlap,
        "oracle": {
            "psi0_phi0_sq": spec.vector(0).overlap(&run.phi0).powi(2),
            "psi1_phi1_sq": spec.vector(1).overlap(&run.phi1).powi(2),
            "energy_error_phi0": e0 - spec.energy(0),
            "energy_error_phi1": e1 - spec.energy(1),
        },
    }))
}

fn pathology(cfg: &ScenarioConfig, h: &SymmetricOperator) -> CliResult<Value> {
    require_dim(h, 3, "pathology")?;
    let source = spectral_decompose(h)?;
    let params = PathologyParams {
        e0: source.energy(0),
        e1: source.energy(1),
        e2: source.energy(2),
        epsilon: cfg.epsilon,
    };
    let p = make_pathology(&params)?;
    let spec = spectral_decompose(&p.h)?;
    let (psi0, psi1, psi2) = (spec.vector(0), spec.vector(1), spec.vector(2));

    let exact = closest_approximant(&p.h, &spec, psi0, 1)?;
    let closest = closest_approximant(&p.h, &spec, &p.phi0, 1)?;
    let start = StateVector::combination(&[(1.0, psi1), (1.0, &p.phi1)])?;
    let witness =
        minimize_energy_orthogonal(&p.h, std::slice::from_ref(&p.phi0), &start, &cfg.optimizer)?;
    let mix = degenerate_mix(
        &p.h,
        psi0,
        psi2,
        params.e0,
        params.e2,
        params.e1 - params.epsilon,
        -1.0,
    )?;
    let leading = leading_order_condition(&spec, &p.phi0)?;
    let problem = OmegaProblem::new(p.h.clone(), vec![p.phi0.clone()])?;
    Ok(json!({
        "params": params,
        "a": p.a,
        "b": p.b,
        "phi0": vec_of(&p.phi0),
        "phi1": vec_of(&p.phi1),
        "energy_phi0": energy(&p.h, &p.phi0)?,
        "energy_phi1": energy(&p.h, &p.phi1)?,
        "overlap_phi0_phi1": p.phi0.overlap(&p.phi1),
        "overlap_phi1_psi1": p.phi1.overlap(psi1),
        "exact_ground_closest_energy": exact.energy,
        "closest_approximant": {
            "state": vec_of(&closest.state),
            "energy": closest.energy,
            "energy_formula": closest.energy_formula,
            "overlap": closest.overlap,
        },
        "orthogonal_minimum": {
            "energy": witness.final_value,
            "psi1_overlap_sq": psi1.overlap(&witness.final_state).powi(2),
            "termination": witness.termination,
        },
        "hum_roots": hum_roots(&p.h, &[p.phi0.clone(), p.phi1.clone()])?,
        "mix": {
            "state": vec_of(&mix),
            "weight_minus": mix.overlap(psi0),
            "weight_plus": mix.overlap(psi2),
            "overlap_phi1": mix.overlap(&p.phi1),
        },
        "omega_psi1": omega(&problem, psi1)?,
        "omega_phi1": omega(&problem, &p.phi1)?,
        "leading_order": {"lhs": leading.lhs, "rhs": leading.rhs, "holds": leading.holds()},
    }))
}

struct TrialOutcome {
    model_seed: u64,
    hum_pass: bool,
    chain: Option<bool>,
    omega_deviation: f64,
    psi1_overlap_sq: f64,
}

fn bench_trial(
    cfg: &ScenarioConfig,
    base: &RandomModelSpec,
    trial: usize,
) -> CliResult<TrialOutcome> {
    let model_seed = base.seed.wrapping_add(trial as u64);
    let h = RandomModelSpec {
        seed: model_seed,
        ..*base
    }
    .generate()?
    .operator;
    let spec = spectral_decompose(&h)?;
    let mut rng = seeded_stream(model_seed, STATE_STREAM);
    let dim = h.dim();

    let m = cfg.basis_size.unwrap_or(2).min(dim);
    let basis: Vec<StateVector> = (0..m).map(|_| random_unit(dim, &mut rng)).collect();
    let hum_pass = hum_bounds_hold(&hum_roots(&h, &basis)?, spec.energies());

    let phi0 = random_perturbation(spec.vector(0), cfg.phi0_angle, &mut rng);
    let e_phi0 = energy(&h, &phi0)?;
    let chain = if e_phi0 < spec.energy(1) {
        let plus = closest_approximant(&h, &spec, &phi0, 1)?;
        let min = minimize_energy_orthogonal(
            &h,
            std::slice::from_ref(&phi0),
            &plus.state,
            &cfg.optimizer,
        )?;
        let roots = hum_roots(&h, &[phi0.clone(), min.final_state])?;
        Some(
            min.final_value <= plus.energy + 1e-9
                && plus.energy <= spec.energy(1) + 1e-9
                && roots[0] >= spec.energy(0) - BOUND_SLACK
                && roots[1] >= spec.energy(1) - BOUND_SLACK,
        )
    } else {
        None
    };

    let problem = OmegaProblem::new(h.clone(), vec![phi0])?;
    let omega_deviation = (omega(&problem, spec.vector(1))? - spec.energy(1)).abs();
    let opt = OptimizerConfig {
        seed: model_seed,
        ..cfg.optimizer
    };
    let best = minimize_omega_multistart(&problem, None, &opt)?;
    let psi1_overlap_sq = spec
        .vector(1)
        .overlap(&best.best_trace().final_state)
        .powi(2);
    Ok(TrialOutcome {
        model_seed,
        hum_pass,
        chain,
        omega_deviation,
        psi1_overlap_sq,
    })
}

fn bench(cfg: &ScenarioConfig) -> CliResult<Value> {
    let HamiltonianSource::Random(base) = &cfg.hamiltonian_source else {
        return Err(CliError::Config("bench requires --random".into()));
    };
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|t| bench_trial(cfg, base, t))
        .collect::<CliResult<Vec<_>>>()?;
    let n = outcomes.len();
    let hum_pass = outcomes.iter().filter(|o| o.hum_pass).count();
    let chain_tested = outcomes.iter().filter(|o| o.chain.is_some()).count();
    let chain_pass = outcomes.iter().filter(|o| o.chain == Some(true)).count();
    let overlap_pass = outcomes
        .iter()
        .filter(|o| o.psi1_overlap_sq >= OVERLAP_TARGET)
        .count();
    let max_dev = outcomes
        .iter()
        .map(|o| o.omega_deviation)
        .fold(0.0, f64::max);
    info!(
        "bench: HUM {hum_pass}/{n}, chain {chain_pass}/{chain_tested}, overlap {overlap_pass}/{n}"
    );
    let trials: Vec<Value> = outcomes
        .iter()
        .map(|o| {
            json!({
                "model_seed": o.model_seed,
                "hum_pass": o.hum_pass,
                "chain": o.chain,
                "omega_deviation": o.omega_deviation,
                "psi1_overlap_sq": o.psi1_overlap_sq,
            })
        })
        .collect();
    Ok(json!({
        "trials": n,
        "hum_bound": {"passed": hum_pass, "total": n, "summary": format!("{hum_pass}/{n}")},
        "inequality_chain": {"passed": chain_pass, "tested": chain_tested},
        "omega_at_eigenstate_max_deviation": max_dev,
        "omega_min_overlap": {"threshold": OVERLAP_TARGET, "passed": overlap_pass, "total": n},
        "per_trial": trials,
    }))
}
