//! β sweeps comparing the protocol against the exact oracle.

use rayon::prelude::*;

use sbqs::bounds::{fidelity_lower_bound, sim_distance_bound, BoundsInputs, BoundsReport, FidelityBound};
use sbqs::engine::{make_plan, run, sample_run, Mode, ProbabilitySource};
use sbqs::hamiltonian::ResourceDecomposition;
use sbqs::oracle::{bures_distance, energy, exact_ite, ground, projector_fidelity, SpectralData};
use sbqs::tensor::{ComplexMatrix, DensityMatrix, PureState};
use sbqs::Error;

use crate::config::{ExperimentConfig, InitialState};
use crate::HarnessError;

/// One β point. Protocol columns are `None` when the run went extinct or the
/// quantity was not computed.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub beta: f64,
    pub fidelity_sbqs_vs_ground: Option<f64>,
    pub fidelity_exact_ite_vs_ground: f64,
    pub bures_sbqs_vs_exact_ite: Option<f64>,
    pub success_prob_formula: Option<f64>,
    pub success_prob_faithful: Option<f64>,
    pub success_prob_empirical: Option<f64>,
    pub energy_sbqs: Option<f64>,
    pub sim_distance_bound: f64,
    pub fidelity_bound_sm: Option<f64>,
    /// Dimension of the ground space the fidelities are measured against.
    pub ground_projector_rank: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub rows: Vec<ResultRow>,
    pub bounds: BoundsReport,
    pub warnings: Vec<String>,
}

/// Everything a row needs, shared read-only between workers.
struct Setup {
    config: ExperimentConfig,
    decomposition: ResourceDecomposition,
    hamiltonian: ComplexMatrix,
    spectral: SpectralData,
    projector: ComplexMatrix,
    sigma0: DensityMatrix,
    f0: f64,
}

fn initial_state(config: &ExperimentConfig) -> DensityMatrix {
    match config.initial_state {
        InitialState::Uniform => DensityMatrix::from_pure(&PureState::uniform(1 << config.model.qubits())),
    }
}

fn setup(config: &ExperimentConfig) -> Result<Setup, HarnessError> {
    let decomposition = config.decompose()?;
    let hamiltonian = decomposition.densify()?;
    let spectral = ground(&hamiltonian)?;
    let projector = spectral.ground_projector();
    let sigma0 = initial_state(config);
    let f0 = projector_fidelity(&sigma0, &projector)?;
    Ok(Setup { config: config.clone(), decomposition, hamiltonian, spectral, projector, sigma0, f0 })
}

fn compute_row(s: &Setup, index: usize, beta: f64) -> Result<(ResultRow, Vec<String>), HarnessError> {
    let c = &s.config;
    let seed = c.seed.wrapping_add(index as u64);
    let plan = make_plan(&s.decomposition, beta, c.steps, c.strategy, c.mode)?;
    let exact = exact_ite(&s.hamiltonian, &s.sigma0, beta)?;
    let gap = if s.spectral.degenerate { 0.0 } else { s.spectral.gap };
    let mut row = ResultRow {
        beta,
        fidelity_sbqs_vs_ground: None,
        fidelity_exact_ite_vs_ground: projector_fidelity(&exact, &s.projector)?,
        bures_sbqs_vs_exact_ite: None,
        success_prob_formula: None,
        success_prob_faithful: None,
        success_prob_empirical: None,
        energy_sbqs: None,
        sim_distance_bound: sim_distance_bound(plan.ell(), beta, s.decomposition.max_abs_weight(), c.steps)?,
        fidelity_bound_sm: fidelity_lower_bound(beta, gap, s.f0, exact.dimension(), FidelityBound::Sm).ok(),
        ground_projector_rank: s.spectral.ground_rank(),
        note: None,
    };
    match run(&plan, &s.sigma0, seed) {
        Ok(traj) => {
            let state = &traj.final_state;
            row.fidelity_sbqs_vs_ground = Some(projector_fidelity(state, &s.projector)?);
            row.bures_sbqs_vs_exact_ite = Some(bures_distance(state, &exact)?);
            row.energy_sbqs = Some(energy(&s.hamiltonian, state)?);
            let ledger = &traj.ledger;
            row.success_prob_formula = Some(ledger.cumulative(ProbabilitySource::Formula));
            row.success_prob_faithful =
                ledger.has(ProbabilitySource::FaithfulExact).then(|| ledger.cumulative(ProbabilitySource::FaithfulExact));
            if ledger.clamped_count() > 0 {
                row.note = Some(format!("{} formula probabilities clamped to 1", ledger.clamped_count()));
            }
        }
        Err(e @ Error::Extinction { .. }) => row.note = Some(e.to_string()),
        Err(e) => return Err(e.into()),
    }
    if c.mode == Mode::Sampled {
        row.success_prob_empirical = Some(sample_run(&plan, &s.sigma0, c.trials, seed)?.frequency);
    }
    Ok((row, plan.warnings().to_vec()))
}

/// One row per β, in grid order. Rows are independent; with `parallel > 1`
/// they are computed on a dedicated pool of that width. Extinction is
/// recorded in the row's note rather than aborting the sweep.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment, HarnessError> {
    config.validate()?;
    let s = setup(config)?;
    let betas = config.betas();
    let results: Vec<Result<(ResultRow, Vec<String>), HarnessError>> = if config.parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallel)
            .build()
            .map_err(|e| HarnessError::Io(e.to_string()))?;
        pool.install(|| betas.par_iter().enumerate().map(|(i, &b)| compute_row(&s, i, b)).collect())
    } else {
        betas.iter().enumerate().map(|(i, &b)| compute_row(&s, i, b)).collect()
    };
    let mut rows = Vec::with_capacity(results.len());
    let mut warnings: Vec<String> = Vec::new();
    for r in results {
        let (row, w) = r?;
        rows.push(row);
        for msg in w {
            if !warnings.contains(&msg) {
                warnings.push(msg);
            }
        }
    }
    let bounds = bounds_report(config, &s)?;
    Ok(Experiment { rows, bounds, warnings })
}

/// The operator handed to the bound formulas: the shifted Hamiltonian when the
/// positivity shift is on, otherwise the operator the protocol evolves under.
fn bounds_hamiltonian(config: &ExperimentConfig, s: &Setup) -> Result<ComplexMatrix, HarnessError> {
    Ok(if config.positivity_shift { s.hamiltonian.clone() } else { s.decomposition.simulated_operator()? })
}

fn bounds_report(config: &ExperimentConfig, s: &Setup) -> Result<BoundsReport, HarnessError> {
    let h = bounds_hamiltonian(config, s)?;
    let beta = config.betas().last().copied().unwrap_or(0.0);
    Ok(BoundsReport::evaluate(&BoundsInputs {
        hamiltonian: &h,
        sigma0: &s.sigma0,
        ell: s.decomposition.len(),
        beta,
        steps: config.steps,
        h_max: s.decomposition.max_abs_weight(),
        epsilon: config.epsilon,
    })?)
}

/// Bounds for the largest β of the grid, without running the protocol.
pub fn evaluate_bounds(config: &ExperimentConfig) -> Result<BoundsReport, HarnessError> {
    config.validate()?;
    let s = setup(config)?;
    bounds_report(config, &s)
}
