//! Trotterized execution of a plan and Monte Carlo sampling of its
//! post-selections.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ledger::{ProbabilityLedger, ProbabilitySource};
use super::plan::{Semantics, Strategy, TrotterPlan};
use super::step::{first_order_update, step_strategy_a, step_strategy_b, Measurement, StepResult};
use crate::error::{Error, Result};
use crate::hamiltonian::ResourceTerm;
use crate::tensor::{real_trace, DensityMatrix, RegisterLayout};

/// Simulator register with its normalized payload and the product of the
/// normalizations discarded so far.
#[derive(Debug, Clone)]
pub struct SimulationState {
    pub layout: RegisterLayout,
    pub payload: DensityMatrix,
    pub cumulative_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Normalized simulator state after each Trotter step.
    pub snapshots: Vec<DensityMatrix>,
    pub final_state: DensityMatrix,
    pub ledger: ProbabilityLedger,
    pub elapsed: Duration,
    pub seed: u64,
}

impl Trajectory {
    /// The ledger source whose probabilities drive the recorded states.
    pub fn driving_source(plan: &TrotterPlan) -> ProbabilitySource {
        match plan.mode.semantics() {
            Semantics::Faithful => ProbabilitySource::FaithfulExact,
            Semantics::Effective => ProbabilitySource::Formula,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialOutcome {
    Accepted,
    /// Index of the first failed measurement.
    Rejected { at: usize },
}

#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub successes: usize,
    pub trials: usize,
    pub frequency: f64,
    pub outcomes: Vec<TrialOutcome>,
    /// Mean of the accepted final states; `None` without successes.
    pub accepted_average: Option<DensityMatrix>,
}

struct Partial {
    trajectory: Trajectory,
    /// Measurement probabilities of the driving source, in order.
    driving: Vec<f64>,
    extinction: Option<Error>,
}

fn check_initial(plan: &TrotterPlan, sigma0: &DensityMatrix) -> Result<RegisterLayout> {
    let layout = RegisterLayout::qubits("q", plan.decomposition().n)?;
    if sigma0.dimension() != layout.total_dimension() {
        return Err(Error::DimensionMismatch { expected: layout.total_dimension(), found: sigma0.dimension() });
    }
    if !sigma0.is_normalized() {
        return Err(Error::InvalidState("initial state must have unit trace".into()));
    }
    Ok(layout)
}

fn execute(plan: &TrotterPlan, sigma0: &DensityMatrix, seed: u64) -> Result<Partial> {
    let start = Instant::now();
    let layout = check_initial(plan, sigma0)?;
    let semantics = plan.mode.semantics();
    let decomposition = plan.decomposition();
    let terms: Vec<(&ResourceTerm, f64)> =
        plan.substeps.iter().map(|s| (&decomposition.terms[s.term], s.delta)).collect();

    let mut state = SimulationState { layout, payload: sigma0.clone(), cumulative_norm: 1.0 };
    let mut ledger = ProbabilityLedger::new();
    let mut snapshots = Vec::with_capacity(plan.steps);
    let mut driving = Vec::new();
    let mut extinction = None;

    'steps: for step in 0..plan.steps {
        match plan.strategy {
            Strategy::A => {
                for (k, &(term, delta)) in terms.iter().enumerate() {
                    let formula = 0.5 * real_trace(&first_order_update(&state.payload, &[(term, delta)])?);
                    ledger.record_clamped(step, Some(k), formula, ProbabilitySource::Formula);
                    let faithful = step_strategy_a(&state.payload, term, delta, Semantics::Faithful);
                    let next = match semantics {
                        Semantics::Faithful => faithful,
                        Semantics::Effective => {
                            // faithful probability at the effective state, for the record
                            if let Ok(f) = &faithful {
                                ledger.record(step, Some(k), f.probability, ProbabilitySource::FaithfulExact);
                            }
                            step_strategy_a(&state.payload, term, delta, Semantics::Effective)
                        }
                    };
                    match advance(&mut state, next, step) {
                        Ok(p) => {
                            if semantics == Semantics::Faithful {
                                ledger.record(step, Some(k), p, ProbabilitySource::FaithfulExact);
                            }
                            driving.push(p);
                        }
                        Err(e @ Error::Extinction { .. }) => {
                            driving.push(0.0);
                            extinction = Some(e);
                            break 'steps;
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            Strategy::BLocal | Strategy::BGlobal => {
                let measurement =
                    if plan.strategy == Strategy::BLocal { Measurement::Local } else { Measurement::Global };
                let ell = terms.len();
                let tr = real_trace(&first_order_update(&state.payload, &terms)?);
                match measurement {
                    Measurement::Global => {
                        ledger.record_clamped(step, None, tr / (ell + 1) as f64, ProbabilitySource::Formula)
                    }
                    Measurement::Local => {
                        let local = tr / 2f64.powi(ell as i32);
                        ledger.record_clamped(step, None, local, ProbabilitySource::Formula);
                        ledger.record_clamped(step, None, local / 2.0, ProbabilitySource::FormulaAlt);
                    }
                }
                let next = match semantics {
                    Semantics::Faithful => {
                        step_strategy_b(&state.payload, &terms, measurement, Semantics::Faithful, plan.faithful_cap)
                    }
                    Semantics::Effective => {
                        if let Ok(f) = step_strategy_b(
                            &state.payload,
                            &terms,
                            measurement,
                            Semantics::Faithful,
                            plan.faithful_cap,
                        ) {
                            ledger.record(step, None, f.probability, ProbabilitySource::FaithfulExact);
                        }
                        step_strategy_b(&state.payload, &terms, measurement, Semantics::Effective, plan.faithful_cap)
                    }
                };
                match advance(&mut state, next, step) {
                    Ok(p) => {
                        if semantics == Semantics::Faithful {
                            ledger.record(step, None, p, ProbabilitySource::FaithfulExact);
                        }
                        driving.push(p);
                    }
                    Err(e @ Error::Extinction { .. }) => {
                        driving.push(0.0);
                        extinction = Some(e);
                        break 'steps;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        snapshots.push(state.payload.clone());
    }

    Ok(Partial {
        trajectory: Trajectory {
            snapshots,
            final_state: state.payload,
            ledger,
            elapsed: start.elapsed(),
            seed,
        },
        driving,
        extinction,
    })
}

fn advance(state: &mut SimulationState, next: Result<StepResult>, step: usize) -> Result<f64> {
    match next {
        Ok(r) => {
            state.payload = r.state;
            state.cumulative_norm *= r.probability;
            Ok(r.probability)
        }
        Err(Error::Extinction { probability, .. }) => Err(Error::Extinction { step, probability }),
        Err(e) => Err(e),
    }
}

/// Executes all `N` Trotter steps, conditioning on every post-selection
/// succeeding. Both the faithful and formula probabilities are recorded; for
/// strategy B every Trotter step ends with its own measurement.
pub fn run(plan: &TrotterPlan, sigma0: &DensityMatrix, seed: u64) -> Result<Trajectory> {
    let partial = execute(plan, sigma0, seed)?;
    match partial.extinction {
        Some(e) => Err(e),
        None => Ok(partial.trajectory),
    }
}

/// Repeats the protocol `trials` times, drawing every measurement outcome
/// from the plan's own success probabilities. A trial stops at its first
/// failed post-selection. Since the conditional state after a success is
/// deterministic, the accepted average is the conditioned final state.
pub fn sample_run(plan: &TrotterPlan, sigma0: &DensityMatrix, trials: usize, seed: u64) -> Result<SampleOutcome> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let partial = execute(plan, sigma0, seed)?;
    let completed = partial.extinction.is_none();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes = Vec::with_capacity(trials);
    let mut successes = 0;
    for _ in 0..trials {
        let failed = partial.driving.iter().position(|&p| !rng.gen_bool(p.clamp(0.0, 1.0)));
        match failed {
            None if completed => {
                successes += 1;
                outcomes.push(TrialOutcome::Accepted);
            }
            None => outcomes.push(TrialOutcome::Rejected { at: partial.driving.len() - 1 }),
            Some(at) => outcomes.push(TrialOutcome::Rejected { at }),
        }
    }
    Ok(SampleOutcome {
        successes,
        trials,
        frequency: successes as f64 / trials as f64,
        outcomes,
        accepted_average: (successes > 0).then(|| partial.trajectory.final_state.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::plan::{make_plan, Mode};
    use crate::hamiltonian::{decompose_ising_local, Boundary, IsingParams, Provenance, ResourceDecomposition};
    use crate::tensor::testing::max_abs_diff;
    use crate::tensor::{ComplexMatrix, PureState, ONE, ZERO};

    fn single_term() -> ResourceDecomposition {
        let rho = DensityMatrix::from_raw(ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]));
        let t = ResourceTerm::new(1.0, rho, vec![0], "Z(0)").unwrap();
        ResourceDecomposition::new(1, vec![t], 0.0, Provenance::PauliGeneric).unwrap()
    }

    fn plus() -> DensityMatrix {
        DensityMatrix::from_pure(&PureState::uniform(2))
    }

    #[test]
    fn single_step_matches_step_function() {
        let d = single_term();
        for mode in [Mode::Faithful, Mode::Effective] {
            let plan = make_plan(&d, 0.1, 1, Strategy::A, mode).unwrap();
            let traj = run(&plan, &plus(), 0).unwrap();
            let direct = step_strategy_a(&plus(), &d.terms[0], 0.1, mode.semantics()).unwrap();
            assert!(max_abs_diff(traj.final_state.matrix(), direct.state.matrix()) < 1e-15);
            assert_eq!(traj.snapshots.len(), 1);
            let source = Trajectory::driving_source(&plan);
            assert!((traj.ledger.cumulative(source) - direct.probability).abs() < 1e-14);
        }
    }

    #[test]
    fn ledger_holds_both_sources() {
        let d = decompose_ising_local(&IsingParams::new(2, 1.0, 1.0, Boundary::Open).unwrap()).unwrap();
        for strategy in [Strategy::A, Strategy::BGlobal, Strategy::BLocal] {
            let plan = make_plan(&d, 0.5, 10, strategy, Mode::Faithful).unwrap();
            let sigma0 = DensityMatrix::from_pure(&PureState::uniform(4));
            let traj = run(&plan, &sigma0, 0).unwrap();
            let per_step = if strategy == Strategy::A { plan.ell() } else { 1 };
            assert_eq!(traj.ledger.count(ProbabilitySource::FaithfulExact), 10 * per_step);
            assert_eq!(traj.ledger.count(ProbabilitySource::Formula), 10 * per_step);
            assert_eq!(traj.ledger.has(ProbabilitySource::FormulaAlt), strategy == Strategy::BLocal);
            assert_eq!(traj.snapshots.len(), 10);
            assert!(traj.snapshots.iter().all(|s| (s.trace() - 1.0).abs() < 1e-10));
            let c = traj.ledger.cumulative(ProbabilitySource::FaithfulExact);
            assert!((0.0..=1.0).contains(&c));
        }
    }

    #[test]
    fn rejects_mismatched_initial_state() {
        let plan = make_plan(&single_term(), 0.1, 1, Strategy::A, Mode::Faithful).unwrap();
        let wrong = DensityMatrix::maximally_mixed(4);
        assert!(matches!(run(&plan, &wrong, 0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn extinction_reports_trotter_step() {
        let d = single_term();
        let zero = DensityMatrix::from_raw(ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]));
        let plan = make_plan(&d, 0.999_999_999_999_99, 1, Strategy::A, Mode::Effective).unwrap();
        assert!(matches!(run(&plan, &zero, 0), Err(Error::Extinction { step: 0, .. })));
        let sampled = sample_run(&plan, &zero, 50, 1).unwrap();
        assert_eq!(sampled.successes, 0);
        assert!(sampled.accepted_average.is_none());
    }

    #[test]
    fn idle_plan_is_a_coin_flip_per_measurement() {
        let d = decompose_ising_local(&IsingParams::new(2, 1.0, 0.0, Boundary::Open).unwrap()).unwrap();
        let plan = make_plan(&d, 0.0, 2, Strategy::A, Mode::Sampled).unwrap();
        let sigma0 = DensityMatrix::from_pure(&PureState::uniform(4));
        let trials = 20_000;
        let out = sample_run(&plan, &sigma0, trials, 3).unwrap();
        let p = 0.5f64.powi(6);
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((out.frequency - p).abs() <= 3.0 * sd, "{} vs {p}", out.frequency);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let plan = make_plan(&single_term(), 0.1, 3, Strategy::A, Mode::Sampled).unwrap();
        let a = sample_run(&plan, &plus(), 500, 9).unwrap();
        let b = sample_run(&plan, &plus(), 500, 9).unwrap();
        let c = sample_run(&plan, &plus(), 500, 10).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        assert_ne!(a.outcomes, c.outcomes);
    }
}
