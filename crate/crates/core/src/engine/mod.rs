//! The controlled-SWAP / post-selection protocol.

mod channel;
mod control;
mod ledger;
mod plan;
mod run;
mod step;

pub use channel::{apply_kraus, CswapChannel};
pub use control::control_state;
pub use ledger::{LedgerEntry, ProbabilityLedger, ProbabilitySource};
pub use plan::{make_plan, Mode, Semantics, Strategy, SubStep, TrotterPlan, DEFAULT_FAITHFUL_CAP, DELTA_WARNING};
pub use run::{run, sample_run, SampleOutcome, SimulationState, TrialOutcome, Trajectory};
pub use step::{step_strategy_a, step_strategy_b, Measurement, StepResult, EXTINCTION_THRESHOLD};
