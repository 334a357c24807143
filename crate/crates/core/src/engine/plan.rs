use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::ResourceDecomposition;

/// Joint (controls ⊗ simulator) dimension above which faithful strategy-B
/// steps refuse to run.
pub const DEFAULT_FAITHFUL_CAP: usize = 1024;

/// Sub-step sizes above this are accepted but flagged.
pub const DELTA_WARNING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Measure each control qubit right after its controlled-SWAP.
    #[serde(rename = "A")]
    A,
    /// Defer to the end of the Trotter step, post-select on `|+⟩^⊗ℓ`.
    #[serde(rename = "B-local")]
    BLocal,
    /// Defer to the end of the Trotter step, post-select on the uniform
    /// superposition of `|0…0⟩` and the one-hot strings.
    #[serde(rename = "B-global")]
    BGlobal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Dense simulation of control qubits, channels and projective measurement.
    Faithful,
    /// First-order update `σ ← (I − Σδϱ) σ (I − Σδϱ)`.
    Effective,
    /// Faithful physics with every post-selection drawn at random.
    Sampled,
}

/// Which update rule a step uses. `Mode::Sampled` steps are faithful.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Faithful,
    Effective,
}

impl Mode {
    pub fn semantics(self) -> Semantics {
        match self {
            Mode::Effective => Semantics::Effective,
            Mode::Faithful | Mode::Sampled => Semantics::Faithful,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubStep {
    /// Index into the decomposition's terms.
    pub term: usize,
    /// `β·h_term/N`.
    pub delta: f64,
}

/// `N` repetitions of one ordered pass over the decomposition.
#[derive(Debug, Clone)]
pub struct TrotterPlan {
    pub beta: f64,
    pub steps: usize,
    pub substeps: Vec<SubStep>,
    pub strategy: Strategy,
    pub mode: Mode,
    pub faithful_cap: usize,
    decomposition: ResourceDecomposition,
    warnings: Vec<String>,
}

impl TrotterPlan {
    pub fn decomposition(&self) -> &ResourceDecomposition {
        &self.decomposition
    }

    /// Number of resource terms per Trotter step.
    pub fn ell(&self) -> usize {
        self.substeps.len()
    }

    pub fn max_abs_delta(&self) -> f64 {
        self.substeps.iter().map(|s| s.delta.abs()).fold(0.0, f64::max)
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn with_faithful_cap(mut self, cap: usize) -> Self {
        self.faithful_cap = cap;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }
}

pub fn make_plan(
    decomposition: &ResourceDecomposition,
    beta: f64,
    steps: usize,
    strategy: Strategy,
    mode: Mode,
) -> Result<TrotterPlan> {
    if steps == 0 {
        return Err(Error::InvalidParams("number of Trotter steps must be at least 1".into()));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidParams(format!("imaginary time must be finite and non-negative, got {beta}")));
    }
    let substeps: Vec<SubStep> = decomposition
        .terms
        .iter()
        .enumerate()
        .map(|(term, t)| SubStep { term, delta: beta * t.weight / steps as f64 })
        .collect();
    let mut warnings = Vec::new();
    if let Some(s) = substeps.iter().find(|s| s.delta.abs() >= 1.0) {
        return Err(Error::DeltaOutOfRange { delta: s.delta });
    }
    let largest = substeps.iter().map(|s| s.delta.abs()).fold(0.0, f64::max);
    if largest > DELTA_WARNING {
        warnings.push(format!(
            "largest |delta| = {largest:.4} exceeds {DELTA_WARNING}; first-order errors may dominate"
        ));
    }
    Ok(TrotterPlan {
        beta,
        steps,
        substeps,
        strategy,
        mode,
        faithful_cap: DEFAULT_FAITHFUL_CAP,
        decomposition: decomposition.clone(),
        warnings,
    })
}
