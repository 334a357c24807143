//! JSON experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sbqs::engine::{Mode, Strategy};
use sbqs::hamiltonian::{
    build_ising, decompose_ising_local, decompose_pauli_generic, Boundary, IsingParams, PauliString, PauliSum,
    ResourceDecomposition,
};
use sbqs::tensor::MAX_DIMENSION;

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliTerm {
    pub string: String,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Ising {
        n: usize,
        #[serde(rename = "J")]
        j: f64,
        #[serde(rename = "B")]
        b: f64,
        #[serde(default = "default_boundary")]
        boundary: Boundary,
    },
    Pauli {
        n: usize,
        terms: Vec<PauliTerm>,
    },
}

impl ModelSpec {
    pub fn qubits(&self) -> usize {
        match self {
            ModelSpec::Ising { n, .. } | ModelSpec::Pauli { n, .. } => *n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionChoice {
    IsingLocal,
    PauliGeneric,
}

/// Either an explicit list or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl BetaGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            BetaGrid::List(v) => v.clone(),
            BetaGrid::Range { start, stop, step } => {
                if !(*step > 0.0) || !start.is_finite() || !stop.is_finite() || !step.is_finite() {
                    return Vec::new();
                }
                let count = ((stop - start) / step + 1e-9).floor();
                if count < 0.0 {
                    return Vec::new();
                }
                (0..=count as usize).map(|k| start + k as f64 * step).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    #[default]
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_csv")]
    pub csv: String,
    /// File name of the fidelity plot; no plot when absent.
    #[serde(default)]
    pub svg: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), csv: default_csv(), svg: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    /// Defaults to `ising-local` for Ising models and `pauli-generic` otherwise.
    #[serde(default)]
    pub decomposition: Option<DecompositionChoice>,
    /// Adds `‖H‖₂·I` so every energy and probability formula sees `H ≥ 0`.
    #[serde(default)]
    pub positivity_shift: bool,
    #[serde(default = "default_beta")]
    pub beta: BetaGrid,
    #[serde(rename = "N", default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Target error for the β*/N*/p* bounds.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default = "default_parallel")]
    pub parallel: usize,
}

fn default_boundary() -> Boundary {
    Boundary::Periodic
}
fn default_dir() -> PathBuf {
    PathBuf::from("results")
}
fn default_csv() -> String {
    "results.csv".into()
}
fn default_beta() -> BetaGrid {
    BetaGrid::Range { start: 0.0, stop: 2.0, step: 0.25 }
}
fn default_steps() -> usize {
    200
}
fn default_strategy() -> Strategy {
    Strategy::A
}
fn default_mode() -> Mode {
    Mode::Faithful
}
fn default_trials() -> usize {
    10_000
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_parallel() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(vec![e.to_string()]))?;
        config.validate()?;
        Ok(config)
    }

    pub fn decomposition_choice(&self) -> DecompositionChoice {
        self.decomposition.unwrap_or(match self.model {
            ModelSpec::Ising { .. } => DecompositionChoice::IsingLocal,
            ModelSpec::Pauli { .. } => DecompositionChoice::PauliGeneric,
        })
    }

    pub fn betas(&self) -> Vec<f64> {
        self.beta.values()
    }

    /// Collects every violated invariant instead of stopping at the first.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut problems = Vec::new();
        let betas = self.betas();
        if betas.is_empty() {
            problems.push("beta: grid is empty".to_string());
        }
        if let Some(b) = betas.iter().find(|b| !b.is_finite() || **b < 0.0) {
            problems.push(format!("beta: values must be finite and non-negative, found {b}"));
        }
        if let Some(w) = betas.windows(2).find(|w| !(w[1] > w[0])) {
            problems.push(format!("beta: grid must be strictly increasing, found {} then {}", w[0], w[1]));
        }
        if self.steps == 0 {
            problems.push("N: must be at least 1".into());
        }
        if self.mode == Mode::Sampled && self.trials == 0 {
            problems.push("trials: must be at least 1 in sampled mode".into());
        }
        if self.parallel == 0 {
            problems.push("parallel: must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 2.0) {
            problems.push(format!("epsilon: must lie in (0, 2), found {}", self.epsilon));
        }
        let n = self.model.qubits();
        if n == 0 || (1usize << n.min(63)) > MAX_DIMENSION || n >= 63 {
            problems.push(format!("model.n: {n} qubits exceed the dense dimension cap of {MAX_DIMENSION}"));
        }
        match &self.model {
            ModelSpec::Ising { n, j, b, boundary } => {
                if let Err(e) = IsingParams::new(*n, *j, *b, *boundary) {
                    problems.push(format!("model: {e}"));
                }
            }
            ModelSpec::Pauli { n, terms } => {
                if terms.is_empty() {
                    problems.push("model.terms: at least one term is required".into());
                }
                for (i, t) in terms.iter().enumerate() {
                    match PauliString::parse(&t.string, t.coeff) {
                        Ok(p) if p.qubits() != *n => problems.push(format!(
                            "model.terms[{i}]: `{}` has {} letters, expected {n}",
                            t.string,
                            p.qubits()
                        )),
                        Ok(_) => {}
                        Err(e) => problems.push(format!("model.terms[{i}]: {e}")),
                    }
                }
                if self.decomposition == Some(DecompositionChoice::IsingLocal) {
                    problems.push("decomposition: ising-local requires an Ising model".into());
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Config(problems))
        }
    }

    /// The model as a Pauli sum, including the positivity shift when enabled.
    pub fn pauli_sum(&self) -> Result<PauliSum, HarnessError> {
        let sum = match &self.model {
            ModelSpec::Ising { n, j, b, boundary } => build_ising(&IsingParams::new(*n, *j, *b, *boundary)?)?,
            ModelSpec::Pauli { n, terms } => {
                let strings = terms
                    .iter()
                    .map(|t| PauliString::parse(&t.string, t.coeff))
                    .collect::<Result<Vec<_>, _>>()?;
                PauliSum::from_terms(*n, strings)?.fold_identities()
            }
        };
        Ok(if self.positivity_shift { sum.shifted_to_positive()?.0 } else { sum })
    }

    pub fn decompose(&self) -> Result<ResourceDecomposition, HarnessError> {
        let sum = self.pauli_sum()?;
        let mut decomposition = match (self.decomposition_choice(), &self.model) {
            (DecompositionChoice::IsingLocal, ModelSpec::Ising { n, j, b, boundary }) => {
                decompose_ising_local(&IsingParams::new(*n, *j, *b, *boundary)?)?
            }
            (DecompositionChoice::IsingLocal, ModelSpec::Pauli { .. }) => {
                return Err(HarnessError::Config(vec!["decomposition: ising-local requires an Ising model".into()]))
            }
            (DecompositionChoice::PauliGeneric, _) => decompose_pauli_generic(&sum.fold_identities())?,
        };
        if self.decomposition_choice() == DecompositionChoice::IsingLocal {
            // the local decomposition is built from the unshifted chain
            decomposition.identity_offset += sum.identity_offset();
        }
        Ok(decomposition)
    }

    pub fn csv_path(&self) -> PathBuf {
        self.output.dir.join(&self.output.csv)
    }

    pub fn svg_path(&self) -> Option<PathBuf> {
        self.output.svg.as_ref().map(|s| self.output.dir.join(s))
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    ExperimentConfig::from_json(&text)
}
