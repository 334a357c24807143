use serde::{Deserialize, Serialize};

/// How a recorded probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbabilitySource {
    /// Trace of the post-selected branch of the exactly normalized protocol.
    FaithfulExact,
    /// First-order formula: `Tr[AσA]/2` (strategy A), `/(ℓ+1)` (global) or
    /// `/2^ℓ` (local).
    Formula,
    /// Local strategy-B variant with `/2^(ℓ+1)`.
    FormulaAlt,
}

impl ProbabilitySource {
    pub const ALL: [ProbabilitySource; 3] =
        [ProbabilitySource::FaithfulExact, ProbabilitySource::Formula, ProbabilitySource::FormulaAlt];

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    /// Trotter step, 0-based.
    pub step: usize,
    /// Sub-step within the Trotter step; `None` for a whole strategy-B step.
    pub substep: Option<usize>,
    pub probability: f64,
    pub source: ProbabilitySource,
}

/// Per-measurement success probabilities and their running products, kept in
/// log space since long runs underflow `f64`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityLedger {
    entries: Vec<LedgerEntry>,
    log_cumulative: [f64; 3],
    counts: [usize; 3],
    clamped: usize,
}

impl ProbabilityLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Panics if `probability` is outside `[0, 1]`.
    pub fn record(&mut self, step: usize, substep: Option<usize>, probability: f64, source: ProbabilitySource) {
        assert!(
            (0.0..=1.0).contains(&probability),
            "probability {probability} outside [0, 1] at step {step}"
        );
        self.entries.push(LedgerEntry { step, substep, probability, source });
        self.log_cumulative[source.slot()] += probability.ln();
        self.counts[source.slot()] += 1;
    }

    /// Records a formula value, clamping it into `[0, 1]`. Signed resource
    /// weights can push first-order formulas above 1.
    pub fn record_clamped(&mut self, step: usize, substep: Option<usize>, probability: f64, source: ProbabilitySource) {
        let clamped = probability.clamp(0.0, 1.0);
        if clamped != probability {
            self.clamped += 1;
        }
        self.record(step, substep, clamped, source);
    }

    /// How many recorded values were clamped.
    pub fn clamped_count(&self) -> usize {
        self.clamped
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn probabilities(&self, source: ProbabilitySource) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().filter(move |e| e.source == source).map(|e| e.probability)
    }

    pub fn count(&self, source: ProbabilitySource) -> usize {
        self.counts[source.slot()]
    }

    pub fn has(&self, source: ProbabilitySource) -> bool {
        self.count(source) > 0
    }

    /// `ln Π p_i` over entries from `source` (0 when there are none).
    pub fn log_cumulative(&self, source: ProbabilitySource) -> f64 {
        self.log_cumulative[source.slot()]
    }

    pub fn cumulative(&self, source: ProbabilitySource) -> f64 {
        self.log_cumulative(source).exp()
    }
}
