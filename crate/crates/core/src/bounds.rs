//! Closed-form error, fidelity and probability bounds, plus predicate forms of
//! the product-error lemmas for property testing.
//!
//! Big-O bounds are evaluated with constant 1. Distances inside this module
//! that feed the fidelity-derived bounds use the convention `D² = 1 − √F`;
//! elsewhere the crate uses `D² = 2(1 − √F)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{fidelity, ground};
use crate::tensor::{hermitian_eig, operator_norm, real_trace, ComplexMatrix, DensityMatrix};

/// `ℓ²β²h²/N`.
pub fn trotter_error(ell: usize, beta: f64, h: f64, steps: usize) -> Result<f64> {
    if steps == 0 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    let l = ell as f64;
    Ok(l * l * beta * beta * h * h / steps as f64)
}

/// Distance between the simulated and exact normalized states, `2ℓ²β²h²/N`.
pub fn sim_distance_bound(ell: usize, beta: f64, h: f64, steps: usize) -> Result<f64> {
    Ok(2.0 * trotter_error(ell, beta, h, steps)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelityBound {
    /// `1/(1 + d·e^{−2βΔ}/F₀)`
    Main,
    /// `(1 + e^{−2βΔ}(1 − F₀)/F₀)^{−1}`
    Sm,
}

fn check_f0(f0: f64) -> Result<()> {
    if !(f0 > 0.0 && f0 <= 1.0) {
        return Err(Error::UndefinedBound(format!("initial fidelity must lie in (0, 1], got {f0}")));
    }
    Ok(())
}

fn check_gap(gap: f64) -> Result<()> {
    if !(gap >= 0.0) || !gap.is_finite() {
        return Err(Error::UndefinedBound(format!("gap must be finite and non-negative, got {gap}")));
    }
    Ok(())
}

/// Lower bound on the ground-state fidelity of exact imaginary-time evolution
/// at `β`, starting from ground-state fidelity `F₀`.
pub fn fidelity_lower_bound(beta: f64, gap: f64, f0: f64, d: usize, variant: FidelityBound) -> Result<f64> {
    check_f0(f0)?;
    check_gap(gap)?;
    let decay = (-2.0 * beta * gap).exp();
    Ok(match variant {
        FidelityBound::Main => {
            if d < 2 {
                return Err(Error::UndefinedBound(format!("dimension must be at least 2, got {d}")));
            }
            1.0 / (1.0 + d as f64 * decay / f0)
        }
        FidelityBound::Sm => 1.0 / (1.0 + decay * (1.0 - f0) / f0),
    })
}

/// `√(1 − F_sm)`, bounding `√(1 − √F)` from above.
pub fn distance_upper_bound(beta: f64, gap: f64, f0: f64) -> Result<f64> {
    let f = fidelity_lower_bound(beta, gap, f0, 2, FidelityBound::Sm)?;
    Ok((1.0 - f).max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub simulation: f64,
    pub projection: f64,
    pub total: f64,
}

pub fn error_budget(ell: usize, beta: f64, h: f64, steps: usize, gap: f64, f0: f64) -> Result<ErrorBudget> {
    let simulation = sim_distance_bound(ell, beta, h, steps)?;
    let projection = distance_upper_bound(beta, gap, f0)?;
    Ok(ErrorBudget { simulation, projection, total: simulation + projection })
}

fn star_log(gap: f64, f0: f64, epsilon: f64) -> Result<f64> {
    if gap == 0.0 {
        return Err(Error::DegenerateGap);
    }
    check_gap(gap)?;
    if !(f0 > 0.0 && f0 < 1.0) {
        return Err(Error::UndefinedBound(format!("initial fidelity must lie in (0, 1), got {f0}")));
    }
    if !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(Error::UndefinedBound(format!("target error must lie in (0, 2), got {epsilon}")));
    }
    Ok(((1.0 - f0) * (4.0 - epsilon * epsilon) / (f0 * epsilon * epsilon)).ln())
}

/// Smallest `β` at which the projection addend of the budget is at most
/// `ε/2`; clamped at 0.
pub fn beta_star(gap: f64, f0: f64, epsilon: f64) -> Result<f64> {
    Ok((star_log(gap, f0, epsilon)? / (2.0 * gap)).max(0.0))
}

/// Trotter step count matching `β*`: `‖H‖²/(εΔ²)·[ln(...)]²`. Zero when `β*`
/// is clamped.
pub fn n_star(norm_h: f64, gap: f64, f0: f64, epsilon: f64) -> Result<f64> {
    let l = star_log(gap, f0, epsilon)?.max(0.0);
    Ok(norm_h * norm_h / (epsilon * gap * gap) * l * l)
}

/// A probability computed in log space, clamped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClampedProbability {
    pub value: f64,
    /// Natural log of the unclamped value.
    pub log_value: f64,
    pub clamped: bool,
}

impl ClampedProbability {
    fn from_log(log_value: f64) -> Self {
        let clamped = log_value > 0.0;
        Self { value: log_value.min(0.0).exp(), log_value, clamped }
    }
}

/// `ln Tr[e^{−βH} σ₀ e^{−βH}]`.
fn log_ite_trace(h: &ComplexMatrix, sigma0: &DensityMatrix, beta: f64) -> Result<f64> {
    if h.nrows() != sigma0.dimension() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: sigma0.dimension() });
    }
    let eig = hermitian_eig(h)?;
    let e0 = eig.values[0];
    let propagator = eig.reconstruct_with(|e| (-beta * (e - e0)).exp());
    let t = real_trace(&(&propagator * sigma0.matrix() * &propagator));
    if !(t > 0.0) {
        return Err(Error::Extinction { step: 0, probability: t });
    }
    Ok(t.ln() - 2.0 * beta * e0)
}

/// `2^{−N*ℓ}·Tr[e^{−β*H} σ₀ e^{−β*H}]`.
pub fn p_star(
    h: &ComplexMatrix,
    sigma0: &DensityMatrix,
    beta_star: f64,
    n_star: f64,
    ell: usize,
) -> Result<ClampedProbability> {
    let log = log_ite_trace(h, sigma0, beta_star)? - n_star * ell as f64 * 2f64.ln();
    Ok(ClampedProbability::from_log(log))
}

/// `(ℓ+1)^{−N}·Tr[e^{−βH} σ₀ e^{−βH}]`.
pub fn strategy_b_probability(
    h: &ComplexMatrix,
    sigma0: &DensityMatrix,
    beta: f64,
    steps: usize,
    ell: usize,
) -> Result<ClampedProbability> {
    let log = log_ite_trace(h, sigma0, beta)? - steps as f64 * ((ell + 1) as f64).ln();
    Ok(ClampedProbability::from_log(log))
}

/// `√(1 − √F)`, the convention the fidelity-derived bounds are stated in.
pub fn sm_bures_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    Ok((1.0 - fidelity(a, b)?.sqrt()).max(0.0).sqrt())
}

/// Both sides of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredicateReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl PredicateReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        // relative slack for rounding in the products
        let slack = 1e-12 * (1.0 + rhs.abs());
        Self { lhs, rhs, holds: lhs <= rhs + slack }
    }
}

fn ordered_product(ops: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let d = ops.first().map_or(0, |m| m.nrows());
    let mut acc = ComplexMatrix::identity(d, d);
    for m in ops {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
        }
        acc = m * acc;
    }
    Ok(acc)
}

fn check_pairs(exact: &[ComplexMatrix], approx: &[ComplexMatrix]) -> Result<()> {
    if exact.len() != approx.len() || exact.is_empty() {
        return Err(Error::DimensionMismatch { expected: exact.len(), found: approx.len() });
    }
    Ok(())
}

/// `‖Π U_i − Π U′_i‖ ≤ Σ ‖U_i − U′_i‖` for unitaries.
pub fn unitary_chain_error(exact: &[ComplexMatrix], approx: &[ComplexMatrix]) -> Result<PredicateReport> {
    check_pairs(exact, approx)?;
    let lhs = operator_norm(&(ordered_product(exact)? - ordered_product(approx)?));
    let rhs = exact.iter().zip(approx).map(|(u, v)| operator_norm(&(u - v))).sum();
    Ok(PredicateReport::new(lhs, rhs))
}

/// `‖Π U_i − Π U′_i‖ ≤ K·M^{K−1}·ε` with `M` the largest norm among all
/// factors and `ε` the largest factor error.
pub fn nonunitary_chain_error(exact: &[ComplexMatrix], approx: &[ComplexMatrix]) -> Result<PredicateReport> {
    check_pairs(exact, approx)?;
    let k = exact.len();
    let lhs = operator_norm(&(ordered_product(exact)? - ordered_product(approx)?));
    let m = exact.iter().chain(approx).map(operator_norm).fold(0.0, f64::max);
    let eps = exact.iter().zip(approx).map(|(u, v)| operator_norm(&(u - v))).fold(0.0, f64::max);
    Ok(PredicateReport::new(lhs, k as f64 * m.powi(k as i32 - 1) * eps))
}

/// `‖Π(I − δ_i A_i) − I + Σ δ_i A_i‖ ≤ C(n,2)·max|δ|²·max‖A_i‖²`.
pub fn expansion_error(ops: &[ComplexMatrix], deltas: &[f64]) -> Result<PredicateReport> {
    if ops.len() != deltas.len() || ops.is_empty() {
        return Err(Error::DimensionMismatch { expected: ops.len(), found: deltas.len() });
    }
    let d = ops[0].nrows();
    let id = ComplexMatrix::identity(d, d);
    let factors: Vec<ComplexMatrix> = ops.iter().zip(deltas).map(|(a, &dl)| &id - a.scale(dl)).collect();
    let mut residual = ordered_product(&factors)? - &id;
    for (a, &dl) in ops.iter().zip(deltas) {
        residual += a.scale(dl);
    }
    let n = ops.len() as f64;
    let delta = deltas.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let a = ops.iter().map(operator_norm).fold(0.0, f64::max);
    Ok(PredicateReport::new(operator_norm(&residual), n * (n - 1.0) / 2.0 * delta * delta * a * a))
}

/// Inputs to [`BoundsReport::evaluate`].
#[derive(Debug, Clone)]
pub struct BoundsInputs<'a> {
    /// The operator the protocol evolves under.
    pub hamiltonian: &'a ComplexMatrix,
    pub sigma0: &'a DensityMatrix,
    pub ell: usize,
    pub beta: f64,
    pub steps: usize,
    pub h_max: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub ell: usize,
    pub beta: f64,
    pub steps: usize,
    pub h_max: f64,
    pub d: usize,
    pub gap: f64,
    pub f0: f64,
    pub epsilon: f64,
    pub trotter_error: f64,
    pub sim_distance_bound: f64,
    pub fidelity_lower_bound_main: Option<f64>,
    pub fidelity_lower_bound_sm: Option<f64>,
    pub distance_upper_bound: Option<f64>,
    pub beta_star: Option<f64>,
    pub n_star: Option<f64>,
    pub p_star: Option<ClampedProbability>,
    pub strategy_b_probability: ClampedProbability,
    pub notes: Vec<String>,
}

impl BoundsReport {
    /// Evaluates every bound. Bounds undefined for the inputs are `None`
    /// with an explanatory note.
    pub fn evaluate(inputs: &BoundsInputs) -> Result<Self> {
        let h = inputs.hamiltonian;
        let spectral = ground(h)?;
        let projector = spectral.ground_projector();
        // ground-space weight of σ₀
        let f0 = real_trace(&(&projector * inputs.sigma0.matrix())).clamp(0.0, 1.0);
        let gap = if spectral.degenerate { 0.0 } else { spectral.gap };
        let d = h.nrows();
        let mut notes = vec![
            "fidelity-derived distances use D^2 = 1 - sqrt(F); the harness reports D^2 = 2(1 - sqrt(F)), \
             which is twice the square"
                .to_string(),
        ];
        let keep = |r: Result<f64>, what: &str, notes: &mut Vec<String>| match r {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(format!("{what}: {e}"));
                None
            }
        };
        let main = keep(fidelity_lower_bound(inputs.beta, gap, f0, d, FidelityBound::Main), "fidelity bound", &mut notes);
        let sm = fidelity_lower_bound(inputs.beta, gap, f0, d, FidelityBound::Sm).ok();
        let dist = distance_upper_bound(inputs.beta, gap, f0).ok();
        let bstar = keep(beta_star(gap, f0, inputs.epsilon), "beta*", &mut notes);
        let nstar = keep(n_star(operator_norm(h), gap, f0, inputs.epsilon), "N*", &mut notes);
        let pstar = match (bstar, nstar) {
            (Some(b), Some(n)) => Some(p_star(h, inputs.sigma0, b, n, inputs.ell)?),
            _ => None,
        };
        let pb = strategy_b_probability(h, inputs.sigma0, inputs.beta, inputs.steps, inputs.ell)?;
        if pb.clamped || pstar.is_some_and(|p| p.clamped) {
            notes.push("probability formula exceeded 1 for a decomposition with negative weights; clamped".into());
        }
        if spectral.degenerate {
            notes.push(format!("ground space is {}-fold degenerate; gap taken as 0", spectral.ground_rank()));
        }
        Ok(Self {
            ell: inputs.ell,
            beta: inputs.beta,
            steps: inputs.steps,
            h_max: inputs.h_max,
            d,
            gap,
            f0,
            epsilon: inputs.epsilon,
            trotter_error: trotter_error(inputs.ell, inputs.beta, inputs.h_max, inputs.steps)?,
            sim_distance_bound: sim_distance_bound(inputs.ell, inputs.beta, inputs.h_max, inputs.steps)?,
            fidelity_lower_bound_main: main,
            fidelity_lower_bound_sm: sm,
            distance_upper_bound: dist,
            beta_star: bstar,
            n_star: nstar,
            p_star: pstar,
            strategy_b_probability: pb,
            notes,
        })
    }
}
