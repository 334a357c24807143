//! Dense complex linear algebra on labelled tensor-product registers.
//!
//! Matrices are plain [`nalgebra::DMatrix`] values over [`Complex64`]. Composite
//! systems carry a [`RegisterLayout`] whose first subsystem is the most
//! significant digit of the flat index, so `kron(a, b)` lives on the layout
//! `[a, b]`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Largest matrix dimension any operation will build.
pub const MAX_DIMENSION: usize = 4096;

/// Tolerance for Hermiticity, positivity and trace checks.
pub const STATE_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Ordered list of named tensor factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    subsystems: Vec<(String, usize)>,
}

impl RegisterLayout {
    pub fn new<I, S>(subsystems: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let subsystems: Vec<(String, usize)> = subsystems
            .into_iter()
            .map(|(label, dim)| (label.into(), dim))
            .collect();
        for (i, (label, dim)) in subsystems.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::InvalidLayout(format!("subsystem `{label}` has dimension 0")));
            }
            if subsystems[..i].iter().any(|(other, _)| other == label) {
                return Err(Error::InvalidLayout(format!("duplicate label `{label}`")));
            }
        }
        let total = subsystems
            .iter()
            .try_fold(1usize, |acc, (_, d)| acc.checked_mul(*d))
            .unwrap_or(usize::MAX);
        if total > MAX_DIMENSION {
            return Err(Error::Capacity { requested: total, cap: MAX_DIMENSION });
        }
        Ok(Self { subsystems })
    }

    /// `count` qubits labelled `{prefix}0`, `{prefix}1`, ...
    pub fn qubits(prefix: &str, count: usize) -> Result<Self> {
        Self::new((0..count).map(|i| (format!("{prefix}{i}"), 2)))
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn total_dimension(&self) -> usize {
        self.subsystems.iter().map(|(_, d)| d).product()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|(l, _)| l.as_str())
    }

    pub fn dimension_of(&self, position: usize) -> usize {
        self.subsystems[position].1
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.position(l)).collect()
    }

    /// Layout of `self ⊗ other`.
    pub fn concat(&self, other: &RegisterLayout) -> Result<Self> {
        Self::new(self.subsystems.iter().chain(other.subsystems.iter()).cloned())
    }

    fn check_matrix(&self, m: &ComplexMatrix) -> Result<()> {
        let d = self.total_dimension();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
        }
        Ok(())
    }
}

/// Index bookkeeping that factors a layout into an ordered "primary" group of
/// subsystems and the remaining ones (kept in layout order).
struct Split {
    primary_dim: usize,
    rest_dim: usize,
    primary_of: Vec<usize>,
    rest_of: Vec<usize>,
    // flat index for (primary, rest), stored at primary * rest_dim + rest
    flat: Vec<usize>,
}

impl Split {
    fn new(layout: &RegisterLayout, primary: &[usize]) -> Result<Self> {
        let n = layout.len();
        for (i, &p) in primary.iter().enumerate() {
            if p >= n {
                return Err(Error::InvalidLayout(format!("subsystem position {p} out of range")));
            }
            if primary[..i].contains(&p) {
                return Err(Error::InvalidLayout(format!("subsystem position {p} repeated")));
            }
        }
        let dims: Vec<usize> = layout.subsystems.iter().map(|(_, d)| *d).collect();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let rest: Vec<usize> = (0..n).filter(|k| !primary.contains(k)).collect();
        let primary_dim: usize = primary.iter().map(|&k| dims[k]).product();
        let rest_dim: usize = rest.iter().map(|&k| dims[k]).product();
        let total = primary_dim * rest_dim;

        let mut primary_of = vec![0; total];
        let mut rest_of = vec![0; total];
        let mut flat = vec![0; total];
        for f in 0..total {
            let digit = |k: usize| (f / strides[k]) % dims[k];
            let p = primary.iter().fold(0, |acc, &k| acc * dims[k] + digit(k));
            let r = rest.iter().fold(0, |acc, &k| acc * dims[k] + digit(k));
            primary_of[f] = p;
            rest_of[f] = r;
            flat[p * rest_dim + r] = f;
        }
        Ok(Self { primary_dim, rest_dim, primary_of, rest_of, flat })
    }

    fn index(&self, primary: usize, rest: usize) -> usize {
        self.flat[primary * self.rest_dim + rest]
    }
}

pub(crate) fn checked_dim(rows: usize, cols: usize) -> Result<usize> {
    match rows.checked_mul(cols) {
        Some(d) if d <= MAX_DIMENSION => Ok(d),
        _ => Err(Error::Capacity { requested: rows.saturating_mul(cols), cap: MAX_DIMENSION }),
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    checked_dim(a.nrows(), b.nrows())?;
    checked_dim(a.ncols(), b.ncols())?;
    Ok(a.kronecker(b))
}

/// Kronecker product of a non-empty list, left to right.
pub fn kron_all<'a, I>(factors: I) -> Result<ComplexMatrix>
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .try_fold(ComplexMatrix::identity(1, 1), |acc, f| kron(&acc, f))
}

/// Reduced matrix on the `keep` subsystems (taken in layout order).
pub fn partial_trace(m: &ComplexMatrix, layout: &RegisterLayout, keep: &[&str]) -> Result<ComplexMatrix> {
    let mut positions = layout.positions(keep)?;
    positions.sort_unstable();
    positions.dedup();
    partial_trace_at(m, layout, &positions)
}

/// [`partial_trace`] addressed by subsystem position.
pub fn partial_trace_at(m: &ComplexMatrix, layout: &RegisterLayout, keep: &[usize]) -> Result<ComplexMatrix> {
    layout.check_matrix(m)?;
    let split = Split::new(layout, keep)?;
    let mut out = ComplexMatrix::zeros(split.primary_dim, split.primary_dim);
    for p1 in 0..split.primary_dim {
        for p2 in 0..split.primary_dim {
            let mut acc = ZERO;
            for q in 0..split.rest_dim {
                acc += m[(split.index(p1, q), split.index(p2, q))];
            }
            out[(p1, p2)] = acc;
        }
    }
    Ok(out)
}

/// Full-register operator acting as `op` on `targets` (in the given order) and
/// as the identity elsewhere.
pub fn embed_operator(op: &ComplexMatrix, layout: &RegisterLayout, targets: &[&str]) -> Result<ComplexMatrix> {
    embed_operator_at(op, layout, &layout.positions(targets)?)
}

pub fn embed_operator_at(op: &ComplexMatrix, layout: &RegisterLayout, targets: &[usize]) -> Result<ComplexMatrix> {
    let split = Split::new(layout, targets)?;
    if op.nrows() != split.primary_dim || op.ncols() != split.primary_dim {
        return Err(Error::DimensionMismatch { expected: split.primary_dim, found: op.nrows() });
    }
    let d = layout.total_dimension();
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if split.rest_of[i] == split.rest_of[j] {
                out[(i, j)] = op[(split.primary_of[i], split.primary_of[j])];
            }
        }
    }
    Ok(out)
}

/// `(op ⊗ I) m` with `op` acting on `targets`, without materializing the
/// embedded operator.
pub fn left_multiply_local(
    m: &ComplexMatrix,
    layout: &RegisterLayout,
    targets: &[usize],
    op: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    layout.check_matrix(m)?;
    let split = Split::new(layout, targets)?;
    if op.nrows() != split.primary_dim || op.ncols() != split.primary_dim {
        return Err(Error::DimensionMismatch { expected: split.primary_dim, found: op.nrows() });
    }
    let d = m.nrows();
    let mut out = ComplexMatrix::zeros(d, d);
    for col in 0..d {
        for row in 0..d {
            let (p, q) = (split.primary_of[row], split.rest_of[row]);
            let mut acc = ZERO;
            for pp in 0..split.primary_dim {
                let w = op[(p, pp)];
                if w != ZERO {
                    acc += w * m[(split.index(pp, q), col)];
                }
            }
            out[(row, col)] = acc;
        }
    }
    Ok(out)
}

/// `m (op ⊗ I)` with `op` acting on `targets`.
pub fn right_multiply_local(
    m: &ComplexMatrix,
    layout: &RegisterLayout,
    targets: &[usize],
    op: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    // m A = (A† m†)†
    let left = left_multiply_local(&m.adjoint(), layout, targets, &op.adjoint())?;
    Ok(left.adjoint())
}

/// `state ⊗ Tr_targets[m]`, with `state` reinserted on `targets` in their
/// original positions.
pub fn replace_subsystems(
    m: &ComplexMatrix,
    layout: &RegisterLayout,
    targets: &[usize],
    state: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    layout.check_matrix(m)?;
    let split = Split::new(layout, targets)?;
    if state.nrows() != split.primary_dim || state.ncols() != split.primary_dim {
        return Err(Error::DimensionMismatch { expected: split.primary_dim, found: state.nrows() });
    }
    let mut reduced = ComplexMatrix::zeros(split.rest_dim, split.rest_dim);
    for q1 in 0..split.rest_dim {
        for q2 in 0..split.rest_dim {
            let mut acc = ZERO;
            for p in 0..split.primary_dim {
                acc += m[(split.index(p, q1), split.index(p, q2))];
            }
            reduced[(q1, q2)] = acc;
        }
    }
    let d = m.nrows();
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = state[(split.primary_of[i], split.primary_of[j])]
                * reduced[(split.rest_of[i], split.rest_of[j])];
        }
    }
    Ok(out)
}

/// Largest entrywise deviation `|m - m†|`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m†) / 2`.
pub fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
    }
    if !is_finite(h) {
        return Err(Error::NonFinite);
    }
    let scale = h.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let deviation = hermitian_deviation(h);
    if deviation > STATE_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(f(λ)) V†`.
    pub fn reconstruct_with<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &v) in self.values.iter().enumerate() {
            let fk = f(v);
            for r in 0..d {
                scaled[(r, k)] *= fk;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Eigendecomposition of a Hermitian matrix, symmetrizing away drift below
/// [`STATE_TOL`] and rejecting anything beyond it.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    let eig = SymmetricEigen::new(symmetrize(h));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// `f(h)` for Hermitian `h`. Fails if `f` is non-finite at any eigenvalue.
pub fn hermitian_func<F: Fn(f64) -> f64>(h: &ComplexMatrix, f: F) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    for &v in &eig.values {
        if !f(v).is_finite() {
            return Err(Error::Domain { eigenvalue: v });
        }
    }
    Ok(eig.reconstruct_with(f))
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// `[-STATE_TOL, 0)` are treated as zero.
pub fn hermitian_sqrt(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    if let Some(&v) = eig.values.iter().find(|&&v| v < -STATE_TOL) {
        return Err(Error::Domain { eigenvalue: v });
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()))
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Schatten-2 norm `√Σ|m_ij|²`.
pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Real part of the trace.
pub fn real_trace(m: &ComplexMatrix) -> f64 {
    m.trace().re
}

/// Trace distance `½‖a − b‖₁` between Hermitian matrices.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    let eig = hermitian_eig(&symmetrize(&(a - b)))?;
    Ok(0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>())
}

/// Rank-one projector `|v⟩⟨v|`.
pub fn outer(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// Vector state, possibly unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
    norm: f64,
}

impl PureState {
    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        Ok(Self { amplitudes: amplitudes.unscale(norm), norm: 1.0 })
    }

    /// Keeps `amplitudes` as given and records their norm.
    pub fn unnormalized(amplitudes: ComplexVector) -> Self {
        let norm = amplitudes.norm();
        Self { amplitudes, norm }
    }

    pub fn basis(dimension: usize, index: usize) -> Self {
        let mut amplitudes = ComplexVector::zeros(dimension);
        amplitudes[index] = ONE;
        Self { amplitudes, norm: 1.0 }
    }

    /// Equal superposition of every basis state.
    pub fn uniform(dimension: usize) -> Self {
        let a = Complex64::new(1.0 / (dimension as f64).sqrt(), 0.0);
        Self { amplitudes: ComplexVector::from_element(dimension, a), norm: 1.0 }
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm - 1.0).abs() <= 1e-12
    }

    pub fn projector(&self) -> ComplexMatrix {
        outer(&self.amplitudes)
    }
}

/// Positive semidefinite Hermitian matrix with a recorded trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    trace: f64,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and finiteness; the trace is recorded
    /// as-is.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let eig = hermitian_eig(&matrix)?;
        if let Some(&v) = eig.values.first() {
            if v < -STATE_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {v:.3e}")));
            }
        }
        let matrix = symmetrize(&matrix);
        let trace = real_trace(&matrix);
        if trace <= 0.0 {
            return Err(Error::InvalidState(format!("non-positive trace {trace:.3e}")));
        }
        Ok(Self { matrix, trace })
    }

    /// Like [`DensityMatrix::new`] but also requires unit trace.
    pub fn normalized_state(matrix: ComplexMatrix) -> Result<Self> {
        let state = Self::new(matrix)?;
        if (state.trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {} differs from 1", state.trace)));
        }
        Ok(state)
    }

    /// Skips validation. Callers guarantee the invariants hold by construction.
    pub(crate) fn from_raw(matrix: ComplexMatrix) -> Self {
        let trace = real_trace(&matrix);
        Self { matrix, trace }
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self::from_raw(state.projector())
    }

    pub fn maximally_mixed(dimension: usize) -> Self {
        Self::from_raw(ComplexMatrix::identity(dimension, dimension).unscale(dimension as f64))
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace - 1.0).abs() <= STATE_TOL
    }

    /// Unit-trace copy.
    pub fn normalize(&self) -> Result<Self> {
        if !(self.trace > 0.0) || !self.trace.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize trace {}", self.trace)));
        }
        Ok(Self { matrix: self.matrix.unscale(self.trace), trace: 1.0 })
    }
}
