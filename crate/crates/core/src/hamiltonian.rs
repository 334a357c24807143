//! Pauli-sum Hamiltonians and their decomposition into weighted resource
//! states, `H = Σ h_i ϱ_i + c·I`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{
    checked_dim, embed_operator_at, frobenius_norm, kron, kron_all, ComplexMatrix, ComplexVector, DensityMatrix,
    RegisterLayout, ONE, ZERO,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let i = Complex64::new(0.0, 1.0);
        let entries = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -i, i, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix::from_row_slice(2, 2, &entries)
    }

    fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Weighted tensor product of single-qubit Paulis. Letter `k` acts on site `k`,
/// which is the `k`-th most significant bit of the computational basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    letters: Vec<Pauli>,
    coefficient: f64,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, coefficient: f64) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::InvalidParams(format!("non-finite coefficient {coefficient}")));
        }
        if letters.is_empty() {
            return Err(Error::InvalidParams("empty Pauli string".into()));
        }
        Ok(Self { letters, coefficient })
    }

    /// Parses a word such as `"XZI"`.
    pub fn parse(word: &str, coefficient: f64) -> Result<Self> {
        let letters = word
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidParams(format!("bad Pauli letter `{c}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters, coefficient)
    }

    /// Single-site operators placed on an `n`-site identity background.
    pub fn from_sites(n: usize, sites: &[(usize, Pauli)], coefficient: f64) -> Result<Self> {
        let mut letters = vec![Pauli::I; n];
        for &(site, p) in sites {
            if site >= n {
                return Err(Error::InvalidParams(format!("site {site} out of range for {n} qubits")));
            }
            letters[site] = p;
        }
        Self::new(letters, coefficient)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Dense matrix of the bare string, without the coefficient.
    pub fn operator(&self) -> Result<ComplexMatrix> {
        let mats: Vec<ComplexMatrix> = self.letters.iter().map(|p| p.matrix()).collect();
        kron_all(mats.iter())
    }

    pub fn word(&self) -> String {
        self.letters.iter().map(|p| p.to_string()).collect()
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, 1.0)
    }
}

/// `Σ_k c_k P_k + offset·I` on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<PauliString>,
    identity_offset: f64,
}

impl PauliSum {
    pub fn new(n: usize) -> Self {
        Self { n, terms: Vec::new(), identity_offset: 0.0 }
    }

    pub fn from_terms(n: usize, terms: Vec<PauliString>) -> Result<Self> {
        let mut sum = Self::new(n);
        for t in terms {
            sum.push(t)?;
        }
        Ok(sum)
    }

    pub fn push(&mut self, term: PauliString) -> Result<()> {
        if term.qubits() != self.n {
            return Err(Error::InvalidParams(format!(
                "term `{}` has {} letters, expected {}",
                term.word(),
                term.qubits(),
                self.n
            )));
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.identity_offset = offset;
        self
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn identity_offset(&self) -> f64 {
        self.identity_offset
    }

    /// Moves pure-identity strings into the identity offset.
    pub fn fold_identities(&self) -> Self {
        let mut out = Self::new(self.n).with_offset(self.identity_offset);
        for t in &self.terms {
            if t.is_identity() {
                out.identity_offset += t.coefficient;
            } else {
                out.terms.push(t.clone());
            }
        }
        out
    }

    pub fn densify(&self) -> Result<ComplexMatrix> {
        let d = 1usize
            .checked_shl(self.n as u32)
            .ok_or(Error::Capacity { requested: usize::MAX, cap: crate::tensor::MAX_DIMENSION })?;
        checked_dim(d, 1)?;
        let mut h = ComplexMatrix::identity(d, d).scale(self.identity_offset);
        for t in &self.terms {
            h += t.operator()?.scale(t.coefficient);
        }
        Ok(h)
    }

    /// `self + ‖self‖₂·I` with the Schatten-2 norm, plus the applied shift.
    pub fn shifted_to_positive(&self) -> Result<(Self, f64)> {
        let shift = frobenius_norm(&self.densify()?);
        let mut out = self.clone();
        out.identity_offset += shift;
        Ok((out, shift))
    }
}

/// `h + ‖h‖₂·I`, whose spectrum is non-negative and whose eigenvectors are
/// those of `h`. Returns the shifted operator and the shift.
pub fn shift_to_positive(h: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
    }
    let shift = frobenius_norm(h);
    let d = h.nrows();
    Ok((h + ComplexMatrix::identity(d, d).scale(shift), shift))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Transverse-field Ising chain `H = −J Σ X_i X_{i+1} − B Σ Z_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub n: usize,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub boundary: Boundary,
}

impl IsingParams {
    pub fn new(n: usize, j: f64, b: f64, boundary: Boundary) -> Result<Self> {
        let p = Self { n, j, b, boundary };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("Ising chain needs n >= 2, got {}", self.n)));
        }
        if self.boundary == Boundary::Periodic && self.n < 3 {
            return Err(Error::InvalidParams("periodic boundary needs n >= 3".into()));
        }
        if !self.j.is_finite() || !self.b.is_finite() {
            return Err(Error::InvalidParams("J and B must be finite".into()));
        }
        Ok(())
    }

    /// Nearest-neighbour bonds; the periodic bond is `(n−1, 0)`.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds: Vec<_> = (0..self.n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic {
            bonds.push((self.n - 1, 0));
        }
        bonds
    }
}

pub fn build_ising(p: &IsingParams) -> Result<PauliSum> {
    p.validate()?;
    let mut h = PauliSum::new(p.n);
    for (a, b) in p.bonds() {
        h.push(PauliString::from_sites(p.n, &[(a, Pauli::X), (b, Pauli::X)], -p.j)?)?;
    }
    for i in 0..p.n {
        h.push(PauliString::from_sites(p.n, &[(i, Pauli::Z)], -p.b)?)?;
    }
    Ok(h)
}

/// One weighted resource state `h·ϱ` acting on `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceTerm {
    pub weight: f64,
    pub rho: DensityMatrix,
    /// Site indices in the order of `rho`'s tensor factors.
    pub support: Vec<usize>,
    pub label: String,
}

impl ResourceTerm {
    pub fn new(weight: f64, rho: DensityMatrix, support: Vec<usize>, label: impl Into<String>) -> Result<Self> {
        if !weight.is_finite() {
            return Err(Error::InvalidParams(format!("non-finite weight {weight}")));
        }
        if !rho.is_normalized() {
            return Err(Error::InvalidState("resource state must have unit trace".into()));
        }
        if rho.dimension() != 1usize << support.len() {
            return Err(Error::SupportMismatch(format!(
                "resource dimension {} does not match {} support sites",
                rho.dimension(),
                support.len()
            )));
        }
        Ok(Self { weight, rho, support, label: label.into() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    IsingLocal,
    PauliGeneric,
}

/// Realizes `H = Σ_i h_i ϱ_i + identity_offset·I` on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceDecomposition {
    pub n: usize,
    pub terms: Vec<ResourceTerm>,
    pub identity_offset: f64,
    pub provenance: Provenance,
}

impl ResourceDecomposition {
    pub fn new(n: usize, terms: Vec<ResourceTerm>, identity_offset: f64, provenance: Provenance) -> Result<Self> {
        for t in &terms {
            for (k, &s) in t.support.iter().enumerate() {
                if s >= n || t.support[..k].contains(&s) {
                    return Err(Error::SupportMismatch(format!("term `{}` has invalid support {:?}", t.label, t.support)));
                }
            }
        }
        Ok(Self { n, terms, identity_offset, provenance })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight.abs()).fold(0.0, f64::max)
    }

    /// `Σ h_i ϱ_i` without the identity offset: the operator the protocol
    /// actually evolves under.
    pub fn simulated_operator(&self) -> Result<ComplexMatrix> {
        let layout = RegisterLayout::qubits("q", self.n)?;
        let d = layout.total_dimension();
        let mut h = ComplexMatrix::zeros(d, d);
        for t in &self.terms {
            h += embed_operator_at(t.rho.matrix(), &layout, &t.support)?.scale(t.weight);
        }
        Ok(h)
    }

    pub fn densify(&self) -> Result<ComplexMatrix> {
        let mut h = self.simulated_operator()?;
        for i in 0..h.nrows() {
            h[(i, i)] += Complex64::new(self.identity_offset, 0.0);
        }
        Ok(h)
    }
}

fn plus_state() -> DensityMatrix {
    let a = Complex64::new(0.5, 0.0);
    DensityMatrix::from_raw(ComplexMatrix::from_element(2, 2, a))
}

fn zero_state() -> DensityMatrix {
    DensityMatrix::from_raw(ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]))
}

/// Site-local decomposition using `ϱ_X = |+⟩⟨+|` and `ϱ_Z = |0⟩⟨0|`:
/// bonds get `−4J ϱ_X⊗ϱ_X`, site `i` gets `2J·deg(i) ϱ_X` and `−2B ϱ_Z`.
/// Terms are ordered bonds, then X terms, then Z terms; zero weights are
/// dropped.
pub fn decompose_ising_local(p: &IsingParams) -> Result<ResourceDecomposition> {
    p.validate()?;
    let bonds = p.bonds();
    let mut terms = Vec::new();
    if p.j != 0.0 {
        let bond_state = DensityMatrix::from_raw(kron(plus_state().matrix(), plus_state().matrix())?);
        for &(a, b) in &bonds {
            terms.push(ResourceTerm::new(-4.0 * p.j, bond_state.clone(), vec![a, b], format!("XX({a},{b})"))?);
        }
        for i in 0..p.n {
            let degree = bonds.iter().filter(|&&(a, b)| a == i || b == i).count();
            terms.push(ResourceTerm::new(2.0 * p.j * degree as f64, plus_state(), vec![i], format!("X({i})"))?);
        }
    }
    if p.b != 0.0 {
        for i in 0..p.n {
            terms.push(ResourceTerm::new(-2.0 * p.b, zero_state(), vec![i], format!("Z({i})"))?);
        }
    }
    // −4J ϱϱ = −J(I + X_a + X_b + X_aX_b), 2J·deg ϱ_X = J·deg(I + X), −2B ϱ_Z = −B(I + Z)
    let offset = p.n as f64 * p.b - p.j * bonds.len() as f64;
    ResourceDecomposition::new(p.n, terms, offset, Provenance::IsingLocal)
}

/// Generic decomposition: `c·P = |c|·2ⁿ·(I + sign(c)P)/2ⁿ − |c|·I` for each
/// non-identity string. All weights are positive and every resource spans the
/// full register.
pub fn decompose_pauli_generic(h: &PauliSum) -> Result<ResourceDecomposition> {
    let n = h.qubits();
    if let Some(t) = h.terms().iter().find(|t| t.is_identity()) {
        return Err(Error::InvalidParams(format!(
            "identity term with coefficient {} must be folded into the offset first",
            t.coefficient()
        )));
    }
    let d = 1usize << n;
    let dim = d as f64;
    let mut terms = Vec::new();
    let mut offset = h.identity_offset();
    for t in h.terms() {
        let c = t.coefficient();
        if c == 0.0 {
            continue;
        }
        let rho = (ComplexMatrix::identity(d, d) + t.operator()?.scale(c.signum())).unscale(dim);
        let sign = if c > 0.0 { '+' } else { '-' };
        terms.push(ResourceTerm::new(
            c.abs() * dim,
            DensityMatrix::from_raw(rho),
            (0..n).collect(),
            format!("(I{sign}{})/{d}", t.word()),
        )?);
        offset -= c.abs();
    }
    ResourceDecomposition::new(n, terms, offset, Provenance::PauliGeneric)
}

/// Dense amplitude vector of the uniform superposition on `n` qubits.
pub fn uniform_amplitudes(n: usize) -> ComplexVector {
    let d = 1usize << n;
    ComplexVector::from_element(d, Complex64::new(1.0 / (d as f64).sqrt(), 0.0))
}
