//! Exact references: imaginary-time evolution by diagonalization, ground
//! states, fidelities and distances.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{
    hermitian_eig, real_trace, ComplexMatrix, DensityMatrix, PureState,
};

/// Eigenvalue splittings below this count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SpectralData {
    pub e0: f64,
    /// Largest-magnitude component is real and positive.
    pub ground: PureState,
    /// `E₁ − E₀`, zero for one-dimensional spaces.
    pub gap: f64,
    pub spectrum: Vec<f64>,
    pub degenerate: bool,
    ground_space: ComplexMatrix,
}

impl SpectralData {
    /// Projector onto every eigenvector within `DEGENERACY_TOL` of `E₀`.
    pub fn ground_projector(&self) -> ComplexMatrix {
        &self.ground_space * self.ground_space.adjoint()
    }

    pub fn ground_rank(&self) -> usize {
        self.ground_space.ncols()
    }
}

fn check_dims(h: &ComplexMatrix, d: usize) -> Result<()> {
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: d });
    }
    Ok(())
}

fn check_normalized(s: &DensityMatrix) -> Result<()> {
    if !s.is_normalized() {
        return Err(Error::InvalidState(format!("expected unit trace, found {}", s.trace())));
    }
    Ok(())
}

/// `e^{−βH} σ₀ e^{−βH}` normalized. The spectrum is shifted by `E₀` first so
/// large `β` does not overflow.
pub fn exact_ite(h: &ComplexMatrix, sigma0: &DensityMatrix, beta: f64) -> Result<DensityMatrix> {
    check_dims(h, sigma0.dimension())?;
    check_normalized(sigma0)?;
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidParams(format!("imaginary time must be finite and non-negative, got {beta}")));
    }
    if beta == 0.0 {
        return Ok(sigma0.clone());
    }
    let eig = hermitian_eig(h)?;
    let e0 = eig.values[0];
    let propagator = eig.reconstruct_with(|e| (-beta * (e - e0)).exp());
    let evolved = &propagator * sigma0.matrix() * &propagator;
    let norm = real_trace(&evolved);
    if !(norm > f64::MIN_POSITIVE) || !norm.is_finite() {
        return Err(Error::Extinction { step: 0, probability: norm });
    }
    DensityMatrix::new(evolved.unscale(norm))
}

pub fn ground(h: &ComplexMatrix) -> Result<SpectralData> {
    let eig = hermitian_eig(h)?;
    let e0 = eig.values[0];
    let gap = eig.values.get(1).map_or(0.0, |e1| (e1 - e0).max(0.0));
    let mut v = eig.vectors.column(0).into_owned();
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 + 1e-12 { (i, z.norm()) } else { best });
    let phase = v[imax] / v[imax].norm();
    v *= phase.conj();
    v[imax] = Complex64::new(v[imax].norm(), 0.0);
    let rank = eig.values.iter().take_while(|&&e| e - e0 < DEGENERACY_TOL).count();
    let ground_space = eig.vectors.columns(0, rank).into_owned();
    Ok(SpectralData {
        e0,
        ground: PureState::normalized(v)?,
        gap,
        spectrum: eig.values.clone(),
        degenerate: gap < DEGENERACY_TOL,
        ground_space,
    })
}

/// `√ρ` with eigenvalues at rounding level treated as exact zeros.
fn state_sqrt(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(rho.matrix())?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = 16.0 * f64::EPSILON * rho.dimension() as f64 * top;
    Ok(eig.reconstruct_with(|l| if l > cutoff { l.sqrt() } else { 0.0 }))
}

/// Uhlmann fidelity `(Tr√(√a b √a))²`, clamped to `[0, 1]`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a.matrix(), b.dimension())?;
    check_normalized(a)?;
    check_normalized(b)?;
    // Tr√(√a b √a) is the nuclear norm of √a √b; singular values avoid the
    // square roots of rounding-level eigenvalues
    let product = state_sqrt(a)? * state_sqrt(b)?;
    let root_trace: f64 = product.singular_values().iter().sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// `⟨ψ|a|ψ⟩`.
pub fn fidelity_pure(a: &DensityMatrix, psi: &PureState) -> Result<f64> {
    check_dims(a.matrix(), psi.dimension())?;
    check_normalized(a)?;
    if !psi.is_normalized() {
        return Err(Error::InvalidState("pure state is not normalized".into()));
    }
    let amps = psi.amplitudes();
    Ok((amps.adjoint() * a.matrix() * amps)[(0, 0)].re.clamp(0.0, 1.0))
}

/// `Tr[P a]` for an orthogonal projector `P`; the fidelity to the ground
/// space when `P` is a degenerate ground projector.
pub fn projector_fidelity(a: &DensityMatrix, projector: &ComplexMatrix) -> Result<f64> {
    check_dims(projector, a.dimension())?;
    check_normalized(a)?;
    Ok(real_trace(&(projector * a.matrix())).clamp(0.0, 1.0))
}

/// `D = √(2(1 − √F))`.
pub fn bures_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let f = fidelity(a, b)?;
    Ok((2.0 * (1.0 - f.sqrt())).max(0.0).sqrt())
}

/// `Tr[Hσ]`.
pub fn energy(h: &ComplexMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(h, sigma.dimension())?;
    let t = (h * sigma.matrix()).trace();
    Ok(t.re / sigma.trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_ising, Boundary, IsingParams, Pauli};
    use crate::tensor::testing::{max_abs_diff, random_density, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z() -> ComplexMatrix {
        Pauli::Z.matrix()
    }

    fn plus() -> DensityMatrix {
        DensityMatrix::from_pure(&PureState::uniform(2))
    }

    fn basis(i: usize) -> DensityMatrix {
        DensityMatrix::from_pure(&PureState::basis(2, i))
    }

    #[test]
    fn zero_time_is_identity() {
        let out = exact_ite(&z(), &plus(), 0.0).unwrap();
        assert_eq!(out.matrix(), plus().matrix());
    }

    #[test]
    fn single_qubit_closed_form() {
        for beta in [0.1, 0.5, 1.0, 2.0] {
            let out = exact_ite(&z(), &plus(), beta).unwrap();
            let f = fidelity_pure(&out, &PureState::basis(2, 1)).unwrap();
            let expected = 1.0 / (1.0 + (-4.0 * beta).exp());
            assert!((f - expected).abs() < 1e-12, "beta {beta}");
            assert!((fidelity(&out, &basis(1)).unwrap() - expected).abs() < 1e-9);
        }
        let late = exact_ite(&z(), &plus(), 20.0).unwrap();
        assert!(max_abs_diff(late.matrix(), basis(1).matrix()) < 1e-10);
    }

    #[test]
    fn huge_times_do_not_overflow() {
        let out = exact_ite(&z(), &plus(), 1e4).unwrap();
        assert!(max_abs_diff(out.matrix(), basis(1).matrix()) < 1e-12);
        assert!(matches!(exact_ite(&z(), &basis(0), 1e4), Err(Error::Extinction { .. })));
    }

    #[test]
    fn semigroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let h = random_hermitian(&mut rng, 4);
        let s = DensityMatrix::new(random_density(&mut rng, 4)).unwrap();
        let direct = exact_ite(&h, &s, 0.7).unwrap();
        let split = exact_ite(&h, &exact_ite(&h, &s, 0.3).unwrap(), 0.4).unwrap();
        assert!(max_abs_diff(direct.matrix(), split.matrix()) < 1e-9);
    }

    #[test]
    fn ground_of_z() {
        let g = ground(&z()).unwrap();
        assert_eq!(g.e0, -1.0);
        assert!((g.gap - 2.0).abs() < 1e-14);
        assert!(!g.degenerate);
        let a = g.ground.amplitudes();
        assert!((a[1].re - 1.0).abs() < 1e-14 && a[1].im == 0.0 && a[0].norm() < 1e-14);
        assert_eq!(g.spectrum, vec![-1.0, 1.0]);
    }

    #[test]
    fn degenerate_ising_is_flagged() {
        let h = build_ising(&IsingParams::new(2, 1.0, 0.0, Boundary::Open).unwrap()).unwrap().densify().unwrap();
        let g = ground(&h).unwrap();
        assert!((g.e0 + 1.0).abs() < 1e-12);
        assert!(g.degenerate);
        assert_eq!(g.ground_rank(), 2);
        let p = g.ground_projector();
        assert!(max_abs_diff(&(&p * &p), &p) < 1e-12);
    }

    #[test]
    fn gapped_ising() {
        let h = build_ising(&IsingParams::new(4, 1.0, 5.0, Boundary::Periodic).unwrap()).unwrap().densify().unwrap();
        let g = ground(&h).unwrap();
        assert!(g.gap > 1.0);
        assert_eq!(g.ground_rank(), 1);
        assert!(g.ground.is_normalized());
        let e = energy(&h, &DensityMatrix::from_pure(&g.ground)).unwrap();
        assert!((e - g.e0).abs() < 1e-10);
    }

    #[test]
    fn phase_convention_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let h = random_hermitian(&mut rng, 8);
        let g1 = ground(&h).unwrap();
        let g2 = ground(&h.scale(1.0)).unwrap();
        assert_eq!(g1.ground.amplitudes(), g2.ground.amplitudes());
        let amps = g1.ground.amplitudes();
        let big = amps.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(amps.iter().any(|z| z.im == 0.0 && z.re > 0.0 && (z.re - big).abs() < 1e-12));
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let r = DensityMatrix::new(random_density(&mut rng, 4)).unwrap();
        assert!((fidelity(&r, &r).unwrap() - 1.0).abs() < 1e-9);
        assert!(fidelity(&basis(0), &basis(1)).unwrap() < 1e-12);
        assert!((fidelity(&basis(0), &plus()).unwrap() - 0.5).abs() < 1e-9);
        assert!(bures_distance(&r, &r).unwrap() < 1e-4);
        assert!((bures_distance(&basis(0), &basis(1)).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_reduces_to_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..20 {
            let a = DensityMatrix::new(random_density(&mut rng, 4)).unwrap();
            let b = DensityMatrix::new(random_density(&mut rng, 4)).unwrap();
            assert!((fidelity(&a, &b).unwrap() - fidelity(&b, &a).unwrap()).abs() < 1e-9);
            let v = crate::tensor::testing::random_matrix(&mut rng, 4).column(0).into_owned();
            let psi = PureState::normalized(v).unwrap();
            let pure = DensityMatrix::from_pure(&psi);
            assert!((fidelity(&a, &pure).unwrap() - fidelity_pure(&a, &psi).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn bures_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..200 {
            let s: Vec<DensityMatrix> =
                (0..3).map(|_| DensityMatrix::new(random_density(&mut rng, 2)).unwrap()).collect();
            let ac = bures_distance(&s[0], &s[2]).unwrap();
            let ab = bures_distance(&s[0], &s[1]).unwrap();
            let bc = bures_distance(&s[1], &s[2]).unwrap();
            assert!(ac <= ab + bc + 1e-9);
        }
    }

    #[test]
    fn energy_examples() {
        assert!((energy(&z(), &basis(0)).unwrap() - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let h = random_hermitian(&mut rng, 6);
        let s = DensityMatrix::new(random_density(&mut rng, 6)).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..20 {
            let e = energy(&h, &exact_ite(&h, &s, 0.1 * k as f64).unwrap()).unwrap();
            assert!(e <= last + 1e-10);
            last = e;
        }
    }

    #[test]
    fn ground_fidelity_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let h = random_hermitian(&mut rng, 4);
        let g = ground(&h).unwrap();
        let s = DensityMatrix::new(random_density(&mut rng, 4)).unwrap();
        let mut last = 0.0;
        for k in 0..30 {
            let f = fidelity_pure(&exact_ite(&h, &s, 0.2 * k as f64).unwrap(), &g.ground).unwrap();
            assert!(f >= last - 1e-10);
            last = f;
        }
    }
}
