//! The controlled-SWAP interaction with a fresh resource state, with the
//! resource register traced out.
//!
//! For `ϱ = Σ_j λ_j |j⟩⟨j|` on support `S` the reduced map on
//! (control ⊗ simulator) has Kraus operators
//!
//! ```text
//! K_{k,j} = √λ_j ( δ_{kj} |0⟩⟨0| ⊗ I  +  |1⟩⟨1| ⊗ |j⟩⟨k|_S )
//! ```
//!
//! which in block form leaves the `00` block alone, multiplies the `01`/`10`
//! blocks by `ϱ` on `S`, and replaces `S` by `ϱ` in the `11` block.

use crate::error::{Error, Result};
use crate::tensor::{
    embed_operator_at, hermitian_eig, kron, left_multiply_local, replace_subsystems, right_multiply_local,
    ComplexMatrix, DensityMatrix, HermitianEigen, RegisterLayout, ONE, ZERO,
};

/// Eigenvalues at or below this are dropped from the Kraus set.
const RANK_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct CswapChannel {
    resource: ComplexMatrix,
    support: Vec<usize>,
    sim_qubits: usize,
    eigen: HermitianEigen,
}

impl CswapChannel {
    /// `support` lists the simulator sites swapped with the resource's
    /// tensor factors, in order.
    pub fn new(resource: &DensityMatrix, support: &[usize], sim_qubits: usize) -> Result<Self> {
        if resource.dimension() != 1usize << support.len() {
            return Err(Error::SupportMismatch(format!(
                "resource of dimension {} cannot swap with {} sites",
                resource.dimension(),
                support.len()
            )));
        }
        for (k, &s) in support.iter().enumerate() {
            if s >= sim_qubits || support[..k].contains(&s) {
                return Err(Error::SupportMismatch(format!("invalid support {support:?} for {sim_qubits} sites")));
            }
        }
        Ok(Self {
            resource: resource.matrix().clone(),
            support: support.to_vec(),
            sim_qubits,
            eigen: hermitian_eig(resource.matrix())?,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn resource(&self) -> &ComplexMatrix {
        &self.resource
    }

    /// Kraus operators on (control ⊗ simulator), control most significant.
    pub fn kraus(&self) -> Result<Vec<ComplexMatrix>> {
        let sim = RegisterLayout::qubits("q", self.sim_qubits)?;
        let d = sim.total_dimension();
        let ds = self.resource.nrows();
        let p0 = ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let p1 = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
        let vecs = &self.eigen.vectors;

        let mut ops = Vec::new();
        for (j, &lambda) in self.eigen.values.iter().enumerate() {
            if lambda <= RANK_TOL {
                continue;
            }
            let amp = lambda.sqrt();
            for k in 0..ds {
                // |j⟩⟨k| in the eigenbasis of ϱ
                let jk = vecs.column(j) * vecs.column(k).adjoint();
                let swap_branch = kron(&p1, &embed_operator_at(&jk, &sim, &self.support)?)?;
                let mut op = swap_branch;
                if j == k {
                    op += kron(&p0, &ComplexMatrix::identity(d, d))?;
                }
                ops.push(op.scale(amp));
            }
        }
        Ok(ops)
    }

    /// Applies the channel to a joint state. `control` is the position of the
    /// conditioning qubit in `layout`; simulator site `s` sits at position
    /// `sim_offset + s`.
    pub fn apply(
        &self,
        joint: &ComplexMatrix,
        layout: &RegisterLayout,
        control: usize,
        sim_offset: usize,
    ) -> Result<ComplexMatrix> {
        if control >= layout.len() || layout.dimension_of(control) != 2 {
            return Err(Error::InvalidLayout(format!("position {control} is not a control qubit")));
        }
        if sim_offset + self.sim_qubits > layout.len() {
            return Err(Error::InvalidLayout("simulator sites exceed the layout".into()));
        }
        let targets: Vec<usize> = self.support.iter().map(|s| s + sim_offset).collect();
        let stride: usize = (control + 1..layout.len()).map(|p| layout.dimension_of(p)).product();
        let bit = |index: usize| (index / stride) & 1;

        let rho_r = right_multiply_local(joint, layout, &targets, &self.resource)?;
        let r_rho = left_multiply_local(joint, layout, &targets, &self.resource)?;
        let d = joint.nrows();
        let swapped_block = ComplexMatrix::from_fn(d, d, |i, j| {
            if bit(i) == 1 && bit(j) == 1 { joint[(i, j)] } else { ZERO }
        });
        let replaced = replace_subsystems(&swapped_block, layout, &targets, &self.resource)?;

        Ok(ComplexMatrix::from_fn(d, d, |i, j| match (bit(i), bit(j)) {
            (0, 0) => joint[(i, j)],
            (0, _) => rho_r[(i, j)],
            (_, 0) => r_rho[(i, j)],
            _ => replaced[(i, j)],
        }))
    }
}

/// `Σ_k K ρ K†`.
pub fn apply_kraus(kraus: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
    let d = rho.nrows();
    kraus
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k * rho * k.adjoint())
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Explicit three-register construction `Tr_R[U_cs (ψ ⊗ ϱ ⊗ σ) U_cs†]`.

    use super::*;
    use crate::tensor::{kron_all, partial_trace_at};

    /// Permutation unitary on control ⊗ resource(k qubits) ⊗ simulator(n
    /// qubits) swapping resource qubit m with simulator site support[m] when
    /// the control is 1.
    pub fn controlled_swap(k: usize, n: usize, support: &[usize]) -> ComplexMatrix {
        let total = 1 + k + n;
        let d = 1usize << total;
        let bit_pos = |q: usize| total - 1 - q;
        let mut u = ComplexMatrix::zeros(d, d);
        for col in 0..d {
            let mut row = col;
            if (col >> bit_pos(0)) & 1 == 1 {
                for (m, &s) in support.iter().enumerate() {
                    let (a, b) = (bit_pos(1 + m), bit_pos(1 + k + s));
                    let (va, vb) = ((row >> a) & 1, (row >> b) & 1);
                    if va != vb {
                        row ^= (1 << a) | (1 << b);
                    }
                }
            }
            u[(row, col)] = ONE;
        }
        u
    }

    pub fn explicit_output(
        control: &ComplexMatrix,
        resource: &ComplexMatrix,
        sim: &ComplexMatrix,
        support: &[usize],
        n: usize,
    ) -> ComplexMatrix {
        let k = support.len();
        let u = controlled_swap(k, n, support);
        let full = kron_all([control, resource, sim]).unwrap();
        let evolved = &u * full * u.adjoint();
        let layout = RegisterLayout::qubits("x", 1 + k + n).unwrap();
        let keep: Vec<usize> = std::iter::once(0).chain(1 + k..1 + k + n).collect();
        partial_trace_at(&evolved, &layout, &keep).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::explicit_output;
    use super::*;
    use crate::engine::control_state;
    use crate::tensor::testing::{max_abs_diff, random_density};
    use crate::tensor::{outer, ComplexVector};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn joint_layout(n: usize) -> RegisterLayout {
        RegisterLayout::new(std::iter::once(("c".to_string(), 2)).chain((0..n).map(|i| (format!("q{i}"), 2))))
            .unwrap()
    }

    fn completeness_error(kraus: &[ComplexMatrix]) -> f64 {
        let d = kraus[0].nrows();
        let sum = kraus.iter().fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&sum, &ComplexMatrix::identity(d, d))
    }

    #[test]
    fn pure_resource_has_two_kraus_operators() {
        let zero = DensityMatrix::from_raw(ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]));
        let ch = CswapChannel::new(&zero, &[0], 1).unwrap();
        let kraus = ch.kraus().unwrap();
        assert_eq!(kraus.len(), 2);
        assert!(completeness_error(&kraus) < 1e-12);
    }

    #[test]
    fn maximally_mixed_resource_leaves_idle_control_untouched() {
        let mixed = DensityMatrix::maximally_mixed(2);
        let ch = CswapChannel::new(&mixed, &[0], 1).unwrap();
        let kraus = ch.kraus().unwrap();
        assert_eq!(kraus.len(), 4);
        assert!(completeness_error(&kraus) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sigma = random_density(&mut rng, 2);
        let control_off = control_state(0.0).unwrap().projector();
        let joint = kron(&control_off, &sigma).unwrap();
        let out = apply_kraus(&kraus, &joint);
        assert!(max_abs_diff(&out, &joint) < 1e-14);
    }

    #[test]
    fn kraus_block_form_and_explicit_unitary_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..30 {
            let n = 1 + trial % 2;
            let k = if n == 2 && trial % 3 == 0 { 2 } else { 1 };
            let support: Vec<usize> = if k == 2 { vec![1, 0] } else { vec![rng.gen_range(0..n)] };
            let resource = random_density(&mut rng, 1 << k);
            let sigma = random_density(&mut rng, 1 << n);
            let delta = rng.gen_range(-0.2..0.2);
            let control = control_state(delta).unwrap().projector();

            let ch = CswapChannel::new(&DensityMatrix::from_raw(resource.clone()), &support, n).unwrap();
            let kraus = ch.kraus().unwrap();
            assert!(completeness_error(&kraus) < 1e-12);

            let joint = kron(&control, &sigma).unwrap();
            let via_kraus = apply_kraus(&kraus, &joint);
            let via_blocks = ch.apply(&joint, &joint_layout(n), 0, 1).unwrap();
            let explicit = explicit_output(&control, &resource, &sigma, &support, n);
            assert!(max_abs_diff(&via_kraus, &explicit) < 1e-13, "kraus vs explicit, trial {trial}");
            assert!(max_abs_diff(&via_blocks, &explicit) < 1e-13, "blocks vs explicit, trial {trial}");
        }
    }

    #[test]
    fn bond_resource_matches_two_consecutive_swaps() {
        // ϱ_X ⊗ ϱ_X swapped into sites (0, 1) equals two single-site swaps on
        // the same control
        let plus = outer(&ComplexVector::from_element(2, Complex64::new(0.5f64.sqrt(), 0.0)));
        let bond = kron(&plus, &plus).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sigma = random_density(&mut rng, 4);
        let control = control_state(0.15).unwrap().projector();
        let joint = kron(&control, &sigma).unwrap();
        let layout = joint_layout(2);

        let together = CswapChannel::new(&DensityMatrix::from_raw(bond.clone()), &[0, 1], 2)
            .unwrap()
            .apply(&joint, &layout, 0, 1)
            .unwrap();
        let first = CswapChannel::new(&DensityMatrix::from_raw(plus.clone()), &[0], 2).unwrap();
        let second = CswapChannel::new(&DensityMatrix::from_raw(plus.clone()), &[1], 2).unwrap();
        let sequential = second
            .apply(&first.apply(&joint, &layout, 0, 1).unwrap(), &layout, 0, 1)
            .unwrap();
        assert!(max_abs_diff(&together, &sequential) < 1e-14);
        let explicit = explicit_output(&control, &bond, &sigma, &[0, 1], 2);
        assert!(max_abs_diff(&together, &explicit) < 1e-13);
    }

    #[test]
    fn pure_resource_single_step_closed_form() {
        // ⟨+|out|+⟩ = (σ − δ{ϱ,σ} + δ² ϱ⊗Tr_S σ) / (2(1+δ²)) for ϱ pure on one qubit
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let r = ComplexVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        let rho = outer(&r);
        let sigma = random_density(&mut rng, 2);
        let delta = 0.13;
        let control = control_state(delta).unwrap().projector();
        let out = explicit_output(&control, &rho, &sigma, &[0], 1);
        let plus = ComplexVector::from_element(2, Complex64::new(0.5f64.sqrt(), 0.0));
        let reduced = ComplexMatrix::from_fn(2, 2, |a, b| {
            let mut acc = ZERO;
            for c1 in 0..2 {
                for c2 in 0..2 {
                    acc += plus[c1].conj() * plus[c2] * out[(c1 * 2 + a, c2 * 2 + b)];
                }
            }
            acc
        });
        let expected = (&sigma - (&rho * &sigma + &sigma * &rho).scale(delta) + rho.scale(delta * delta))
            .unscale(2.0 * (1.0 + delta * delta));
        assert!(max_abs_diff(&reduced, &expected) < 1e-12);
    }

    #[test]
    fn support_validation() {
        let plus = DensityMatrix::maximally_mixed(2);
        assert!(matches!(CswapChannel::new(&plus, &[2], 2), Err(Error::SupportMismatch(_))));
        assert!(matches!(CswapChannel::new(&plus, &[0, 1], 2), Err(Error::SupportMismatch(_))));
        let bond = DensityMatrix::maximally_mixed(4);
        assert!(matches!(CswapChannel::new(&bond, &[1, 1], 2), Err(Error::SupportMismatch(_))));
    }
}
