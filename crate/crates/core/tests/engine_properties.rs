mod common;

use common::{density, max_abs, rng};
use proptest::prelude::*;
use sbqs::engine::{apply_kraus, make_plan, run, CswapChannel, Mode, ProbabilitySource, Strategy};
use sbqs::hamiltonian::{decompose_ising_local, Boundary, IsingParams};
use sbqs::tensor::{kron, ComplexMatrix, DensityMatrix, PureState};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kraus_sets_are_complete(seed in any::<u64>(), k in 1usize..=2, extra in 0usize..=1) {
        let n = k + extra;
        let mut r = rng(seed);
        let rho = density(&mut r, 1 << k);
        let support: Vec<usize> = (0..k).rev().collect();
        let channel = CswapChannel::new(&rho, &support, n).unwrap();
        let kraus = channel.kraus().unwrap();
        let d = 2usize << n;
        let sum = kraus.iter().fold(ComplexMatrix::zeros(d, d), |acc, m| acc + m.adjoint() * m);
        prop_assert!(max_abs(&(sum - ComplexMatrix::identity(d, d))) <= 1e-12);

        let joint = kron(density(&mut r, 2).matrix(), density(&mut r, 1 << n).matrix()).unwrap();
        let out = apply_kraus(&kraus, &joint);
        prop_assert!((out.trace() - joint.trace()).norm() <= 1e-12);
    }

    #[test]
    fn ledger_products_are_probabilities(
        j in -1.5f64..1.5,
        b in -1.5f64..1.5,
        beta in 0.0f64..1.0,
        strategy in prop_oneof![Just(Strategy::A), Just(Strategy::BLocal), Just(Strategy::BGlobal)],
    ) {
        let p = IsingParams::new(2, j, b, Boundary::Open).unwrap();
        let decomp = decompose_ising_local(&p).unwrap();
        prop_assume!(!decomp.is_empty());
        let plan = make_plan(&decomp, beta, 40, strategy, Mode::Faithful).unwrap();
        let traj = run(&plan, &DensityMatrix::from_pure(&PureState::uniform(4)), 0).unwrap();
        for source in ProbabilitySource::ALL {
            let c = traj.ledger.cumulative(source);
            prop_assert!((0.0..=1.0).contains(&c));
        }
        for s in &traj.snapshots {
            prop_assert!((s.trace() - 1.0).abs() <= 1e-10);
        }
    }
}
