use coherence_core::linalg::{kron, unitarity_defect};
use coherence_core::measures::{
    accessible_coherence_s2, correlation_t2, mean_coherence_sq, witness, CLASSICAL_CHSH_BOUND,
    WITNESS_T2_THRESHOLD,
};
use coherence_core::random::{
    haar_pure_state, haar_unitary2, haar_unitary4, induced_mixed_state, rng_for,
};
use coherence_core::spdc::{antibunch_probability, invert_antibunch, SingletMixture};
use coherence_core::state::{
    partial_trace, purity, tensor_product, SingleQubitState, Subsystem, TwoQubitState,
};
use coherence_core::tomography::{expected_counts, mle_reconstruct_with, MleOptions, ProjectorSet};
use proptest::prelude::*;

fn state(seed: u64, rank: usize) -> TwoQubitState {
    induced_mixed_state(&mut rng_for(seed, 0), rank)
}

fn qubit(bloch: [f64; 3]) -> SingleQubitState {
    let n = bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = if n > 1.0 { 1.0 / n } else { 1.0 };
    SingleQubitState::from_bloch(bloch.map(|x| x * scale)).unwrap()
}

fn bloch() -> impl Strategy<Value = [f64; 3]> {
    [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn partial_trace_recovers_factors(a in bloch(), b in bloch()) {
        let (qa, qb) = (qubit(a), qubit(b));
        let rho = tensor_product(&qa, &qb);
        for (keep, q) in [(Subsystem::A, &qa), (Subsystem::B, &qb)] {
            let back = partial_trace(&rho, keep);
            prop_assert!((back.matrix() - q.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn purity_and_spectrum_survive_global_unitaries(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = state(seed, rank);
        let u = haar_unitary4(&mut rng_for(seed, 1));
        prop_assert!(unitarity_defect(&u) < 1e-10);
        let out = rho.evolve(&u);
        prop_assert!((purity(&out) - purity(&rho)).abs() < 1e-10);
        let (e0, e1) = (rho.eigenvalues(), out.eigenvalues());
        prop_assert!((e0.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        for k in 0..4 {
            prop_assert!((e0[k] - e1[k]).abs() < 1e-9);
            prop_assert!(e0[k] >= -1e-10);
        }
    }

    #[test]
    fn s2_equals_purity(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = state(seed, rank);
        prop_assert!((accessible_coherence_s2(&rho) - purity(&rho)).abs() < 1e-10);
    }

    #[test]
    fn s2_is_conserved_under_global_unitaries(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = state(seed, rank);
        let out = rho.evolve(&haar_unitary4(&mut rng_for(seed, 1)));
        prop_assert!((accessible_coherence_s2(&out) - accessible_coherence_s2(&rho)).abs() < 1e-10);
    }

    #[test]
    fn local_unitaries_preserve_d2_and_t2(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = state(seed, rank);
        let mut rng = rng_for(seed, 2);
        let u = kron(&haar_unitary2(&mut rng), &haar_unitary2(&mut rng));
        let out = rho.evolve(&u);
        prop_assert!((mean_coherence_sq(&out) - mean_coherence_sq(&rho)).abs() < 1e-10);
        prop_assert!((correlation_t2(&out) - correlation_t2(&rho)).abs() < 1e-10);
        let (w0, w1) = (witness(&rho), witness(&out));
        prop_assert!((w0.b - w1.b).abs() < 1e-8);
    }

    #[test]
    fn witness_is_sound(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = state(seed, rank);
        let w = witness(&rho);
        prop_assert!(w.b <= 2.0 * 2f64.sqrt() + 1e-10);
        prop_assert!(w.b_lower_bound <= w.b + 1e-9);
        if w.t2 > WITNESS_T2_THRESHOLD {
            prop_assert!(w.nonlocal_witnessed);
            prop_assert!(w.b > CLASSICAL_CHSH_BOUND);
        }
    }

    #[test]
    fn antibunching_inversion_round_trips(p in 0.0..=1.0f64, v in 0.01..=1.0f64) {
        let m = SingletMixture::new(p).unwrap();
        let prob = antibunch_probability(m, v).unwrap();
        prop_assert!((0.0..=1.0).contains(&prob));
        let back = invert_antibunch(prob, v).unwrap();
        prop_assert!((back.p() - p).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn noiseless_reconstruction_round_trips(seed in any::<u64>()) {
        let psi = haar_pure_state(&mut rng_for(seed, 0));
        let rho = psi.density();
        let set = ProjectorSet::standard();
        let records = expected_counts(&rho, &set, 1_000_000_000);
        let opts = MleOptions { tol: 1e-12, max_iter: 20_000, ..MleOptions::default() };
        let fit = mle_reconstruct_with(&records, &set, &opts).unwrap();
        prop_assert!(fit.state.fidelity_with_pure(&psi) > 0.999);
    }
}
