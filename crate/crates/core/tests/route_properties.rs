mod common;

use dicke_core::qfi::{
    build_two_atom_state, qfi_appendix, qfi_closed_form, qfi_spectral_general, qfi_spin_form, qfi_symmetric_form,
    qfi_via_sld, sigma_z_first, x_state_spectrum,
};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 1000, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn routes_agree_on_random_x_states(seed in any::<u64>(), n_atoms in 2usize..4096) {
        let state = common::random_x_state(&mut ChaCha8Rng::seed_from_u64(seed));
        state.validate().unwrap();
        let sp = x_state_spectrum(&state).unwrap();
        let (p, v, u) = (sp.values(), sp.vector_matrix(), sigma_z_first());

        let closed = qfi_closed_form(&state).unwrap().value;
        let spin = qfi_spin_form(&common::moments_for(&state, n_atoms)).unwrap().value;
        let spectral = qfi_spectral_general(&p, &v, &u).unwrap().value;
        let sld = qfi_via_sld(&p, &v, &u).unwrap().value;
        let symmetric = qfi_symmetric_form(&p, &v, &u).unwrap();
        let appendix = qfi_appendix(&state).unwrap();

        for (name, value) in [("spin", spin), ("spectral", spectral), ("sld", sld), ("symmetric", symmetric), ("appendix", appendix)] {
            prop_assert!((value - closed).abs() < 1e-10, "{name}: {value} vs closed {closed}");
        }
        prop_assert!((-1e-12..=4.0 + 1e-12).contains(&closed));
    }

    #[test]
    fn analytic_eigensystem_diagonalizes(seed in any::<u64>()) {
        let state = common::random_x_state(&mut ChaCha8Rng::seed_from_u64(seed));
        let sp = x_state_spectrum(&state).unwrap();
        let rho = state.to_matrix();
        let v = sp.vector_matrix();
        let p = sp.values();
        for i in 0..4 {
            let col = v.column(i);
            let residual = (&rho * col - col * num_complex::Complex64::new(p[i], 0.0)).norm();
            prop_assert!(residual < 1e-12, "vector {i}: residual {residual:e}");
            prop_assert!((col.norm() - 1.0).abs() < 1e-12);
        }
        let gram = v.adjoint() * &v;
        prop_assert!((gram - nalgebra::DMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn moment_map_round_trips(seed in any::<u64>(), n_atoms in 2usize..512) {
        let state = common::random_x_state(&mut ChaCha8Rng::seed_from_u64(seed));
        let back = build_two_atom_state(&common::moments_for(&state, n_atoms)).unwrap();
        prop_assert!((back.v_plus - state.v_plus).abs() < 1e-12);
        prop_assert!((back.v_minus - state.v_minus).abs() < 1e-12);
        prop_assert!((back.w - state.w).abs() < 1e-12);
        prop_assert!((back.u - state.u).norm() < 1e-12);
    }
}
