//! Property-based invariants over randomly generated states and drives.

use std::f64::consts::PI;

use proptest::prelude::*;

use qsl_sim::dynamics::propagate_constant;
use qsl_sim::state::{
    energy_variance, energy_variance_bloch, fidelity_overlap, fubini_study_distance,
    ground_state, HamiltonianParams, PureState,
};

prop_compose! {
    fn arb_state()(z in -1.0_f64..1.0, phi in 0.0_f64..(2.0 * PI)) -> PureState {
        PureState::from_bloch(z.acos(), phi)
    }
}

proptest! {
    #[test]
    fn distance_is_symmetric_and_bounded(
        a in arb_state(),
        b in arb_state(),
    ) {
        let d_ab = fubini_study_distance(&a, &b);
        let d_ba = fubini_study_distance(&b, &a);
        prop_assert!((d_ab - d_ba).abs() <= 1e-12);
        prop_assert!((0.0..=PI).contains(&d_ab));
    }

    #[test]
    fn variance_routes_agree(
        s in arb_state(),
        omega in 0.05_f64..4.0,
        lambda in -4.0_f64..4.0,
    ) {
        let p = HamiltonianParams::new(omega, lambda);
        let matrix = energy_variance(&s, &p).unwrap();
        let bloch = energy_variance_bloch(&s, &p).unwrap();
        prop_assert!((matrix - bloch).abs() <= 1e-12);
    }

    #[test]
    fn bloch_round_trip(z in -1.0_f64..1.0, phi in 0.0_f64..(2.0 * PI)) {
        let chi = z.acos();
        let s = PureState::from_bloch(chi, phi);
        let (chi2, phi2) = s.to_bloch();
        prop_assert!((chi - chi2).abs() <= 1e-9);
        // The azimuth is undefined at the poles.
        if chi.sin() > 1e-6 {
            let dphi = (phi - phi2).abs();
            prop_assert!(dphi <= 1e-9 || (dphi - 2.0 * PI).abs() <= 1e-9);
        }
    }

    #[test]
    fn closed_form_propagation_preserves_norm_and_distance(
        s in arb_state(),
        omega in 0.05_f64..4.0,
        lambda in -4.0_f64..4.0,
        dt in 0.0_f64..3.0,
    ) {
        let out = propagate_constant(&s, omega, lambda, dt);
        let norm_sq = out.amp0().norm_sqr() + out.amp1().norm_sqr();
        prop_assert!((norm_sq - 1.0).abs() <= 1e-12);
        // Unitary evolution preserves pairwise distances.
        let other = PureState::up_z();
        let other_out = propagate_constant(&other, omega, lambda, dt);
        let before = fubini_study_distance(&s, &other);
        let after = fubini_study_distance(&out, &other_out);
        prop_assert!((before - after).abs() <= 1e-9);
    }

    #[test]
    fn ground_state_is_normalized_eigenstate(
        omega in 0.05_f64..4.0,
        lambda in -4.0_f64..4.0,
    ) {
        let p = HamiltonianParams::new(omega, lambda);
        let g = ground_state(p).unwrap();
        prop_assert!(energy_variance(&g, &p).unwrap() <= 1e-6);
        // Stationarity: propagation only changes the global phase.
        let evolved = propagate_constant(&g, omega, lambda, 0.7);
        prop_assert!(1.0 - fidelity_overlap(&g, &evolved) <= 1e-12);
    }
}
