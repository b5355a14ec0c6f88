//! State constructors and geometry/variance operations must hold their
//! invariants (or return an error) for any finite inputs, never panic.

#![no_main]

use arbitrary::Arbitrary;
use libfuzzer_sys::fuzz_target;
use qsl_sim::state::{
    energy_variance, energy_variance_bloch, fubini_study_distance, ground_state,
    HamiltonianParams, PureState,
};

#[derive(Arbitrary, Debug)]
struct Input {
    chi_a: f64,
    phi_a: f64,
    chi_b: f64,
    phi_b: f64,
    omega: f64,
    lambda: f64,
}

fn ok_angle(x: f64) -> bool {
    x.is_finite() && x.abs() < 1e6
}

fuzz_target!(|input: Input| {
    let Input {
        chi_a,
        phi_a,
        chi_b,
        phi_b,
        omega,
        lambda,
    } = input;
    if ![chi_a, phi_a, chi_b, phi_b].iter().all(|&x| ok_angle(x)) {
        return;
    }
    let a = PureState::from_bloch(chi_a, phi_a);
    let b = PureState::from_bloch(chi_b, phi_b);

    let d = fubini_study_distance(&a, &b);
    assert!((0.0..=std::f64::consts::PI + 1e-9).contains(&d));
    assert!((d - fubini_study_distance(&b, &a)).abs() <= 1e-12);

    let (chi, phi) = a.to_bloch();
    assert!(chi.is_finite() && phi.is_finite());
    assert!(a.bloch_vector().norm().is_finite());

    if omega.is_finite() && lambda.is_finite() && omega.abs() < 1e6 && lambda.abs() < 1e6 {
        let params = HamiltonianParams::new(omega, lambda);
        if let (Ok(v1), Ok(v2)) = (
            energy_variance(&a, &params),
            energy_variance_bloch(&a, &params),
        ) {
            assert!(v1 >= 0.0 && v2 >= 0.0);
            assert!((v1 - v2).abs() <= 1e-6 * (1.0 + params.energy()));
        }
        match ground_state(params) {
            Ok(g) => {
                let e = energy_variance(&g, &params).unwrap_or(f64::NAN);
                assert!(e <= 1e-5 * (1.0 + params.energy()));
            }
            Err(_) => assert!(params.energy() == 0.0),
        }
    }
});
