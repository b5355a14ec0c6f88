//! Pure states of a two-level system, Bloch-sphere geometry, and the
//! eigenstructure of `H = ω σx + λ σz`.
//!
//! Conventions: σz|0⟩ = +|0⟩, so |0⟩ sits at the north pole of the Bloch
//! sphere. A state is written `cos(χ/2)|0⟩ + e^{iφ} sin(χ/2)|1⟩` with polar
//! angle χ ∈ [0, π] and azimuth φ ∈ [0, 2π). All quantities use ħ = 1.

use num_complex::Complex64;

use crate::{Error, Result};

const NORM_TOL: f64 = 1e-12;

/// A normalized pure state of the two-level system.
///
/// Global phase carries no physics: every scalar exported from this type
/// (fidelity, distance, variance, Bloch angles) is invariant under
/// multiplication of both amplitudes by a unit complex number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    amp0: Complex64,
    amp1: Complex64,
}

impl PureState {
    /// Builds a state from amplitudes in the {|0⟩, |1⟩} basis.
    ///
    /// Fails unless |amp0|² + |amp1|² = 1 within 1e-12.
    pub fn new(amp0: Complex64, amp1: Complex64) -> Result<Self> {
        let norm_sq = amp0.norm_sqr() + amp1.norm_sqr();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amp0, amp1 })
    }

    /// Builds a state from possibly-unnormalized amplitudes by rescaling.
    /// Used internally where roundoff accumulates (integrator steps).
    pub(crate) fn renormalized(amp0: Complex64, amp1: Complex64) -> Self {
        let norm = (amp0.norm_sqr() + amp1.norm_sqr()).sqrt();
        Self {
            amp0: amp0 / norm,
            amp1: amp1 / norm,
        }
    }

    pub fn amp0(&self) -> Complex64 {
        self.amp0
    }

    pub fn amp1(&self) -> Complex64 {
        self.amp1
    }

    /// |0⟩, the north pole (spin up along z).
    pub fn up_z() -> Self {
        Self {
            amp0: Complex64::new(1.0, 0.0),
            amp1: Complex64::new(0.0, 0.0),
        }
    }

    /// |1⟩, the south pole (spin down along z).
    pub fn down_z() -> Self {
        Self {
            amp0: Complex64::new(0.0, 0.0),
            amp1: Complex64::new(1.0, 0.0),
        }
    }

    /// `cos(χ/2)|0⟩ + e^{iφ} sin(χ/2)|1⟩`.
    pub fn from_bloch(chi: f64, phi: f64) -> Self {
        let half = chi / 2.0;
        Self {
            amp0: Complex64::new(half.cos(), 0.0),
            amp1: Complex64::from_polar(half.sin(), phi),
        }
    }

    /// Recovers the Bloch angles (χ, φ) with χ ∈ [0, π] and φ ∈ [0, 2π).
    /// At the poles (sin χ < 1e-12) the azimuth is set to 0 by convention.
    pub fn to_bloch(&self) -> (f64, f64) {
        let chi = 2.0 * self.amp1.norm().atan2(self.amp0.norm());
        if chi.sin() < 1e-12 {
            return (chi, 0.0);
        }
        let mut phi = self.amp1.arg() - self.amp0.arg();
        phi = phi.rem_euclid(std::f64::consts::TAU);
        if phi >= std::f64::consts::TAU {
            phi = 0.0;
        }
        (chi, phi)
    }

    /// Cartesian Bloch vector (sinχ cosφ, sinχ sinφ, cosχ).
    pub fn bloch_vector(&self) -> BlochVector {
        let cross = self.amp0.conj() * self.amp1;
        BlochVector {
            x: 2.0 * cross.re,
            y: 2.0 * cross.im,
            z: self.amp0.norm_sqr() - self.amp1.norm_sqr(),
        }
    }

    /// Applies the convention that the first nonzero amplitude is real and
    /// nonnegative, removing the global phase.
    pub fn phase_normalized(&self) -> Self {
        let reference = if self.amp0.norm() > 1e-15 {
            self.amp0
        } else {
            self.amp1
        };
        let phase = reference / reference.norm();
        Self {
            amp0: self.amp0 / phase,
            amp1: self.amp1 / phase,
        }
    }
}

/// A point on (or inside, for roundoff) the unit Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Great-circle angle to another unit vector, in [0, π].
    pub fn angle_to(&self, other: &BlochVector) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }
}

/// Parameters of the Hamiltonian `H = ω σx + λ σz`, both in inverse time.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HamiltonianParams {
    pub omega: f64,
    pub lambda: f64,
}

impl HamiltonianParams {
    pub fn new(omega: f64, lambda: f64) -> Self {
        Self { omega, lambda }
    }

    /// Gap magnitude E = √(ω² + λ²); eigenvalues are ±E.
    pub fn energy(&self) -> f64 {
        self.omega.hypot(self.lambda)
    }

    /// ⟨H⟩ on a state, via the Bloch vector: ⟨H⟩ = ω x + λ z.
    pub fn expectation(&self, state: &PureState) -> f64 {
        let r = state.bloch_vector();
        self.omega * r.x + self.lambda * r.z
    }
}

/// Eigenvector of `ω σx + λ σz` with the lower eigenvalue −√(ω² + λ²).
///
/// Phase convention: the first nonzero amplitude is real and nonnegative.
pub fn ground_state(params: HamiltonianParams) -> Result<PureState> {
    let HamiltonianParams { omega, lambda } = params;
    let energy = params.energy();
    if energy == 0.0 {
        return Err(Error::ZeroHamiltonian);
    }
    // H = [[λ, ω], [ω, −λ]]. For eigenvalue −E the (unnormalized)
    // eigenvector is (−ω, λ + E); that degenerates when ω = 0, where the
    // ground state is a pole of the sphere.
    let state = if omega != 0.0 {
        let v0 = Complex64::new(-omega, 0.0);
        let v1 = Complex64::new(lambda + energy, 0.0);
        PureState::renormalized(v0, v1)
    } else if lambda > 0.0 {
        PureState::down_z()
    } else {
        PureState::up_z()
    };
    Ok(state.phase_normalized())
}

/// |⟨a|b⟩| ∈ [0, 1]; symmetric and phase-invariant.
pub fn fidelity_overlap(a: &PureState, b: &PureState) -> f64 {
    let inner = a.amp0().conj() * b.amp0() + a.amp1().conj() * b.amp1();
    inner.norm().min(1.0)
}

/// Fubini-Study distance `s = 2 arccos|⟨a|b⟩|` ∈ [0, π].
///
/// The overlap is clamped to [0, 1] before the arccos so roundoff can never
/// produce NaN.
pub fn fubini_study_distance(a: &PureState, b: &PureState) -> f64 {
    2.0 * fidelity_overlap(a, b).clamp(0.0, 1.0).acos()
}

/// Energy standard deviation ΔE = √(⟨H²⟩ − ⟨H⟩²) on a state.
///
/// Computed from 2×2 matrix moments: H² = (ω² + λ²)·I, so
/// ΔE² = ω² + λ² − (ω x + λ z)². Negative values at roundoff scale
/// (relative to E²) are clamped to zero; anything more negative is an
/// internal error.
pub fn energy_variance(state: &PureState, params: &HamiltonianParams) -> Result<f64> {
    let mean = params.expectation(state);
    let var = params.energy().powi(2) - mean * mean;
    if var < -1e-12 * params.energy().powi(2).max(1.0) {
        return Err(Error::NegativeVariance { value: var });
    }
    Ok(var.max(0.0).sqrt())
}

/// ΔE from the Bloch-angle form
/// `ΔE² = λ² sin²χ + ω²(1 − sin²χ cos²φ) − 2λω sinχ cosχ cosφ`.
///
/// Kept alongside the matrix-moment path in [`energy_variance`] so the two
/// can cross-check each other; the matrix path is the oracle.
pub fn energy_variance_bloch(state: &PureState, params: &HamiltonianParams) -> Result<f64> {
    let (chi, phi) = state.to_bloch();
    let (sc, cc) = (chi.sin(), chi.cos());
    let cp = phi.cos();
    let HamiltonianParams { omega, lambda } = *params;
    let var = lambda * lambda * sc * sc + omega * omega * (1.0 - sc * sc * cp * cp)
        - 2.0 * lambda * omega * sc * cc * cp;
    if var < -1e-12 * params.energy().powi(2).max(1.0) {
        return Err(Error::NegativeVariance { value: var });
    }
    Ok(var.max(0.0).sqrt())
}

/// The tilt angle θ = arctan(ω/γ) ∈ (0, π/2] of the ground state at λ = −γ.
///
/// The endpoint distance of the control problem is s(θ) = π − 2θ.
pub fn theta_of(omega: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        std::f64::consts::FRAC_PI_2
    } else {
        (omega / gamma).atan()
    }
}

/// Endpoint distance s(θ) = π − 2θ between the λ = ∓γ ground states.
pub fn endpoint_distance(theta: f64) -> f64 {
    std::f64::consts::PI - 2.0 * theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn g(omega: f64, lambda: f64) -> PureState {
        ground_state(HamiltonianParams::new(omega, lambda)).unwrap()
    }

    #[test]
    fn ground_state_at_zero_drive_is_down_x() {
        let r = g(1.0, 0.0).bloch_vector();
        assert_abs_diff_eq!(r.x, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ground_state_large_negative_drive_tends_to_north_pole() {
        let r = g(1e-9, -1.0).bloch_vector();
        assert!(r.z > 1.0 - 1e-12);
    }

    #[test]
    fn ground_state_example_values() {
        // (ω=1, λ=−2) → Bloch (−0.4472136, 0, 0.8944272); frozen from the
        // direct 2×2 eigendecomposition, equal to (−sinθ, 0, cosθ) with
        // θ = arctan(1/2).
        let r = g(1.0, -2.0).bloch_vector();
        assert_abs_diff_eq!(r.x, -0.447_213_595_499_958, epsilon = 1e-12);
        assert_abs_diff_eq!(r.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.z, 0.894_427_190_999_916, epsilon = 1e-12);
    }

    #[test]
    fn ground_state_rejects_zero_hamiltonian() {
        assert!(matches!(
            ground_state(HamiltonianParams::new(0.0, 0.0)),
            Err(Error::ZeroHamiltonian)
        ));
    }

    #[test]
    fn ground_state_is_lower_eigenvector() {
        // H g = −E g, checked by explicit matrix application.
        for &(omega, lambda) in &[(1.0, -2.0), (1.0, 2.0), (0.3, 0.0), (0.0, 1.5), (0.0, -1.5)] {
            let p = HamiltonianParams::new(omega, lambda);
            let s = ground_state(p).unwrap();
            let e = p.energy();
            let h00 = Complex64::new(lambda, 0.0);
            let h01 = Complex64::new(omega, 0.0);
            let out0 = h00 * s.amp0() + h01 * s.amp1();
            let out1 = h01 * s.amp0() - h00 * s.amp1();
            assert_abs_diff_eq!((out0 + e * s.amp0()).norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!((out1 + e * s.amp1()).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fidelity_identity_and_orthogonal() {
        let psi = PureState::from_bloch(0.7, 1.3);
        assert_abs_diff_eq!(fidelity_overlap(&psi, &psi), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            fidelity_overlap(&PureState::down_z(), &PureState::up_z()),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn fidelity_between_opposite_drive_ground_states() {
        // cos(s/2) with s = π − 2 arctan(1/2).
        let f = fidelity_overlap(&g(1.0, -2.0), &g(1.0, 2.0));
        assert_abs_diff_eq!(f, 0.447_213_595_499_958, epsilon = 1e-12);
    }

    #[test]
    fn distance_examples() {
        let psi = PureState::from_bloch(1.1, 0.4);
        assert_abs_diff_eq!(fubini_study_distance(&psi, &psi), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            fubini_study_distance(&PureState::down_z(), &PureState::up_z()),
            std::f64::consts::PI,
            epsilon = 1e-12
        );
        // π − 2 arctan(1/2) = 2.214297435588181
        assert_abs_diff_eq!(
            fubini_study_distance(&g(1.0, -2.0), &g(1.0, 2.0)),
            2.214_297_435_588_181,
            epsilon = 1e-12
        );
    }

    #[test]
    fn variance_vanishes_on_eigenstates() {
        let p = HamiltonianParams::new(1.0, -2.0);
        let s = ground_state(p).unwrap();
        assert_abs_diff_eq!(energy_variance(&s, &p).unwrap(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn variance_at_south_pole_is_omega() {
        let p = HamiltonianParams::new(1.0, 5.7);
        let v = energy_variance(&PureState::down_z(), &p).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn variance_of_tilted_state_under_pure_x_drive() {
        // g(1, −2) evaluated under (ω=1, λ=0): √(1 − sin²χ cos²φ) with
        // (χ, φ) = (arctan(1/2), π) → √(1 − 0.2) = 0.8944272.
        let p = HamiltonianParams::new(1.0, 0.0);
        let v = energy_variance(&g(1.0, -2.0), &p).unwrap();
        assert_abs_diff_eq!(v, 0.894_427_190_999_916, epsilon = 1e-12);
    }

    #[test]
    fn bloch_round_trip_examples() {
        let (chi, phi) = PureState::up_z().to_bloch();
        assert_abs_diff_eq!(chi, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(phi, 0.0, epsilon = 1e-12);

        let plus = PureState::from_bloch(std::f64::consts::FRAC_PI_2, 0.0);
        let (chi, phi) = plus.to_bloch();
        assert_abs_diff_eq!(chi, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(phi, 0.0, epsilon = 1e-12);

        let (chi, phi) = g(1.0, -2.0).to_bloch();
        assert_abs_diff_eq!(chi, 0.463_647_609_000_806, epsilon = 1e-12);
        assert_abs_diff_eq!(phi, std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn theta_examples() {
        assert_abs_diff_eq!(theta_of(1.0, 0.0), std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(theta_of(1.0, 2.0), 0.463_647_609_000_806, epsilon = 1e-12);
        assert!(theta_of(1.0, 1e12) < 1e-11);
    }

    #[test]
    fn construction_rejects_unnormalized_amplitudes() {
        let r = PureState::new(Complex64::new(0.8, 0.0), Complex64::new(0.8, 0.0));
        assert!(matches!(r, Err(Error::NotNormalized { .. })));
    }
}
