//! Time evolution under piecewise-constant drives.
//!
//! Two propagation routes are kept side by side: the closed-form SU(2)
//! propagator for a constant Hamiltonian (exact, used as the oracle) and a
//! classic four-stage Runge-Kutta integration of `i ψ̇ = H(t) ψ` that records
//! the full trajectory with per-sample energy variance and the running
//! action integral `∫ 2ΔE dt` (the arc length traversed in state space).

use num_complex::Complex64;

use crate::state::{energy_variance, HamiltonianParams, PureState};
use crate::{Error, Result};

/// One constant-λ piece of a drive: `H = ω σx + λ σz` held for `duration`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ControlSegment {
    pub lambda_value: f64,
    pub duration: f64,
}

/// An ordered piecewise-constant drive λ(t) with fixed ω.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ControlSchedule {
    pub omega: f64,
    pub segments: Vec<ControlSegment>,
}

impl ControlSchedule {
    pub fn new(omega: f64, segments: Vec<ControlSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptySchedule);
        }
        Ok(Self { omega, segments })
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Largest |λ| over the schedule.
    pub fn max_abs_lambda(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.lambda_value.abs())
            .fold(0.0, f64::max)
    }

    /// Per-segment step for which the RK4 route stays within 1e-8
    /// infidelity of the closed-form propagator: 1e-3 over the segment's
    /// frequency scale max(ω, |λ|).
    fn resolved_step(&self, segment: &ControlSegment) -> f64 {
        let freq = self.omega.abs().max(segment.lambda_value.abs());
        if freq > 0.0 {
            1e-3 / freq
        } else {
            segment.duration.max(1.0)
        }
    }

    /// Evolves a state through the whole schedule with the closed-form
    /// propagator. Exact up to roundoff; the oracle for [`integrate_rk4`].
    pub fn propagate_exact(&self, state: &PureState) -> PureState {
        self.segments.iter().fold(*state, |psi, seg| {
            propagate_constant(&psi, self.omega, seg.lambda_value, seg.duration)
        })
    }
}

/// `exp(−i H dt)` applied to a state, with `H = ω σx + λ σz`.
///
/// Uses `U = cos(E dt)·I − i sin(E dt)(n·σ)` with E = √(ω² + λ²) and
/// n = (ω, 0, λ)/E; exactly unitary up to roundoff. E = 0 gives the
/// identity.
pub fn propagate_constant(state: &PureState, omega: f64, lambda: f64, dt: f64) -> PureState {
    let energy = omega.hypot(lambda);
    if energy == 0.0 || dt == 0.0 {
        return *state;
    }
    let (nx, nz) = (omega / energy, lambda / energy);
    let (sin, cos) = (energy * dt).sin_cos();
    // n·σ = [[nz, nx], [nx, −nz]]
    let u00 = Complex64::new(cos, -sin * nz);
    let u01 = Complex64::new(0.0, -sin * nx);
    let u11 = Complex64::new(cos, sin * nz);
    PureState::renormalized(
        u00 * state.amp0() + u01 * state.amp1(),
        u01 * state.amp0() + u11 * state.amp1(),
    )
}

/// A time-sampled record of an evolution: states, instantaneous energy
/// variance ΔE(t), and cumulative action `∫₀ᵗ 2ΔE dt′` (trapezoid rule on
/// the sample grid). Every segment boundary is an exact sample point.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<PureState>,
    variances: Vec<f64>,
    cumulative_action: Vec<f64>,
    /// Sample indices at which each schedule segment starts/ends;
    /// `segment_boundaries[i]` is the first sample of segment `i`, the last
    /// entry is the final sample.
    segment_boundaries: Vec<usize>,
    /// Largest per-step |‖ψ‖ − 1| observed before renormalizing.
    max_step_norm_drift: f64,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn cumulative_action(&self) -> &[f64] {
        &self.cumulative_action
    }

    pub fn segment_boundaries(&self) -> &[usize] {
        &self.segment_boundaries
    }

    /// Worst pre-renormalization norm drift of any RK4 step.
    pub fn max_step_norm_drift(&self) -> f64 {
        self.max_step_norm_drift
    }

    pub fn initial_state(&self) -> &PureState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &PureState {
        self.states.last().unwrap()
    }

    pub fn total_duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Four-stage Runge-Kutta integration of `i ψ̇ = H(t) ψ` over a schedule.
///
/// The step is honored as given, only shrunk per segment so every segment
/// holds an integer number of steps (λ(t) is discontinuous at boundaries;
/// a stage evaluation must never straddle one). The state is renormalized
/// after each step. For a step that resolves the fastest frequency, prefer
/// [`integrate_rk4_resolved`].
pub fn integrate_rk4(
    initial: &PureState,
    schedule: &ControlSchedule,
    h: f64,
) -> Result<Trajectory> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::NonpositiveStep(h));
    }
    integrate(initial, schedule, |_| h)
}

/// Like [`integrate_rk4`] with the step capped per segment at
/// `1e-3 / max(ω, |λ|)`, which keeps the final state within 1e-8
/// infidelity of the closed-form propagator chain. `base` optionally
/// tightens the cap further.
pub fn integrate_rk4_resolved(
    initial: &PureState,
    schedule: &ControlSchedule,
    base: Option<f64>,
) -> Result<Trajectory> {
    if let Some(h) = base {
        if h.is_nan() || h <= 0.0 {
            return Err(Error::NonpositiveStep(h));
        }
    }
    integrate(initial, schedule, |seg| {
        let cap = schedule.resolved_step(seg);
        base.map_or(cap, |h| h.min(cap))
    })
}

fn integrate(
    initial: &PureState,
    schedule: &ControlSchedule,
    step_for: impl Fn(&ControlSegment) -> f64,
) -> Result<Trajectory> {
    if schedule.segments.is_empty() {
        return Err(Error::EmptySchedule);
    }

    let first_params = HamiltonianParams::new(schedule.omega, schedule.segments[0].lambda_value);
    let mut times = vec![0.0];
    let mut states = vec![*initial];
    let mut variances = vec![energy_variance(initial, &first_params)?];
    let mut cumulative_action = vec![0.0];
    let mut segment_boundaries = vec![0usize];

    let mut t = 0.0;
    let mut action = 0.0;
    let mut max_drift = 0.0_f64;
    let mut psi = *initial;
    for seg in &schedule.segments {
        if seg.duration > 0.0 {
            let step_target = step_for(seg);
            let n_steps = (seg.duration / step_target).ceil().max(1.0) as usize;
            let dt = seg.duration / n_steps as f64;
            let params = HamiltonianParams::new(schedule.omega, seg.lambda_value);
            // The trapezoid must not straddle the λ discontinuity at the
            // segment entry, so the left endpoint is re-evaluated under
            // this segment's Hamiltonian.
            let mut v_prev = energy_variance(&psi, &params)?;
            for _ in 0..n_steps {
                let (raw0, raw1) = rk4_step(&psi, &params, dt);
                let norm = (raw0.norm_sqr() + raw1.norm_sqr()).sqrt();
                max_drift = max_drift.max((norm - 1.0).abs());
                psi = PureState::renormalized(raw0, raw1);
                t += dt;
                let v = energy_variance(&psi, &params)?;
                // Trapezoid on the speed 2ΔE: dt·(2v + 2v_prev)/2.
                action += dt * (v + v_prev);
                v_prev = v;
                times.push(t);
                states.push(psi);
                variances.push(v);
                cumulative_action.push(action);
            }
        }
        segment_boundaries.push(times.len() - 1);
    }

    Ok(Trajectory {
        times,
        states,
        variances,
        cumulative_action,
        segment_boundaries,
        max_step_norm_drift: max_drift,
    })
}

fn schrodinger_rhs(psi: (Complex64, Complex64), p: &HamiltonianParams) -> (Complex64, Complex64) {
    // ψ̇ = −i H ψ, H = [[λ, ω], [ω, −λ]]
    let minus_i = Complex64::new(0.0, -1.0);
    (
        minus_i * (p.lambda * psi.0 + p.omega * psi.1),
        minus_i * (p.omega * psi.0 - p.lambda * psi.1),
    )
}

fn rk4_step(
    state: &PureState,
    params: &HamiltonianParams,
    dt: f64,
) -> (Complex64, Complex64) {
    let y = (state.amp0(), state.amp1());
    let k1 = schrodinger_rhs(y, params);
    let k2 = schrodinger_rhs((y.0 + 0.5 * dt * k1.0, y.1 + 0.5 * dt * k1.1), params);
    let k3 = schrodinger_rhs((y.0 + 0.5 * dt * k2.0, y.1 + 0.5 * dt * k2.1), params);
    let k4 = schrodinger_rhs((y.0 + dt * k3.0, y.1 + dt * k3.1), params);
    let sixth = dt / 6.0;
    (
        y.0 + sixth * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + sixth * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Total arc length of the trajectory in state space, `∫₀ᵀ 2ΔE dt`.
pub fn path_length(traj: &Trajectory) -> f64 {
    *traj.cumulative_action.last().unwrap()
}

/// Action `∫₀^τ 2ΔE dt′` at an interior time, by linear interpolation of
/// the cumulative samples. Monotone in τ.
pub fn action_at(traj: &Trajectory, tau: f64) -> Result<f64> {
    let total = traj.total_duration();
    if !(0.0..=total + 1e-12 * total.max(1.0)).contains(&tau) {
        return Err(Error::TimeOutOfRange { tau, total });
    }
    let tau = tau.min(total);
    match traj.times.binary_search_by(|t| t.partial_cmp(&tau).unwrap()) {
        Ok(i) => Ok(traj.cumulative_action[i]),
        Err(i) => {
            let (t0, t1) = (traj.times[i - 1], traj.times[i]);
            let (a0, a1) = (traj.cumulative_action[i - 1], traj.cumulative_action[i]);
            Ok(a0 + (a1 - a0) * (tau - t0) / (t1 - t0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{fidelity_overlap, fubini_study_distance, ground_state, theta_of};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn propagate_zero_time_is_identity() {
        let psi = PureState::from_bloch(0.9, 2.3);
        let out = propagate_constant(&psi, 1.0, -0.5, 0.0);
        assert_abs_diff_eq!(fidelity_overlap(&psi, &out), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn propagate_pi_rotation_about_x_flips_poles() {
        // H = ω σx rotates the Bloch vector about x at angular speed 2ω;
        // dt = π/(2ω) is a π rotation taking |1⟩ to |0⟩ up to phase.
        let out = propagate_constant(&PureState::down_z(), 1.0, 0.0, FRAC_PI_2);
        assert_abs_diff_eq!(
            fidelity_overlap(&out, &PureState::up_z()),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn propagate_keeps_eigenstates_fixed() {
        let p = HamiltonianParams::new(1.0, -2.0);
        let g = ground_state(p).unwrap();
        for &dt in &[0.1, 1.0, 17.3] {
            let out = propagate_constant(&g, p.omega, p.lambda, dt);
            assert_abs_diff_eq!(fidelity_overlap(&g, &out), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn propagate_zero_hamiltonian_is_identity() {
        let psi = PureState::from_bloch(1.2, 0.3);
        let out = propagate_constant(&psi, 0.0, 0.0, 3.0);
        assert_abs_diff_eq!(fidelity_overlap(&psi, &out), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rk4_matches_exact_propagator_on_pole_flip() {
        let schedule = ControlSchedule::new(
            1.0,
            vec![ControlSegment {
                lambda_value: 0.0,
                duration: FRAC_PI_2,
            }],
        )
        .unwrap();
        let traj = integrate_rk4(&PureState::down_z(), &schedule, 1e-3).unwrap();
        let f = fidelity_overlap(traj.final_state(), &PureState::up_z());
        assert!(f >= 1.0 - 1e-8, "infidelity {}", 1.0 - f);
    }

    #[test]
    fn rk4_rejects_bad_inputs() {
        let schedule = ControlSchedule::new(
            1.0,
            vec![ControlSegment {
                lambda_value: 0.0,
                duration: 1.0,
            }],
        )
        .unwrap();
        assert!(matches!(
            integrate_rk4(&PureState::up_z(), &schedule, 0.0),
            Err(Error::NonpositiveStep(_))
        ));
        assert!(matches!(
            ControlSchedule::new(1.0, vec![]),
            Err(Error::EmptySchedule)
        ));
    }

    #[test]
    fn zero_duration_schedule_gives_single_sample() {
        let schedule = ControlSchedule::new(
            1.0,
            vec![ControlSegment {
                lambda_value: 2.0,
                duration: 0.0,
            }],
        )
        .unwrap();
        let traj = integrate_rk4(&PureState::up_z(), &schedule, 1e-3).unwrap();
        assert_eq!(traj.len(), 1);
        assert_abs_diff_eq!(path_length(&traj), 0.0);
    }

    #[test]
    fn meridian_arc_length_matches_geometry() {
        // λ = 0 arc from polar angle θ to π − θ: length π − 2θ.
        let theta = theta_of(1.0, 2.0);
        let start = PureState::from_bloch(theta, 1.5 * PI);
        let duration = (PI - 2.0 * theta) / 2.0;
        let schedule = ControlSchedule::new(
            1.0,
            vec![ControlSegment {
                lambda_value: 0.0,
                duration,
            }],
        )
        .unwrap();
        let traj = integrate_rk4(&start, &schedule, 1e-4).unwrap();
        assert_abs_diff_eq!(path_length(&traj), PI - 2.0 * theta, epsilon = 1e-6);
        // Chord length between sampled Bloch points agrees with the action.
        let chord: f64 = traj
            .states()
            .windows(2)
            .map(|w| w[0].bloch_vector().angle_to(&w[1].bloch_vector()))
            .sum();
        assert_abs_diff_eq!(chord, path_length(&traj), epsilon = 1e-5);
    }

    #[test]
    fn z_rotation_quarter_turn_length() {
        // A z-rotation by azimuth π/2 at polar angle θ traverses (π/2)·sinθ.
        let theta = theta_of(1.0, 2.0);
        let lambda0 = 500.0;
        let t0 = PI / (4.0 * lambda0);
        let start = PureState::from_bloch(theta, PI);
        // ω must stay on; use the composite first-bang geometry with
        // λ0 ≫ ω so the ω contribution is negligible.
        let schedule = ControlSchedule::new(
            1.0,
            vec![ControlSegment {
                lambda_value: lambda0,
                duration: t0,
            }],
        )
        .unwrap();
        let traj = integrate_rk4(&start, &schedule, 1e-5).unwrap();
        assert_abs_diff_eq!(
            path_length(&traj),
            FRAC_PI_2 * theta.sin(),
            epsilon = 1e-2 // finite-λ0 contamination from the ω term
        );
    }

    #[test]
    fn action_interpolation_endpoints() {
        let schedule = ControlSchedule::new(
            1.0,
            vec![
                ControlSegment {
                    lambda_value: 2.0,
                    duration: 0.4,
                },
                ControlSegment {
                    lambda_value: -1.0,
                    duration: 0.6,
                },
            ],
        )
        .unwrap();
        let traj = integrate_rk4(&PureState::from_bloch(1.0, 0.5), &schedule, 1e-3).unwrap();
        assert_abs_diff_eq!(action_at(&traj, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            action_at(&traj, traj.total_duration()).unwrap(),
            path_length(&traj)
        );
        assert!(action_at(&traj, -0.1).is_err());
        assert!(action_at(&traj, 1.1).is_err());
        // Monotone in τ.
        let mut prev = 0.0;
        for k in 0..=50 {
            let tau = traj.total_duration() * k as f64 / 50.0;
            let a = action_at(&traj, tau).unwrap();
            assert!(a >= prev - 1e-15);
            prev = a;
        }
    }

    #[test]
    fn geometric_inequality_on_a_generic_schedule() {
        let schedule = ControlSchedule::new(
            1.0,
            vec![
                ControlSegment {
                    lambda_value: 1.3,
                    duration: 0.7,
                },
                ControlSegment {
                    lambda_value: -0.4,
                    duration: 0.9,
                },
            ],
        )
        .unwrap();
        let start = PureState::from_bloch(0.8, 0.2);
        let traj = integrate_rk4(&start, &schedule, 1e-3).unwrap();
        let s = fubini_study_distance(traj.initial_state(), traj.final_state());
        assert!(path_length(&traj) >= s - 1e-9);
    }

    #[test]
    fn segment_boundaries_are_exact_samples() {
        let schedule = ControlSchedule::new(
            1.0,
            vec![
                ControlSegment {
                    lambda_value: 5.0,
                    duration: 0.31,
                },
                ControlSegment {
                    lambda_value: 0.0,
                    duration: 1.1,
                },
                ControlSegment {
                    lambda_value: -5.0,
                    duration: 0.31,
                },
            ],
        )
        .unwrap();
        let traj = integrate_rk4(&PureState::up_z(), &schedule, 1e-3).unwrap();
        let b = traj.segment_boundaries();
        assert_eq!(b.len(), 4);
        assert_eq!(b[0], 0);
        assert_eq!(b[3], traj.len() - 1);
        assert_abs_diff_eq!(traj.times()[b[1]], 0.31, epsilon = 1e-12);
        assert_abs_diff_eq!(traj.times()[b[2]], 1.41, epsilon = 1e-12);
    }
}
