//! Quantum-speed-limit bounds on the evolution time: the action-threshold
//! bound T_A, the averaged-variance bound T_B, the worked-out inequality
//! T_C, the max-variance bound T_m, and the piecewise composition of the
//! time-independent Mandelstam-Tamm bound over a piecewise-constant drive.
//!
//! Closed forms exist only for the unconstrained composite pulse in the
//! λ0 → ∞ limit; trajectory-based evaluations work for every protocol.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::dynamics::{
    action_at, integrate_rk4_resolved, path_length, ControlSchedule, Trajectory,
};
use crate::protocols::{ProtocolKind, ProtocolSpec};
use crate::state::{
    endpoint_distance, energy_variance, fidelity_overlap, fubini_study_distance, theta_of,
    HamiltonianParams,
};
use crate::{Error, Result};

/// Smallest τ at which the trajectory's action `∫₀^τ 2ΔE dt'` reaches the
/// target distance; the time the process needs to traverse `s_target` in
/// state space.
///
/// The cumulative action is piecewise linear and nondecreasing, so the
/// crossing is found by bisection on the interpolated samples.
pub fn bound_ta_trajectory(traj: &Trajectory, s_target: f64) -> Result<f64> {
    if s_target <= 0.0 {
        return Ok(0.0);
    }
    let total_action = path_length(traj);
    if total_action < s_target {
        // A geodesic saturates the inequality exactly; let roundoff-scale
        // deficits resolve to the full duration instead of erroring.
        if s_target - total_action <= 1e-9 * s_target.max(1.0) {
            return Ok(traj.total_duration());
        }
        return Err(Error::InsufficientAction {
            target: s_target,
            available: total_action,
            deficit: s_target - total_action,
        });
    }
    let mut lo = 0.0;
    let mut hi = traj.total_duration();
    while hi - lo > 1e-14 * traj.total_duration().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if action_at(traj, mid)? >= s_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form T_A of the composite pulse in the λ0 → ∞ limit: zero when
/// the instantaneous first bang already covers the distance, otherwise
/// `(s(θ) − (π/2) sinθ)/(2ω)`.
pub fn bound_ta_closed(theta: f64, omega: f64) -> f64 {
    let s = endpoint_distance(theta);
    let first_arc = FRAC_PI_2 * theta.sin();
    if first_arc >= s {
        0.0
    } else {
        (s - first_arc) / (2.0 * omega)
    }
}

/// Averaged-variance bound `T_B = (s/s_p)·T`, with `s` the endpoint
/// distance and `s_p` the traversed path length.
///
/// The equivalent route `arccos|⟨ψ0|ψ_T⟩| / ΔE_avg` is evaluated alongside
/// and the two must agree to 1e-10; a mismatch flags an internal
/// bookkeeping error. The average variance is re-integrated here from the
/// sampled states segment by segment (ΔE jumps at segment boundaries, so a
/// trapezoid must not straddle them), independent of the action column the
/// integrator carries. A zero-duration trajectory yields 0 by convention.
pub fn bound_tb(schedule: &ControlSchedule, traj: &Trajectory) -> Result<f64> {
    let total = traj.total_duration();
    if total == 0.0 {
        return Ok(0.0);
    }
    let s = fubini_study_distance(traj.initial_state(), traj.final_state());
    let s_path = path_length(traj);
    if s_path == 0.0 {
        return Ok(0.0);
    }
    let geometric = s / s_path * total;

    // Independent route via the time-averaged variance.
    let times = traj.times();
    let boundaries = traj.segment_boundaries();
    if boundaries.len() != schedule.segments.len() + 1 {
        return Err(Error::Inconsistent(
            "trajectory was not sampled at the schedule's segment boundaries".into(),
        ));
    }
    let mut integral = 0.0;
    for (i, seg) in schedule.segments.iter().enumerate() {
        let params = HamiltonianParams::new(schedule.omega, seg.lambda_value);
        for k in boundaries[i] + 1..=boundaries[i + 1] {
            let left = energy_variance(&traj.states()[k - 1], &params)?;
            let right = energy_variance(&traj.states()[k], &params)?;
            integral += 0.5 * (times[k] - times[k - 1]) * (left + right);
        }
    }
    let mean_variance = integral / total;
    let averaged = fidelity_overlap(traj.initial_state(), traj.final_state())
        .clamp(0.0, 1.0)
        .acos()
        / mean_variance;
    if (geometric - averaged).abs() > 1e-10 * geometric.abs().max(1.0) {
        return Err(Error::Inconsistent(format!(
            "T_B routes disagree: geometric {geometric} vs averaged {averaged}"
        )));
    }
    Ok(geometric)
}

/// Closed-form T_B of the composite pulse in the λ0 → ∞ limit:
/// `s/(s + π sinθ) · T`.
pub fn bound_tb_closed(theta: f64, omega: f64) -> f64 {
    let s = endpoint_distance(theta);
    let t = s / (2.0 * omega);
    if s == 0.0 {
        0.0
    } else {
        s / (s + PI * theta.sin()) * t
    }
}

/// Worked-out inequality bound `T_C = (s(θ) − π sinθ)/(2ω)` for the
/// composite pulse, clamped at zero where it goes negative.
pub fn bound_tc_closed(theta: f64, omega: f64) -> f64 {
    bound_tc_raw(theta, omega).max(0.0)
}

/// Unclamped T_C, which is negative over part of the θ range; kept for
/// plotting the analytic curve.
pub fn bound_tc_raw(theta: f64, omega: f64) -> f64 {
    (endpoint_distance(theta) - PI * theta.sin()) / (2.0 * omega)
}

/// Max-variance bound `T_m = (s/2)/ΔE_max`.
///
/// For the constrained protocols the a-priori envelope ΔE_max = |c| + |ω|
/// applies without knowing the trajectory; an unbounded drive
/// (ΔE_max = ∞) gives the vacuous bound 0.
pub fn bound_tm(s: f64, delta_e_max: f64) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    if delta_e_max.is_infinite() {
        return Ok(0.0);
    }
    if delta_e_max <= 0.0 {
        return Err(Error::NonpositiveMaxVariance);
    }
    Ok(0.5 * s / delta_e_max)
}

/// Per-segment composition of the time-independent Mandelstam-Tamm bound:
/// `Σᵢ arccos|⟨ψᵢ|ψᵢ₊₁⟩| / ΔEᵢ` over the constant-λ segments, with ΔEᵢ
/// evaluated on the segment-initial state.
///
/// Within a constant-H segment ΔE is conserved; this is asserted against
/// the recorded trajectory samples to 1e-9 as a guard. A segment with
/// ΔE = 0 must have coincident boundary states.
pub fn piecewise_mt_bound(schedule: &ControlSchedule, traj: &Trajectory) -> Result<f64> {
    let boundaries = traj.segment_boundaries();
    if boundaries.len() != schedule.segments.len() + 1 {
        return Err(Error::Inconsistent(
            "trajectory was not sampled at the schedule's segment boundaries".into(),
        ));
    }
    let mut total = 0.0;
    for (i, seg) in schedule.segments.iter().enumerate() {
        let (start, end) = (boundaries[i], boundaries[i + 1]);
        if start == end {
            continue; // zero-duration segment
        }
        let params = HamiltonianParams::new(schedule.omega, seg.lambda_value);
        let psi_in = &traj.states()[start];
        let psi_out = &traj.states()[end];
        let delta_e = energy_variance(psi_in, &params)?;
        // ΔE near an eigenstate is √(roundoff), so the constancy guard
        // carries a floor of 1e-7·E on top of the relative term.
        let guard = 1e-9 * delta_e.max(1.0) + 1e-7 * params.energy();
        for k in start + 1..=end {
            let sampled = traj.variances()[k];
            if (sampled - delta_e).abs() > guard {
                return Err(Error::Inconsistent(format!(
                    "variance drifts within segment {i}: {sampled} vs {delta_e}"
                )));
            }
        }
        let half_distance = fidelity_overlap(psi_in, psi_out).clamp(0.0, 1.0).acos();
        if delta_e == 0.0 {
            if half_distance > 1e-9 {
                return Err(Error::Inconsistent(format!(
                    "segment {i} moves the state with zero variance"
                )));
            }
            continue;
        }
        total += half_distance / delta_e;
    }
    Ok(total)
}

/// The full per-configuration bundle of times, bounds, and geometry.
///
/// Closed-form fields are `None` for the constrained protocols, where the
/// λ0 → ∞ composite-pulse formulas do not apply. `t_c_trajectory` is
/// available only when ΔE is constant along the whole evolution (the
/// bang-bang case), where the inequality can be solved directly.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundsReport {
    pub protocol: ProtocolKind,
    pub omega: f64,
    pub gamma: f64,
    pub theta: f64,
    /// Endpoint distance s(θ) = π − 2θ of the control problem.
    pub s: f64,
    /// Arc length actually traversed by the simulated evolution.
    pub s_path: f64,
    /// Total protocol duration.
    pub t: f64,
    /// Overlap of the simulated endpoint with the target ground state.
    pub fidelity: f64,
    pub t_a_closed: Option<f64>,
    pub t_a_trajectory: f64,
    pub t_b_closed: Option<f64>,
    pub t_b_trajectory: f64,
    pub t_c_closed: Option<f64>,
    /// Unclamped closed-form T_C (may be negative).
    pub t_c_raw: Option<f64>,
    pub t_c_trajectory: Option<f64>,
    pub t_m: f64,
    pub t_piecewise: f64,
}

/// Builds the protocol schedule, integrates it (per-segment resolved step,
/// optionally tightened by `step`), and evaluates every bound.
pub fn evaluate(spec: &ProtocolSpec, step: Option<f64>) -> Result<BoundsReport> {
    let schedule = spec.schedule()?;
    let psi0 = spec.initial_state()?;
    let traj = integrate_rk4_resolved(&psi0, &schedule, step)?;
    evaluate_trajectory(spec, &schedule, &traj)
}

/// Same as [`evaluate`] for a pre-computed trajectory.
pub fn evaluate_trajectory(
    spec: &ProtocolSpec,
    schedule: &ControlSchedule,
    traj: &Trajectory,
) -> Result<BoundsReport> {
    let theta = theta_of(spec.omega, spec.gamma);
    let s = endpoint_distance(theta);
    let target = spec.target_state()?;

    let closed = spec.kind == ProtocolKind::CompositeUnconstrained;
    let s_path = path_length(traj);
    let t = traj.total_duration();

    let t_c_trajectory = constant_variance_bound(traj, s);

    Ok(BoundsReport {
        protocol: spec.kind,
        omega: spec.omega,
        gamma: spec.gamma,
        theta,
        s,
        s_path,
        t,
        fidelity: fidelity_overlap(traj.final_state(), &target),
        t_a_closed: closed.then(|| bound_ta_closed(theta, spec.omega)),
        t_a_trajectory: bound_ta_trajectory(traj, s)?,
        t_b_closed: closed.then(|| bound_tb_closed(theta, spec.omega)),
        t_b_trajectory: bound_tb(schedule, traj)?,
        t_c_closed: closed.then(|| bound_tc_closed(theta, spec.omega)),
        t_c_raw: closed.then(|| bound_tc_raw(theta, spec.omega)),
        t_c_trajectory,
        t_m: bound_tm(s, spec.delta_e_max().unwrap_or(f64::INFINITY))?,
        t_piecewise: piecewise_mt_bound(schedule, traj)?,
    })
}

/// Solves the geometric inequality directly when ΔE is constant along the
/// whole trajectory (within 1e-6): `T ≥ s/(2ΔE)`. Returns `None` when the
/// variance varies, where the inequality has no closed solution.
fn constant_variance_bound(traj: &Trajectory, s: f64) -> Option<f64> {
    let variances = traj.variances();
    let first = variances[0];
    let constant = variances.iter().all(|v| (v - first).abs() <= 1e-6);
    if !constant || first <= 0.0 {
        return None;
    }
    Some(0.5 * s / first)
}

/// The θ* at which the closed-form T_A starts vanishing, i.e. the root of
/// `(π/2) sinθ = π − 2θ`, found by bisection.
pub fn ta_vanishing_theta() -> f64 {
    let f = |theta: f64| FRAC_PI_2 * theta.sin() - endpoint_distance(theta);
    let mut lo = 0.0;
    let mut hi = FRAC_PI_2;
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
