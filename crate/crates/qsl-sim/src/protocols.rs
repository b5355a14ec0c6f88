//! The three time-optimal drive protocols for steering `g(ω, −γ)` into
//! `g(ω, +γ)`: the unconstrained composite pulse and the amplitude-limited
//! bang-off-bang and bang-bang schedules.
//!
//! Constrained durations are not transcribed from closed forms; they are
//! solved numerically from the reachability condition using the exact
//! propagator, exploiting the protocols' time-reversal symmetry (first and
//! last bang share one duration).

use std::f64::consts::{FRAC_PI_4, TAU};

use crate::dynamics::{ControlSchedule, ControlSegment};
use crate::state::{fidelity_overlap, ground_state, HamiltonianParams, PureState};
use crate::{Error, Result};

/// Which drive protocol to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    CompositeUnconstrained,
    BangOffBang,
    BangBang,
}

impl ProtocolKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolKind::CompositeUnconstrained => "composite",
            ProtocolKind::BangOffBang => "bang_off_bang",
            ProtocolKind::BangBang => "bang_bang",
        }
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "composite" | "composite_unconstrained" => Ok(ProtocolKind::CompositeUnconstrained),
            "bang_off_bang" => Ok(ProtocolKind::BangOffBang),
            "bang_bang" => Ok(ProtocolKind::BangBang),
            other => Err(Error::InvalidProtocol(format!(
                "unknown protocol '{other}'"
            ))),
        }
    }
}

/// A fully-specified protocol instance for one (ω, γ) control problem.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub omega: f64,
    pub gamma: f64,
    /// Bang amplitude of the composite pulse; ignored by constrained kinds.
    pub lambda0: f64,
    /// Amplitude cap |λ| ≤ c; ignored by the composite kind.
    pub c: f64,
}

impl ProtocolSpec {
    pub fn composite(omega: f64, gamma: f64, lambda0: f64) -> Self {
        Self {
            kind: ProtocolKind::CompositeUnconstrained,
            omega,
            gamma,
            lambda0,
            c: f64::NAN,
        }
    }

    pub fn constrained(kind: ProtocolKind, omega: f64, gamma: f64, c: f64) -> Self {
        Self {
            kind,
            omega,
            gamma,
            lambda0: f64::NAN,
            c,
        }
    }

    /// Validates the regime split: bang-off-bang needs c > ω²/γ and
    /// bang-bang needs c < ω²/γ; the boundary is rejected.
    pub fn validate(&self) -> Result<()> {
        if self.omega.is_nan() || self.omega <= 0.0 {
            return Err(Error::InvalidProtocol(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidProtocol(format!(
                "gamma must be nonnegative, got {}",
                self.gamma
            )));
        }
        match self.kind {
            ProtocolKind::CompositeUnconstrained => {
                if self.lambda0.is_nan() || self.lambda0 <= 0.0 {
                    return Err(Error::NonpositiveAmplitude(self.lambda0));
                }
            }
            ProtocolKind::BangOffBang | ProtocolKind::BangBang => {
                if self.c.is_nan() || self.c <= 0.0 {
                    return Err(Error::NonpositiveAmplitude(self.c));
                }
                if self.gamma <= 0.0 {
                    return Err(Error::InvalidProtocol(
                        "constrained protocols need gamma > 0".into(),
                    ));
                }
                let threshold = self.omega * self.omega / self.gamma;
                if self.c == threshold {
                    return Err(Error::Unreachable(
                        "c = omega^2/gamma sits on the regime boundary".into(),
                    ));
                }
                if self.kind == ProtocolKind::BangOffBang && self.c < threshold {
                    return Err(Error::Unreachable(format!(
                        "bang-off-bang requires c > omega^2/gamma = {threshold}"
                    )));
                }
                if self.kind == ProtocolKind::BangBang && self.c > threshold {
                    return Err(Error::Unreachable(format!(
                        "bang-bang requires c < omega^2/gamma = {threshold}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The state prepared at t = 0, `g(ω, −γ)`.
    pub fn initial_state(&self) -> Result<PureState> {
        ground_state(HamiltonianParams::new(self.omega, -self.gamma))
    }

    /// The target state, `g(ω, +γ)`.
    pub fn target_state(&self) -> Result<PureState> {
        ground_state(HamiltonianParams::new(self.omega, self.gamma))
    }

    /// A-priori variance envelope ΔE ≤ |c| + |ω| for constrained kinds;
    /// unbounded (None) for the composite pulse, whose λ0 → ∞ limit makes
    /// the max-variance bound vacuous.
    pub fn delta_e_max(&self) -> Option<f64> {
        match self.kind {
            ProtocolKind::CompositeUnconstrained => None,
            _ => Some(self.c.abs() + self.omega.abs()),
        }
    }

    pub fn schedule(&self) -> Result<ControlSchedule> {
        self.validate()?;
        match self.kind {
            ProtocolKind::CompositeUnconstrained => {
                composite_pulse_schedule(self.omega, self.gamma, self.lambda0)
            }
            _ => constrained_schedule(self.omega, self.gamma, self.c),
        }
    }
}

/// Analytic optimal evolution time `T = arctan(γ/ω)/ω = s(θ)/(2ω)` of the
/// unconstrained problem.
pub fn optimal_time_unconstrained(omega: f64, gamma: f64) -> f64 {
    (gamma / omega).atan() / omega
}

/// The unconstrained composite pulse: (+λ0, t0), (0, T), (−λ0, t0) with
/// λ0·t0 = π/4 and T = arctan(γ/ω)/ω.
///
/// The first bang carries +λ0 so the initial state's azimuth advances from
/// π to 3π/2, putting the middle arc on the meridian at azimuth 3π/2.
pub fn composite_pulse_schedule(omega: f64, gamma: f64, lambda0: f64) -> Result<ControlSchedule> {
    if lambda0.is_nan() || lambda0 <= 0.0 {
        return Err(Error::NonpositiveAmplitude(lambda0));
    }
    let t0 = FRAC_PI_4 / lambda0;
    let middle = optimal_time_unconstrained(omega, gamma);
    ControlSchedule::new(
        omega,
        vec![
            ControlSegment {
                lambda_value: lambda0,
                duration: t0,
            },
            ControlSegment {
                lambda_value: 0.0,
                duration: middle,
            },
            ControlSegment {
                lambda_value: -lambda0,
                duration: t0,
            },
        ],
    )
}

/// Amplitude-constrained optimal schedule. For c > ω²/γ the structure is
/// bang-off-bang (+c, t1)(0, t2)(−c, t1); for c < ω²/γ it is bang-bang
/// (+c, t1)(−c, t1). Durations come from the numerical solver below; the
/// generated schedule is verified to land on `g(ω, +γ)` with infidelity
/// below 1e-9.
pub fn constrained_schedule(omega: f64, gamma: f64, c: f64) -> Result<ControlSchedule> {
    let spec_kind = if c > omega * omega / gamma {
        ProtocolKind::BangOffBang
    } else {
        ProtocolKind::BangBang
    };
    let spec = ProtocolSpec::constrained(spec_kind, omega, gamma, c);
    spec.validate()?;
    let psi0 = spec.initial_state()?;
    let target = spec.target_state()?;

    let schedule = match spec_kind {
        ProtocolKind::BangBang => solve_bang_bang(omega, gamma, c)?,
        ProtocolKind::BangOffBang => solve_bang_off_bang(omega, c, &psi0)?,
        ProtocolKind::CompositeUnconstrained => unreachable!(),
    };

    let reached = schedule.propagate_exact(&psi0);
    let infidelity = 1.0 - fidelity_overlap(&reached, &target);
    if infidelity > 1e-9 {
        return Err(Error::Unreachable(format!(
            "solved schedule misses the target, infidelity {infidelity:.3e}"
        )));
    }
    Ok(schedule)
}

/// Bang-bang solver.
///
/// Conjugating the second bang by a π rotation about x maps it onto the
/// first, which reduces the two-point reachability condition to a single
/// scalar equation: the switch must happen exactly when the first-bang
/// trajectory crosses the equator z = 0. On the precession cone about
/// n = (ω, 0, c)/E the z component is A + B cos(Ωt) + C sin(Ωt), solved in
/// closed form; the smallest positive root gives the optimal switch time.
fn solve_bang_bang(omega: f64, gamma: f64, c: f64) -> Result<ControlSchedule> {
    let energy = omega.hypot(c);
    let (nx, nz) = (omega / energy, c / energy);
    let r0 = ground_state(HamiltonianParams::new(omega, -gamma))?.bloch_vector();

    let r0_dot_n = r0.x * nx + r0.z * nz;
    // z(t) = (r0·n)nz + cos(Ωt)·(r0 − (r0·n)n)_z + sin(Ωt)·(n×r0)_z
    let a = r0_dot_n * nz;
    let b = r0.z - r0_dot_n * nz;
    let cpar = nx * r0.y; // (n×r0)_z; zero for ground states (r0.y = 0)
    let amp = b.hypot(cpar);
    if amp < a.abs() {
        return Err(Error::Unreachable(
            "precession cone never crosses the equator".into(),
        ));
    }
    // Solve a + amp·cos(Ωt − δ) = 0 with δ = atan2(C, B).
    let delta = cpar.atan2(b);
    let base = (-a / amp).clamp(-1.0, 1.0).acos();
    let big_omega = 2.0 * energy;
    let mut t1 = f64::INFINITY;
    for alpha in [delta + base, delta - base] {
        let mut alpha = alpha.rem_euclid(TAU);
        if alpha < 1e-15 {
            alpha += TAU;
        }
        t1 = t1.min(alpha / big_omega);
    }
    if !t1.is_finite() {
        return Err(Error::Unreachable(
            "no positive equator-crossing time".into(),
        ));
    }
    ControlSchedule::new(
        omega,
        vec![
            ControlSegment {
                lambda_value: c,
                duration: t1,
            },
            ControlSegment {
                lambda_value: -c,
                duration: t1,
            },
        ],
    )
}

/// Bang-off-bang solver.
///
/// The same π-rotation symmetry makes the target reachable for every bang
/// duration t1: after the first bang the state shares its x component with
/// the back-propagated target, so a λ = 0 rotation of some angle always
/// links them. The middle duration t2(t1) follows from the angle gap about
/// the x axis, and the total time 2·t1 + t2(t1) is minimized over t1 by a
/// coarse scan plus golden-section refinement.
fn solve_bang_off_bang(omega: f64, c: f64, psi0: &PureState) -> Result<ControlSchedule> {
    let energy = omega.hypot(c);
    let period = TAU / (2.0 * energy);
    let total = |t1: f64| bang_off_bang_total(omega, c, psi0, t1).0;

    // Coarse scan over one precession period of the bang.
    let n_scan = 400;
    let mut best_i: usize = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..=n_scan {
        let t1 = period * i as f64 / n_scan as f64;
        let v = total(t1);
        if v < best_val {
            best_val = v;
            best_i = i;
        }
    }
    let lo = period * best_i.saturating_sub(1) as f64 / n_scan as f64;
    let hi = period * (best_i + 1).min(n_scan) as f64 / n_scan as f64;
    let t1 = golden_section_min(total, lo, hi, 1e-14 * period.max(1.0));

    let (_, t2) = bang_off_bang_total(omega, c, psi0, t1);
    ControlSchedule::new(
        omega,
        vec![
            ControlSegment {
                lambda_value: c,
                duration: t1,
            },
            ControlSegment {
                lambda_value: 0.0,
                duration: t2,
            },
            ControlSegment {
                lambda_value: -c,
                duration: t1,
            },
        ],
    )
}

/// Total duration and middle-arc duration of the bang-off-bang schedule for
/// a given bang duration t1.
///
/// The angle about the x axis is parametrized so that λ = 0 evolution
/// advances it at rate 2ω (motion +z → −y): α = atan2(−y, z).
fn bang_off_bang_total(omega: f64, c: f64, psi0: &PureState, t1: f64) -> (f64, f64) {
    let r1 = crate::dynamics::propagate_constant(psi0, omega, c, t1).bloch_vector();
    // Back-propagated target = (x, y, −z) of the first-bang endpoint.
    let alpha1 = (-r1.y).atan2(r1.z);
    let alpha2 = (-r1.y).atan2(-r1.z);
    let t2 = (alpha2 - alpha1).rem_euclid(TAU) / (2.0 * omega);
    (2.0 * t1 + t2, t2)
}

fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::theta_of;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn optimal_time_values() {
        assert_abs_diff_eq!(optimal_time_unconstrained(1.0, 0.0), 0.0);
        assert_abs_diff_eq!(
            optimal_time_unconstrained(1.0, 2.0),
            2.0_f64.atan(),
            epsilon = 1e-15
        );
        // γ → ∞: half great circle at speed 2ω.
        assert_abs_diff_eq!(
            optimal_time_unconstrained(1.0, 1e12),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-11
        );
        // T = s(θ)/(2ω) identically.
        for &gamma in &[0.1, 0.7, 2.0, 9.0] {
            let theta = theta_of(1.0, gamma);
            assert_abs_diff_eq!(
                optimal_time_unconstrained(1.0, gamma),
                (std::f64::consts::PI - 2.0 * theta) / 2.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn composite_schedule_structure() {
        let s = composite_pulse_schedule(1.0, 2.0, 10.0).unwrap();
        assert_eq!(s.segments.len(), 3);
        assert_abs_diff_eq!(s.segments[0].lambda_value, 10.0);
        assert_abs_diff_eq!(s.segments[0].duration, PI / 40.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.segments[1].lambda_value, 0.0);
        assert_abs_diff_eq!(s.segments[1].duration, 2.0_f64.atan(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.segments[2].lambda_value, -10.0);
        assert_abs_diff_eq!(s.segments[2].duration, PI / 40.0, epsilon = 1e-15);
    }

    #[test]
    fn composite_zero_gamma_has_zero_middle() {
        let s = composite_pulse_schedule(1.0, 0.0, 25.0).unwrap();
        assert_abs_diff_eq!(s.segments[1].duration, 0.0);
    }

    #[test]
    fn composite_rejects_nonpositive_amplitude() {
        assert!(matches!(
            composite_pulse_schedule(1.0, 2.0, 0.0),
            Err(Error::NonpositiveAmplitude(_))
        ));
    }

    #[test]
    fn composite_converges_to_target_with_amplitude() {
        let spec_inf = |lambda0: f64| {
            let spec = ProtocolSpec::composite(1.0, 2.0, lambda0);
            let sched = spec.schedule().unwrap();
            let reached = sched.propagate_exact(&spec.initial_state().unwrap());
            1.0 - fidelity_overlap(&reached, &spec.target_state().unwrap())
        };
        let i3 = spec_inf(1e3);
        assert!(i3 <= 1e-4, "infidelity at λ0=1e3: {i3}");
        // Error shrinks with λ0 (second order in 1/λ0).
        assert!(spec_inf(1e4) < i3 / 10.0);
    }

    #[test]
    fn bang_off_bang_reaches_target() {
        // Fig. 4 parameters: c = 1.5 ω²/γ.
        let sched = constrained_schedule(1.0, 2.0, 0.75).unwrap();
        assert_eq!(sched.segments.len(), 3);
        assert_abs_diff_eq!(sched.segments[0].lambda_value, 0.75);
        assert_abs_diff_eq!(sched.segments[1].lambda_value, 0.0);
        assert_abs_diff_eq!(sched.segments[2].lambda_value, -0.75);
        assert_abs_diff_eq!(sched.segments[0].duration, sched.segments[2].duration);
        let psi0 = ground_state(HamiltonianParams::new(1.0, -2.0)).unwrap();
        let target = ground_state(HamiltonianParams::new(1.0, 2.0)).unwrap();
        let f = fidelity_overlap(&sched.propagate_exact(&psi0), &target);
        assert!(f >= 1.0 - 1e-9, "infidelity {}", 1.0 - f);
        // Constrained optimum is slower than the unconstrained one.
        assert!(sched.total_duration() > optimal_time_unconstrained(1.0, 2.0));
    }

    #[test]
    fn bang_bang_reaches_target() {
        // Fig. 4 parameters: c = 0.5 ω²/γ.
        let sched = constrained_schedule(1.0, 2.0, 0.25).unwrap();
        assert_eq!(sched.segments.len(), 2);
        assert_abs_diff_eq!(sched.segments[0].lambda_value, 0.25);
        assert_abs_diff_eq!(sched.segments[1].lambda_value, -0.25);
        assert_abs_diff_eq!(sched.segments[0].duration, sched.segments[1].duration);
        let psi0 = ground_state(HamiltonianParams::new(1.0, -2.0)).unwrap();
        let target = ground_state(HamiltonianParams::new(1.0, 2.0)).unwrap();
        let f = fidelity_overlap(&sched.propagate_exact(&psi0), &target);
        assert!(f >= 1.0 - 1e-9, "infidelity {}", 1.0 - f);
    }

    #[test]
    fn bang_off_bang_approaches_unconstrained_limit() {
        let sched = constrained_schedule(1.0, 2.0, 1e7).unwrap();
        let t_opt = optimal_time_unconstrained(1.0, 2.0);
        assert_abs_diff_eq!(sched.total_duration(), t_opt, epsilon = 1e-6);
    }

    #[test]
    fn constrained_durations_monotone_in_c() {
        let mut prev = f64::INFINITY;
        for &factor in &[0.2, 0.5, 0.9, 1.1, 1.5, 3.0, 10.0] {
            let c = factor * 1.0 / 2.0; // ω²/γ = 0.5 at ω=1, γ=2
            if (factor - 1.0_f64).abs() < 1e-12 {
                continue;
            }
            let sched = constrained_schedule(1.0, 2.0, c).unwrap();
            let t = sched.total_duration();
            assert!(t <= prev + 1e-9, "duration not monotone at c={c}: {t} > {prev}");
            prev = t;
        }
    }

    #[test]
    fn regime_split_is_enforced() {
        let boundary = 0.5; // ω²/γ at ω=1, γ=2
        assert!(ProtocolSpec::constrained(ProtocolKind::BangOffBang, 1.0, 2.0, boundary)
            .validate()
            .is_err());
        assert!(ProtocolSpec::constrained(ProtocolKind::BangOffBang, 1.0, 2.0, 0.25)
            .validate()
            .is_err());
        assert!(ProtocolSpec::constrained(ProtocolKind::BangBang, 1.0, 2.0, 0.75)
            .validate()
            .is_err());
        assert!(ProtocolSpec::constrained(ProtocolKind::BangBang, 1.0, 2.0, 0.25)
            .validate()
            .is_ok());
    }
}
