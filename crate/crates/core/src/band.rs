//! Elastic band planner.
//!
//! The band pulls the desired state `x_d` toward the active via-point with a
//! spring saturated at `M_d·a_max`, then integrates the resulting acceleration
//! twice with the velocity clipped at `v_max` before the second integrator.
//! In [`BandMode::Fractal`] the spring is routed through a [`FicChannel`], so
//! each move is a half-period harmonic arc that stops on the via-point.

use serde::{Deserialize, Serialize};

use crate::dof::{dof_diff, wrap_angle, Dof, DofVec};
use crate::fic::{FicChannel, FicPhase, ForceProfile, SaturatedSpring, ZERO_TOL};
use crate::{NavError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandMode {
    /// Saturated spring straight into the integrators (undamped).
    PlainSpring,
    /// Saturated spring wrapped in the divergence/convergence machinery.
    #[default]
    Fractal,
}

/// Per-DoF band parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandParams {
    pub stiffness: f64,
    /// Apparent inertia `M_d`.
    pub mass: f64,
    pub accel_max: f64,
    pub vel_max: f64,
}

impl BandParams {
    pub fn new(stiffness: f64, mass: f64, accel_max: f64, vel_max: f64) -> Self {
        Self {
            stiffness,
            mass,
            accel_max,
            vel_max,
        }
    }

    /// Saturation force `F_M = M_d·a_max`.
    pub fn force_limit(&self) -> f64 {
        self.mass * self.accel_max
    }

    pub fn profile(&self) -> SaturatedSpring {
        SaturatedSpring::new(self.stiffness, self.force_limit())
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("stiffness", self.stiffness),
            ("mass", self.mass),
            ("accel_max", self.accel_max),
            ("vel_max", self.vel_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(NavError::invalid(format!("band.{field}"), format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Saturated band force pulling `x_d` toward `x_vp`.
pub fn band_force(params: &BandParams, x_vp: f64, x_d: f64, angular: bool) -> f64 {
    let err = if angular { wrap_angle(x_vp - x_d) } else { x_vp - x_d };
    params.profile().evaluate(err)
}

/// Integrator state of one band DoF.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BandState {
    pub x_d: f64,
    pub v_d: f64,
    /// Acceleration applied on the last step.
    pub a_d: f64,
    pub channel: FicChannel,
}

impl BandState {
    pub fn at_rest(x_d: f64) -> Self {
        Self {
            x_d,
            ..Default::default()
        }
    }
}

/// One fixed step of the band: force, acceleration, clipped velocity, position.
pub fn band_step(
    state: &BandState,
    params: &BandParams,
    mode: BandMode,
    x_vp: f64,
    dt: f64,
    angular: bool,
) -> Result<BandState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(NavError::invalid("dt", format!("must be > 0, got {dt}")));
    }
    if !x_vp.is_finite() {
        return Err(NavError::NonFinite {
            what: "via-point",
            value: x_vp,
        });
    }
    let err = if angular {
        wrap_angle(x_vp - state.x_d)
    } else {
        x_vp - state.x_d
    };
    let profile = params.profile();
    let (force, channel) = match mode {
        BandMode::PlainSpring => (profile.evaluate(err), state.channel),
        BandMode::Fractal => {
            let mut ch = state.channel.update_phase(err)?;
            let approach = state.v_d * err.signum();
            if approach > 0.0 && err.abs() > ZERO_TOL {
                // Moving toward the target: converge along the orbit through
                // the current state, so the arc lands on x_vp at rest even
                // when the via-point changed mid-flight.
                ch.phase = FicPhase::Convergence;
                ch.peak_sign = err.signum();
                match orbit_apex(&profile, params.mass, err.abs(), approach) {
                    Some(apex) => ch.x_max = apex,
                    None => {
                        // too fast to stop in time: brake as hard as allowed
                        ch.x_max = err.abs();
                        return finish(state, params, -err.signum() * params.force_limit(), dt, angular, ch);
                    }
                }
            }
            (ch.force(&profile, err), ch)
        }
    };
    finish(state, params, force, dt, angular, channel)
}

fn finish(
    state: &BandState,
    params: &BandParams,
    force: f64,
    dt: f64,
    angular: bool,
    channel: FicChannel,
) -> Result<BandState> {
    let limit = params.force_limit();
    let accel = force.clamp(-limit, limit) / params.mass;
    let v_d = (state.v_d + accel * dt).clamp(-params.vel_max, params.vel_max);
    let mut x_d = state.x_d + v_d * dt;
    if angular {
        x_d = wrap_angle(x_d);
    }
    Ok(BandState {
        x_d,
        v_d,
        a_d: (v_d - state.v_d) / dt,
        channel,
    })
}

/// Peak `x_M` of the convergence orbit through error `e` with approach speed
/// `v`: the displacement at which `½·M·v² = F(x_M)/x_M · e·(x_M − e)`.
/// `None` when even the saturated spring cannot stop within `e`.
pub fn orbit_apex(spring: &SaturatedSpring, mass: f64, e: f64, v: f64) -> Option<f64> {
    let kinetic = 0.5 * mass * v * v;
    let linear = e + kinetic / (spring.stiffness * e);
    if spring.stiffness * linear <= spring.limit {
        return Some(linear);
    }
    let margin = spring.limit * e - kinetic;
    if margin <= 0.0 {
        return None;
    }
    Some(spring.limit * e * e / margin)
}

/// Band planner over the active DoFs of one agent.
#[derive(Debug, Clone)]
pub struct BandPlanner {
    pub mode: BandMode,
    axes: Vec<(Dof, BandParams, BandState)>,
}

impl BandPlanner {
    pub fn new(mode: BandMode, start: &DofVec, params: &[(Dof, BandParams)]) -> Self {
        let axes = params
            .iter()
            .map(|(d, p)| (*d, *p, BandState::at_rest(start[*d])))
            .collect();
        Self { mode, axes }
    }

    pub fn step(&mut self, x_vp: &DofVec, dt: f64) -> Result<()> {
        for (dof, params, state) in &mut self.axes {
            *state = band_step(state, params, self.mode, x_vp[*dof], dt, dof.is_angular())?;
        }
        Ok(())
    }

    pub fn desired(&self) -> DofVec {
        self.collect(|s| s.x_d)
    }

    pub fn velocity(&self) -> DofVec {
        self.collect(|s| s.v_d)
    }

    pub fn acceleration(&self) -> DofVec {
        self.collect(|s| s.a_d)
    }

    pub fn axes(&self) -> impl Iterator<Item = (Dof, &BandParams, &BandState)> {
        self.axes.iter().map(|(d, p, s)| (*d, p, s))
    }

    /// Band error `x_vp - x_d` per DoF.
    pub fn error(&self, x_vp: &DofVec) -> DofVec {
        let mut out = DofVec::ZERO;
        for (d, _, s) in &self.axes {
            out[*d] = dof_diff(*d, x_vp[*d], s.x_d);
        }
        out
    }

    fn collect(&self, f: impl Fn(&BandState) -> f64) -> DofVec {
        let mut out = DofVec::ZERO;
        for (d, _, s) in &self.axes {
            out[*d] = f(s);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params() -> BandParams {
        BandParams::new(50.0, 100.0, 0.5, 1.0)
    }

    #[test]
    fn force_examples() {
        let p = params();
        assert_relative_eq!(band_force(&p, 0.1, 0.0, false), 5.0);
        assert_relative_eq!(band_force(&p, 10.0, 0.0, false), 50.0);
        assert_relative_eq!(band_force(&p, -10.0, 0.0, false), -50.0);
        let f = band_force(&p, PI - 0.05, -PI + 0.05, true);
        assert_relative_eq!(f, 50.0 * -0.1, epsilon = 1e-9);
    }

    #[test]
    fn fixed_point_is_unchanged() {
        for mode in [BandMode::PlainSpring, BandMode::Fractal] {
            let s = BandState::at_rest(2.0);
            let n = band_step(&s, &params(), mode, 2.0, 1e-3, false).unwrap();
            assert_eq!(n.x_d, 2.0);
            assert_eq!(n.v_d, 0.0);
        }
    }

    #[test]
    fn rejects_bad_dt() {
        let s = BandState::default();
        assert!(band_step(&s, &params(), BandMode::PlainSpring, 1.0, 0.0, false).is_err());
        assert!(band_step(&s, &params(), BandMode::PlainSpring, 1.0, -1e-3, false).is_err());
    }

    #[test]
    fn constant_error_ramp_reaches_vmax_in_two_seconds() {
        // a = 50 / 100 = 0.5 m/s², v_max = 1 -> v(2 s) = 1
        let p = params();
        let mut s = BandState::default();
        for _ in 0..2000 {
            let target = s.x_d + 10.0;
            s = band_step(&s, &p, BandMode::PlainSpring, target, 1e-3, false).unwrap();
        }
        assert_relative_eq!(s.v_d, 1.0, epsilon = 1e-9);
        for _ in 0..500 {
            let target = s.x_d + 10.0;
            s = band_step(&s, &p, BandMode::PlainSpring, target, 1e-3, false).unwrap();
            assert_eq!(s.v_d, 1.0);
        }
    }

    #[test]
    fn fractal_long_move_plateaus_at_vmax() {
        let p = params();
        let mut s = BandState::default();
        let mut at_max = 0;
        for _ in 0..200_000 {
            s = band_step(&s, &p, BandMode::Fractal, 100.0, 1e-3, false).unwrap();
            assert!(s.v_d.abs() <= p.vel_max);
            assert!(s.a_d.abs() <= p.accel_max * (1.0 + 1e-9));
            at_max += usize::from(s.v_d == p.vel_max);
        }
        assert!(at_max > 50_000);
        assert!((s.x_d - 100.0).abs() < 1e-3, "x_d = {}", s.x_d);
    }

    #[test]
    fn fractal_lands_after_mid_flight_switch() {
        let p = BandParams::new(10.0, 100.0, 0.5, 1.0);
        let mut s = BandState::default();
        for _ in 0..5000 {
            s = band_step(&s, &p, BandMode::Fractal, 3.0, 1e-3, false).unwrap();
        }
        assert!(s.v_d > 0.3);
        let mut furthest: f64 = 0.0;
        for _ in 0..40_000 {
            s = band_step(&s, &p, BandMode::Fractal, 4.0, 1e-3, false).unwrap();
            furthest = furthest.max(s.x_d);
        }
        assert!(furthest < 4.0 + 1e-3, "overshoot to {furthest}");
        assert!((s.x_d - 4.0).abs() < 1e-3);
    }

    #[test]
    fn apex_of_rest_state_is_the_error() {
        let spring = SaturatedSpring::new(10.0, 50.0);
        assert_relative_eq!(orbit_apex(&spring, 100.0, 2.0, 0.0).unwrap(), 2.0);
        // omega² = 2K/M = 0.2; apex = e + v²/(omega²·e)
        assert_relative_eq!(orbit_apex(&spring, 100.0, 1.0, 0.4).unwrap(), 1.8);
        assert!(orbit_apex(&spring, 100.0, 0.1, 5.0).is_none());
    }

    #[test]
    fn fractal_move_stops_on_target() {
        let p = BandParams::new(10.0, 100.0, 0.5, 5.0);
        let mut s = BandState::default();
        let mut peak_v: f64 = 0.0;
        for _ in 0..20_000 {
            s = band_step(&s, &p, BandMode::Fractal, 2.0, 1e-3, false).unwrap();
            peak_v = peak_v.max(s.v_d.abs());
        }
        assert!((s.x_d - 2.0).abs() < 1e-4, "x_d = {}", s.x_d);
        assert!(s.v_d.abs() < 1e-4);
        // harmonic arc: omega = sqrt(2K/M), peak = omega * D / 2
        let omega = (2.0 * 10.0 / 100.0_f64).sqrt();
        assert_relative_eq!(peak_v, omega, max_relative = 1e-2);
    }

    #[test]
    fn angular_band_takes_short_way_round() {
        let p = BandParams::new(5.0, 20.0, 0.9, 1.0);
        let mut s = BandState::at_rest(PI - 0.1);
        for _ in 0..20_000 {
            s = band_step(&s, &p, BandMode::Fractal, -PI + 0.1, 1e-3, true).unwrap();
            assert!(s.x_d > -PI && s.x_d <= PI);
        }
        assert!(wrap_angle(s.x_d - (-PI + 0.1)).abs() < 1e-4);
    }
}
