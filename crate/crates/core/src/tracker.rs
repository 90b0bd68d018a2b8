//! Region-of-attraction tracker.
//!
//! Each DoF runs a [`FicChannel`] whose divergence branch is the three-zone
//! profile below: linear up to `x0`, an exponential approach to the
//! saturation force between `x0` and `xb`, and constant `f_max` beyond.
//!
//! ```text
//! |x| <  x0         F = k0·x
//! x0 <= |x| < xb    F = sgn(x)·(ΔF·(1 - exp(-(|x| - x0)/b)) + k0·x0)
//! |x| >= xb         F = sgn(x)·f_max
//! ΔF = f_max - k0·x0,  b = (xb - x0)/20
//! ```

use serde::{Deserialize, Serialize};

use crate::dof::{dof_diff, Dof, DofVec};
use crate::fic::{FicChannel, ForceProfile};
use crate::{NavError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoaProfileParams {
    pub k0: f64,
    pub x0: f64,
    pub xb: f64,
    pub f_max: f64,
}

impl RoaProfileParams {
    pub fn new(k0: f64, x0: f64, xb: f64, f_max: f64) -> Self {
        Self { k0, x0, xb, f_max }
    }

    pub fn delta_f(&self) -> f64 {
        self.f_max - self.k0 * self.x0
    }

    /// Decay length of the exponential zone.
    pub fn b(&self) -> f64 {
        (self.xb - self.x0) / 20.0
    }

    pub fn force(&self, err: f64) -> f64 {
        roa_force(self, err)
    }
}

impl ForceProfile for RoaProfileParams {
    fn evaluate(&self, err: f64) -> f64 {
        roa_force(self, err)
    }

    fn saturation(&self) -> f64 {
        self.f_max
    }
}

pub fn roa_force(p: &RoaProfileParams, err: f64) -> f64 {
    let mag = err.abs();
    let sign = if err < 0.0 { -1.0 } else { 1.0 };
    if mag < p.x0 {
        p.k0 * err
    } else if mag < p.xb {
        sign * (p.delta_f() * (1.0 - (-(mag - p.x0) / p.b()).exp()) + p.k0 * p.x0)
    } else {
        sign * p.f_max
    }
}

/// Diagnostics produced by [`validate_params`] for a valid profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileReport {
    /// `|F(x0⁻) - F(x0⁺)|`.
    pub continuity_residual: f64,
    /// Force just below `xb`, as a fraction of `f_max`.
    pub saturation_fraction: f64,
}

/// Checks the profile invariants and reports continuity at `x0` and how close
/// the exponential zone gets to `f_max` before `xb`.
pub fn validate_params(p: &RoaProfileParams) -> Result<ProfileReport> {
    for (field, v) in [("k0", p.k0), ("x0", p.x0), ("xb", p.xb), ("f_max", p.f_max)] {
        if !v.is_finite() {
            return Err(NavError::invalid(field, format!("must be finite, got {v}")));
        }
    }
    if p.k0 <= 0.0 {
        return Err(NavError::invalid("k0", format!("stiffness must be > 0, got {}", p.k0)));
    }
    if p.x0 <= 0.0 {
        return Err(NavError::invalid("x0", format!("linear zone edge must be > 0, got {}", p.x0)));
    }
    if p.xb <= p.x0 {
        return Err(NavError::invalid(
            "xb",
            format!("degenerate nonlinear zone: xb ({}) must exceed x0 ({})", p.xb, p.x0),
        ));
    }
    if p.delta_f() < 0.0 {
        return Err(NavError::invalid(
            "f_max",
            format!(
                "delta_f negative: f_max ({}) < k0·x0 ({})",
                p.f_max,
                p.k0 * p.x0
            ),
        ));
    }
    let inner = p.k0 * p.x0;
    let outer = p.delta_f() * (1.0 - (-(0.0_f64) / p.b()).exp()) + p.k0 * p.x0;
    let just_below = p.delta_f() * (1.0 - (-(p.xb - p.x0) / p.b()).exp()) + p.k0 * p.x0;
    Ok(ProfileReport {
        continuity_residual: (inner - outer).abs(),
        saturation_fraction: if p.f_max > 0.0 { just_below / p.f_max } else { 1.0 },
    })
}

/// One tracker DoF: its profile and phase memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerAxis {
    pub dof: Dof,
    pub profile: RoaProfileParams,
    pub channel: FicChannel,
}

/// Per-agent tracker over the active DoFs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    pub axes: Vec<TrackerAxis>,
}

impl TrackerState {
    pub fn new(profiles: &[(Dof, RoaProfileParams)]) -> Self {
        Self {
            axes: profiles
                .iter()
                .map(|(dof, profile)| TrackerAxis {
                    dof: *dof,
                    profile: *profile,
                    channel: FicChannel::default(),
                })
                .collect(),
        }
    }

    /// Control wrench pulling `x` toward `x_d`, updating the phase memory.
    pub fn track_wrench(&mut self, x_d: &DofVec, x: &DofVec) -> Result<DofVec> {
        let mut wrench = DofVec::ZERO;
        for axis in &mut self.axes {
            let err = dof_diff(axis.dof, x_d[axis.dof], x[axis.dof]);
            axis.channel = axis.channel.update_phase(err)?;
            wrench[axis.dof] = axis.channel.force(&axis.profile, err);
        }
        Ok(wrench)
    }

    /// Control wrench with the phase memory left untouched. Used between
    /// feedback samples, where the error sequence seen by the phase detector
    /// would otherwise be a sawtooth of the hold rather than the motion.
    pub fn hold_wrench(&self, x_d: &DofVec, x: &DofVec) -> DofVec {
        let mut wrench = DofVec::ZERO;
        for axis in &self.axes {
            let err = dof_diff(axis.dof, x_d[axis.dof], x[axis.dof]);
            wrench[axis.dof] = axis.channel.force(&axis.profile, err);
        }
        wrench
    }

    /// Same as [`track_wrench`](Self::track_wrench) for poses given as slices
    /// ordered like the active DoFs.
    pub fn track_wrench_slices(&mut self, x_d: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let n = self.axes.len();
        for got in [x_d.len(), x.len()] {
            if got != n {
                return Err(NavError::DimensionMismatch { expected: n, got });
            }
        }
        let mut xd = DofVec::ZERO;
        let mut xv = DofVec::ZERO;
        for (i, axis) in self.axes.iter().enumerate() {
            xd[axis.dof] = x_d[i];
            xv[axis.dof] = x[i];
        }
        let w = self.track_wrench(&xd, &xv)?;
        Ok(self.axes.iter().map(|a| w[a.dof]).collect())
    }

    /// Energy stored across all channels at errors `x_d − x`, with the phase
    /// memory advanced to those errors (without committing the update).
    pub fn stored_energy(&self, x_d: &DofVec, x: &DofVec) -> f64 {
        self.axes
            .iter()
            .map(|a| {
                let err = dof_diff(a.dof, x_d[a.dof], x[a.dof]);
                let ch = a.channel.update_phase(err).unwrap_or(a.channel);
                ch.stored_energy(&a.profile, err)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> RoaProfileParams {
        RoaProfileParams::new(100.0, 0.1, 0.3, 50.0)
    }

    #[test]
    fn profile_examples() {
        let p = reference();
        assert_relative_eq!(roa_force(&p, 0.05), 5.0);
        // 40·(1 - e^-10) + 10
        let expected = 40.0 * (1.0 - (-10.0_f64).exp()) + 10.0;
        assert_relative_eq!(roa_force(&p, 0.2), expected, max_relative = 1e-15);
        assert_relative_eq!(roa_force(&p, 0.2), 49.9982, epsilon = 1e-4);
        assert_eq!(roa_force(&p, 0.5), 50.0);
        assert_eq!(roa_force(&p, -0.5), -50.0);
    }

    #[test]
    fn derived_quantities() {
        let p = reference();
        assert_relative_eq!(p.delta_f(), 40.0);
        assert_relative_eq!(p.b(), 0.01);
    }

    #[test]
    fn validation_report() {
        let r = validate_params(&reference()).unwrap();
        assert!(r.continuity_residual < 1e-12);
        assert!(r.saturation_fraction >= 0.999);
        assert!(r.saturation_fraction < 1.0);
    }

    #[test]
    fn validation_errors_name_the_field() {
        let e = validate_params(&RoaProfileParams::new(100.0, 0.1, 0.3, 5.0)).unwrap_err();
        assert!(matches!(e, NavError::InvalidParam { ref field, ref reason } if field == "f_max" && reason.contains("delta_f")));
        let e = validate_params(&RoaProfileParams::new(100.0, 0.1, 0.1, 50.0)).unwrap_err();
        assert!(matches!(e, NavError::InvalidParam { ref field, .. } if field == "xb"));
        let e = validate_params(&RoaProfileParams::new(-1.0, 0.1, 0.3, 50.0)).unwrap_err();
        assert!(matches!(e, NavError::InvalidParam { ref field, .. } if field == "k0"));
    }

    fn planar() -> TrackerState {
        let p = reference();
        TrackerState::new(&[(Dof::X, p), (Dof::Y, p), (Dof::Yaw, p)])
    }

    #[test]
    fn zero_error_zero_wrench() {
        let mut t = planar();
        let pose = DofVec([1.0, 2.0, 0.0, 0.0, 0.0, 0.3]);
        assert_eq!(t.track_wrench(&pose, &pose).unwrap(), DofVec::ZERO);
    }

    #[test]
    fn single_axis_linear_branch() {
        let mut t = planar();
        let xd = DofVec([0.05, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let w = t.track_wrench(&xd, &DofVec::ZERO).unwrap();
        assert_relative_eq!(w[Dof::X], 5.0);
        assert_eq!(w[Dof::Y], 0.0);
        assert_eq!(w[Dof::Yaw], 0.0);
    }

    #[test]
    fn independent_saturation() {
        let mut t = TrackerState::new(&[
            (Dof::X, RoaProfileParams::new(100.0, 0.1, 0.3, 50.0)),
            (Dof::Y, RoaProfileParams::new(10.0, 0.2, 0.5, 7.0)),
            (Dof::Yaw, RoaProfileParams::new(5.0, 0.1, 0.4, 2.0)),
        ]);
        let xd = DofVec([5.0, -5.0, 0.0, 0.0, 0.0, 1.5]);
        let w = t.track_wrench(&xd, &DofVec::ZERO).unwrap();
        assert_eq!(w[Dof::X], 50.0);
        assert_eq!(w[Dof::Y], -7.0);
        assert_eq!(w[Dof::Yaw], 2.0);
    }

    #[test]
    fn slice_dimension_checked() {
        let mut t = planar();
        assert!(matches!(
            t.track_wrench_slices(&[0.0, 0.0], &[0.0, 0.0, 0.0]),
            Err(NavError::DimensionMismatch { expected: 3, got: 2 })
        ));
        let w = t.track_wrench_slices(&[0.05, 0.0, 0.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(w[0], 5.0);
    }
}
