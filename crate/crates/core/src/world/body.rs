use serde::{Deserialize, Serialize};

use crate::dof::{Dof, DofVec};
use crate::{NavError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    /// Ground robot: `x`, `y`, `yaw`.
    Planar,
    /// Free flyer: all six DoFs.
    Spatial,
}

impl AgentKind {
    pub fn dofs(self) -> &'static [Dof] {
        match self {
            AgentKind::Planar => &[Dof::X, Dof::Y, Dof::Yaw],
            AgentKind::Spatial => &Dof::ALL,
        }
    }

    pub fn linear_dofs(self) -> &'static [Dof] {
        match self {
            AgentKind::Planar => &[Dof::X, Dof::Y],
            AgentKind::Spatial => &[Dof::X, Dof::Y, Dof::Z],
        }
    }

    pub fn is_planar(self) -> bool {
        self == AgentKind::Planar
    }

    /// Zero every component this kind does not actuate.
    pub fn mask(self, mut v: DofVec) -> DofVec {
        if self.is_planar() {
            v[Dof::Z] = 0.0;
            v[Dof::Roll] = 0.0;
            v[Dof::Pitch] = 0.0;
        }
        v
    }
}

/// Rigid body with diagonal generalized inertia.
///
/// The world-to-body transform `T` is the rotation by `yaw` about the vertical
/// axis acting on the `x`/`y` components; the other components pass through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentBody {
    pub kind: AgentKind,
    pub pose: DofVec,
    pub twist: DofVec,
    pub inertia: DofVec,
    pub accel_max: DofVec,
    pub vel_max: DofVec,
    pub wrench_max: DofVec,
    /// Physical footprint used by the penetration check.
    pub radius: f64,
}

impl AgentBody {
    pub fn new(kind: AgentKind, inertia: DofVec, accel_max: DofVec, vel_max: DofVec) -> Self {
        let wrench_max = inertia.zip(accel_max, |m, a| m * a);
        Self {
            kind,
            pose: DofVec::ZERO,
            twist: DofVec::ZERO,
            inertia: kind.mask(inertia).zip(DofVec::splat(1.0), |m, one| if m > 0.0 { m } else { one }),
            accel_max,
            vel_max,
            wrench_max,
            radius: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for &d in self.kind.dofs() {
            let checks = [
                ("inertia", self.inertia[d]),
                ("accel_max", self.accel_max[d]),
                ("vel_max", self.vel_max[d]),
                ("wrench_max", self.wrench_max[d]),
            ];
            for (field, v) in checks {
                if !(v.is_finite() && v > 0.0) {
                    return Err(NavError::invalid(format!("{field}.{d}"), format!("must be > 0, got {v}")));
                }
            }
        }
        if !self.pose.is_finite() || !self.twist.is_finite() {
            return Err(NavError::invalid("pose", "must be finite"));
        }
        Ok(())
    }

    pub fn position(&self) -> [f64; 3] {
        [self.pose[Dof::X], self.pose[Dof::Y], self.pose[Dof::Z]]
    }

    /// World-frame vector expressed in the body frame (`Tᵀ v`).
    pub fn to_body(&self, v: &DofVec) -> DofVec {
        rotate_xy(v, -self.pose[Dof::Yaw])
    }

    /// Body-frame vector expressed in the world frame (`T v`).
    pub fn to_world(&self, v: &DofVec) -> DofVec {
        rotate_xy(v, self.pose[Dof::Yaw])
    }

    /// Clip a body-frame wrench to the actuator limits. The planar force pair
    /// is clipped on the limit ellipse so its direction is kept.
    pub fn saturate(&self, w_body: &DofVec) -> DofVec {
        let mut out = *w_body;
        let (fx, fy) = (self.wrench_max[Dof::X], self.wrench_max[Dof::Y]);
        let r = ((out[Dof::X] / fx).powi(2) + (out[Dof::Y] / fy).powi(2)).sqrt();
        if r > 1.0 {
            out[Dof::X] /= r;
            out[Dof::Y] /= r;
        }
        for d in [Dof::Z, Dof::Roll, Dof::Pitch, Dof::Yaw] {
            let lim = self.wrench_max[d];
            out[d] = out[d].clamp(-lim, lim);
        }
        self.kind.mask(out)
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.kind
            .dofs()
            .iter()
            .map(|&d| 0.5 * self.inertia[d] * self.twist[d] * self.twist[d])
            .sum()
    }
}

/// Rotate the `x`/`y` components of `v` by `angle`.
pub fn rotate_xy(v: &DofVec, angle: f64) -> DofVec {
    let (s, c) = angle.sin_cos();
    let mut out = *v;
    out[Dof::X] = c * v[Dof::X] - s * v[Dof::Y];
    out[Dof::Y] = s * v[Dof::X] + c * v[Dof::Y];
    out
}

/// Generalized acceleration `T·M⁻¹·(W − W_ext)` for body-frame wrenches.
pub fn agent_accel(body: &AgentBody, w: &DofVec, w_ext: &DofVec) -> DofVec {
    let net = (*w - *w_ext).zip(body.inertia, |f, m| f / m);
    body.kind.mask(body.to_world(&net))
}
