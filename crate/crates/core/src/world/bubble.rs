use serde::{Deserialize, Serialize};

use super::body::AgentBody;
use super::geometry::{norm, sub, Point3};
use crate::dof::{Dof, DofVec};
use crate::fic::profile_energy;
use crate::tracker::{roa_force, RoaProfileParams};
use crate::{NavError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BubbleShape {
    /// Circle (planar) or sphere (spatial) of radius `d0`.
    Circle { radius: f64 },
    /// Body-frame rectangle with half extents `[hx, hy]`.
    Rect { half: [f64; 2] },
}

/// Repulsive field around an agent. The force magnitude is the
/// region-of-attraction profile evaluated at the penetration depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bubble {
    pub shape: BubbleShape,
    pub repulsion: RoaProfileParams,
}

/// One repulsive contribution in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    /// Unit vector pointing away from the entity.
    pub direction: Point3,
    pub penetration: f64,
    pub magnitude: f64,
}

impl Bubble {
    pub fn validate(&self) -> Result<()> {
        match self.shape {
            BubbleShape::Circle { radius } if !(radius > 0.0 && radius.is_finite()) => {
                return Err(NavError::invalid("bubble.radius", format!("must be > 0, got {radius}")))
            }
            BubbleShape::Rect { half } if !half.iter().all(|h| *h > 0.0 && h.is_finite()) => {
                return Err(NavError::invalid("bubble.half", "half extents must be > 0"))
            }
            _ => {}
        }
        crate::tracker::validate_params(&self.repulsion).map_err(|e| match e {
            NavError::InvalidParam { field, reason } => NavError::invalid(format!("bubble.repulsion.{field}"), reason),
            other => other,
        })?;
        Ok(())
    }

    /// Largest distance at which the field acts.
    pub fn reach(&self) -> f64 {
        match self.shape {
            BubbleShape::Circle { radius } => radius,
            BubbleShape::Rect { half } => (half[0] * half[0] + half[1] * half[1]).sqrt(),
        }
    }

    /// Repulsion from an entity whose closest point to the agent is `near`.
    /// `fallback` is used when the point coincides with the agent centre.
    pub fn contact(&self, body: &AgentBody, near: Point3, fallback: Point3) -> Option<Contact> {
        let planar = body.kind.is_planar();
        let mut center = body.position();
        let mut near = near;
        if planar {
            center[2] = 0.0;
            near[2] = 0.0;
        }
        let away = sub(center, near);
        let (penetration, direction) = match self.shape {
            BubbleShape::Circle { radius } => {
                let d = norm(away);
                if d >= radius {
                    return None;
                }
                let dir = if d > 0.0 {
                    [away[0] / d, away[1] / d, away[2] / d]
                } else {
                    fallback
                };
                (radius - d, dir)
            }
            BubbleShape::Rect { half } => {
                let yaw = body.pose[Dof::Yaw];
                let (s, c) = yaw.sin_cos();
                // obstacle point in the body frame
                let rx = -(c * away[0] + s * away[1]);
                let ry = -(-s * away[0] + c * away[1]);
                let px = half[0] - rx.abs();
                let py = half[1] - ry.abs();
                if px <= 0.0 || py <= 0.0 || (!planar && away[2].abs() >= half[0].min(half[1])) {
                    return None;
                }
                let (pen, body_dir) = if px <= py {
                    (px, [-signum_or(rx, fallback_axis(fallback, c, s, 0)), 0.0])
                } else {
                    (py, [0.0, -signum_or(ry, fallback_axis(fallback, c, s, 1))])
                };
                let dir = [c * body_dir[0] - s * body_dir[1], s * body_dir[0] + c * body_dir[1], 0.0];
                (pen, dir)
            }
        };
        Some(Contact {
            direction,
            penetration,
            magnitude: roa_force(&self.repulsion, penetration),
        })
    }

    /// Potential stored by a contact at the given penetration.
    pub fn potential(&self, penetration: f64) -> f64 {
        profile_energy(&self.repulsion, penetration)
    }
}

fn signum_or(v: f64, fallback: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        fallback
    }
}

/// Sign of the fallback direction along body axis `axis`, expressed so the
/// caller's `-signum` points the same way.
fn fallback_axis(fallback: Point3, c: f64, s: f64, axis: usize) -> f64 {
    let along = if axis == 0 {
        c * fallback[0] + s * fallback[1]
    } else {
        -s * fallback[0] + c * fallback[1]
    };
    if along >= 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// External wrench `W_ext` from all entities whose closest points are given.
///
/// `W_ext` carries the toward-obstacle sign so that `W − W_ext` repels. The
/// returned direction is the last non-zero repulsion direction seen, for use
/// as the next fallback.
pub fn bubble_wrench(
    bubble: &Bubble,
    body: &AgentBody,
    near_points: impl IntoIterator<Item = Point3>,
    fallback: Point3,
) -> (DofVec, Point3) {
    let mut w_ext = DofVec::ZERO;
    let mut last = fallback;
    for near in near_points {
        if let Some(c) = bubble.contact(body, near, fallback) {
            w_ext[Dof::X] -= c.magnitude * c.direction[0];
            w_ext[Dof::Y] -= c.magnitude * c.direction[1];
            w_ext[Dof::Z] -= c.magnitude * c.direction[2];
            if c.magnitude > 0.0 {
                last = c.direction;
            }
        }
    }
    (body.kind.mask(w_ext), last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::body::AgentKind;
    use approx::assert_relative_eq;

    fn body() -> AgentBody {
        AgentBody::new(
            AgentKind::Planar,
            DofVec::splat(1.0),
            DofVec::splat(1.0),
            DofVec::splat(1.0),
        )
    }

    fn circle(d0: f64) -> Bubble {
        Bubble {
            shape: BubbleShape::Circle { radius: d0 },
            repulsion: RoaProfileParams::new(100.0, 0.1, 0.3, 50.0),
        }
    }

    const PLUS_X: Point3 = [1.0, 0.0, 0.0];

    #[test]
    fn outside_field_is_zero() {
        let (w, _) = bubble_wrench(&circle(1.5), &body(), [[2.0, 0.0, 0.0]], PLUS_X);
        assert_eq!(w, DofVec::ZERO);
    }

    #[test]
    fn coincident_point_saturates_along_fallback() {
        let (w, _) = bubble_wrench(&circle(1.5), &body(), [[0.0, 0.0, 0.0]], PLUS_X);
        // repulsion along +x, so W_ext points along -x
        assert_relative_eq!(w[Dof::X], -50.0);
        assert_eq!(w[Dof::Y], 0.0);
    }

    #[test]
    fn mid_branch_magnitude() {
        // obstacle at distance d0 - 0.2 along +y
        let (w, dir) = bubble_wrench(&circle(1.5), &body(), [[0.0, 1.3, 0.0]], PLUS_X);
        let expected = 40.0 * (1.0 - (-10.0_f64).exp()) + 10.0;
        assert_relative_eq!(w[Dof::Y], expected, max_relative = 1e-12);
        assert_relative_eq!(w[Dof::X], 0.0);
        assert_relative_eq!(dir[1], -1.0);
    }

    #[test]
    fn contributions_sum() {
        let (w, _) = bubble_wrench(&circle(1.5), &body(), [[0.0, 1.3, 0.0], [0.0, -1.3, 0.0]], PLUS_X);
        assert_relative_eq!(w[Dof::Y], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rectangle_pushes_along_shallowest_axis() {
        let b = Bubble {
            shape: BubbleShape::Rect { half: [1.0, 0.5] },
            repulsion: RoaProfileParams::new(100.0, 0.1, 0.3, 50.0),
        };
        // obstacle ahead at x = 0.95: penetration 0.05 along x, 0.5 along y
        let c = b.contact(&body(), [0.95, 0.0, 0.0], PLUS_X).unwrap();
        assert_relative_eq!(c.penetration, 0.05, epsilon = 1e-12);
        assert_relative_eq!(c.direction[0], -1.0);
        assert_relative_eq!(c.magnitude, 5.0, epsilon = 1e-9);
        assert!(b.contact(&body(), [1.2, 0.0, 0.0], PLUS_X).is_none());
    }

    #[test]
    fn validation_names_radius() {
        let mut b = circle(1.5);
        b.shape = BubbleShape::Circle { radius: -1.0 };
        let e = b.validate().unwrap_err();
        assert!(e.to_string().contains("bubble.radius"));
    }
}
