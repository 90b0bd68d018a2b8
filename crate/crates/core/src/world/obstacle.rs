use serde::{Deserialize, Serialize};

use super::geometry::{Point3, Shape};
use crate::{NavError, Result};

/// Time-parameterized translation of an obstacle. Each track point is
/// `[t, dx, dy, dz]`; offsets are interpolated linearly and held at both ends.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Track {
    pub points: Vec<[f64; 4]>,
}

impl Track {
    pub fn offset(&self, t: f64) -> Point3 {
        let pts = &self.points;
        match pts.len() {
            0 => [0.0; 3],
            _ if t <= pts[0][0] => [pts[0][1], pts[0][2], pts[0][3]],
            n if t >= pts[n - 1][0] => [pts[n - 1][1], pts[n - 1][2], pts[n - 1][3]],
            _ => {
                let i = pts.partition_point(|p| p[0] <= t) - 1;
                let (a, b) = (pts[i], pts[i + 1]);
                let s = (t - a[0]) / (b[0] - a[0]);
                [
                    a[1] + s * (b[1] - a[1]),
                    a[2] + s * (b[2] - a[2]),
                    a[3] + s * (b[3] - a[3]),
                ]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.points.windows(2) {
            if !(w[1][0] > w[0][0]) {
                return Err(NavError::invalid(
                    "track.points",
                    format!("times must be strictly increasing ({} then {})", w[0][0], w[1][0]),
                ));
            }
        }
        if self.points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(NavError::invalid("track.points", "non-finite entry"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub id: String,
    pub shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track: Option<Track>,
    /// `[from, until]` window during which the obstacle exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active: Option<[f64; 2]>,
}

impl Obstacle {
    pub fn fixed(id: impl Into<String>, shape: Shape) -> Self {
        Self {
            id: id.into(),
            shape,
            track: None,
            active: None,
        }
    }

    pub fn is_active(&self, t: f64) -> bool {
        match self.active {
            Some([from, until]) => t >= from && t < until,
            None => true,
        }
    }

    pub fn offset(&self, t: f64) -> Point3 {
        self.track.as_ref().map_or([0.0; 3], |tr| tr.offset(t))
    }

    /// Closest point to `p` at time `t`, or `None` while inactive.
    pub fn closest_point(&self, p: Point3, t: f64, planar: bool) -> Option<Point3> {
        if !self.is_active(t) {
            return None;
        }
        Some(self.shape.closest_point(p, self.offset(t), planar))
    }

    pub fn distance(&self, p: Point3, t: f64, planar: bool) -> Option<f64> {
        if !self.is_active(t) {
            return None;
        }
        Some(self.shape.distance(p, self.offset(t), planar))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(tr) = &self.track {
            tr.validate()?;
        }
        if let Some([from, until]) = self.active {
            if !(until > from) {
                return Err(NavError::invalid("active", format!("window [{from}, {until}] is empty")));
            }
        }
        match &self.shape {
            Shape::Disc { radius, .. } if !(*radius >= 0.0) => {
                Err(NavError::invalid("radius", format!("must be >= 0, got {radius}")))
            }
            Shape::Box { half, .. } if half.iter().any(|h| !(*h >= 0.0)) => {
                Err(NavError::invalid("half", "half extents must be >= 0"))
            }
            Shape::Gate { width, height, bar, .. } if !(*width > 0.0 && *height > 0.0 && *bar > 0.0) => {
                Err(NavError::invalid("width", "gate width, height and bar must be > 0"))
            }
            _ => Ok(()),
        }
    }
}
