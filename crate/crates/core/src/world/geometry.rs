//! Closest-point queries against obstacle shapes.
//!
//! Planar agents query in the `xy` plane (shapes are treated as extruded over
//! all heights); spatial agents query in 3D.

use serde::{Deserialize, Serialize};

pub type Point3 = [f64; 3];

pub fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Point3, b: Point3) -> Point3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn norm(a: Point3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Drop `z` for planar queries.
pub fn flatten(p: Point3, planar: bool) -> Point3 {
    if planar {
        [p[0], p[1], 0.0]
    } else {
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// Vertical wall along the segment `a`-`b`, spanning `z_range` in height.
    Wall {
        a: [f64; 2],
        b: [f64; 2],
        #[serde(default = "full_height")]
        z_range: [f64; 2],
    },
    /// Box with half extents `half`, rotated by `yaw` about its vertical axis.
    Box {
        center: Point3,
        half: Point3,
        #[serde(default)]
        yaw: f64,
    },
    /// Vertical cylinder (planar) or sphere (spatial).
    Disc { center: Point3, radius: f64 },
    /// Rectangular frame around an aperture of `width` x `height`. The pass
    /// direction is the frame normal `(cos yaw, sin yaw, 0)`.
    Gate {
        center: Point3,
        yaw: f64,
        width: f64,
        height: f64,
        #[serde(default = "default_gate_bar")]
        bar: f64,
    },
}

fn full_height() -> [f64; 2] {
    [f64::NEG_INFINITY, f64::INFINITY]
}

fn default_gate_bar() -> f64 {
    0.2
}

impl Shape {
    /// Closest point of the shape to `p` after shifting the shape by `offset`.
    pub fn closest_point(&self, p: Point3, offset: Point3, planar: bool) -> Point3 {
        let q = flatten(sub(p, offset), planar);
        let c = match self {
            Shape::Wall { a, b, z_range } => {
                let (ax, ay) = (a[0], a[1]);
                let (dx, dy) = (b[0] - ax, b[1] - ay);
                let len2 = dx * dx + dy * dy;
                let s = if len2 > 0.0 {
                    (((q[0] - ax) * dx + (q[1] - ay) * dy) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let z = if planar { 0.0 } else { q[2].clamp(z_range[0], z_range[1]) };
                [ax + s * dx, ay + s * dy, z]
            }
            Shape::Box { center, half, yaw } => closest_on_box(q, *center, *half, *yaw, planar),
            Shape::Disc { center, radius } => {
                let c = flatten(*center, planar);
                let d = sub(q, c);
                let n = norm(d);
                if n <= *radius {
                    q
                } else {
                    add(c, scale(d, radius / n))
                }
            }
            Shape::Gate { .. } => {
                let mut best = q;
                let mut best_d = f64::INFINITY;
                for part in self.gate_bars().into_iter().flatten() {
                    let cp = part.closest_point(q, [0.0; 3], planar);
                    let d = norm(sub(cp, q));
                    if d < best_d {
                        best_d = d;
                        best = cp;
                    }
                }
                best
            }
        };
        add(c, flatten(offset, planar))
    }

    pub fn distance(&self, p: Point3, offset: Point3, planar: bool) -> f64 {
        let c = self.closest_point(p, offset, planar);
        norm(sub(flatten(p, planar), c))
    }

    /// The four bars of a gate frame as boxes, `None` for other shapes.
    pub fn gate_bars(&self) -> Option<[Shape; 4]> {
        let Shape::Gate {
            center,
            yaw,
            width,
            height,
            bar,
        } = self
        else {
            return None;
        };
        let (s, c) = yaw.sin_cos();
        // lateral axis in the gate plane
        let lat = [-s, c];
        let hw = width / 2.0 + bar / 2.0;
        let hh = height / 2.0 + bar / 2.0;
        let thick = bar / 2.0;
        let post = |side: f64| Shape::Box {
            center: [center[0] + side * hw * lat[0], center[1] + side * hw * lat[1], center[2]],
            half: [thick, thick, hh + thick],
            yaw: *yaw,
        };
        let beam = |side: f64| Shape::Box {
            center: [center[0], center[1], center[2] + side * hh],
            half: [thick, hw + thick, thick],
            yaw: *yaw,
        };
        Some([post(-1.0), post(1.0), beam(-1.0), beam(1.0)])
    }
}

fn scale(a: Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn closest_on_box(q: Point3, center: Point3, half: Point3, yaw: f64, planar: bool) -> Point3 {
    let (s, c) = yaw.sin_cos();
    let d = sub(q, center);
    // into box frame
    let lx = c * d[0] + s * d[1];
    let ly = -s * d[0] + c * d[1];
    let lz = d[2];
    let cx = lx.clamp(-half[0], half[0]);
    let cy = ly.clamp(-half[1], half[1]);
    let cz = if planar { 0.0 } else { lz.clamp(-half[2], half[2]) };
    let wx = c * cx - s * cy;
    let wy = s * cx + c * cy;
    if planar {
        [center[0] + wx, center[1] + wy, 0.0]
    } else {
        [center[0] + wx, center[1] + wy, center[2] + cz]
    }
}

/// Signed side of `p` relative to a gate plane, `None` when the projection
/// falls outside the aperture.
pub fn gate_side(gate: &Shape, p: Point3, offset: Point3) -> Option<f64> {
    let Shape::Gate {
        center,
        yaw,
        width,
        height,
        ..
    } = gate
    else {
        return None;
    };
    let (s, c) = yaw.sin_cos();
    let d = sub(sub(p, offset), *center);
    let along = c * d[0] + s * d[1];
    let lateral = -s * d[0] + c * d[1];
    if lateral.abs() <= width / 2.0 && d[2].abs() <= height / 2.0 {
        Some(along)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wall_distance() {
        let w = Shape::Wall {
            a: [0.0, 0.0],
            b: [4.0, 0.0],
            z_range: full_height(),
        };
        assert_relative_eq!(w.distance([2.0, 1.5, 0.0], [0.0; 3], true), 1.5);
        assert_relative_eq!(w.distance([6.0, 0.0, 0.0], [0.0; 3], true), 2.0);
        // shifted by an offset
        assert_relative_eq!(w.distance([2.0, 1.5, 0.0], [0.0, 1.0, 0.0], true), 0.5);
    }

    #[test]
    fn rotated_box() {
        let b = Shape::Box {
            center: [0.0, 0.0, 0.0],
            half: [1.0, 0.5, 1.0],
            yaw: std::f64::consts::FRAC_PI_2,
        };
        // long axis now along y
        assert_relative_eq!(b.distance([0.0, 2.0, 0.0], [0.0; 3], true), 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.distance([2.0, 0.0, 0.0], [0.0; 3], true), 1.5, epsilon = 1e-12);
        assert_eq!(b.distance([0.1, 0.1, 0.0], [0.0; 3], true), 0.0);
    }

    #[test]
    fn spatial_box_uses_height() {
        let b = Shape::Box {
            center: [0.0, 0.0, 1.0],
            half: [1.0, 1.0, 1.0],
            yaw: 0.0,
        };
        assert_relative_eq!(b.distance([0.0, 0.0, 3.5], [0.0; 3], false), 1.5);
        assert_eq!(b.distance([0.0, 0.0, 3.5], [0.0; 3], true), 0.0);
    }

    #[test]
    fn gate_aperture_is_open() {
        let g = Shape::Gate {
            center: [0.0, 0.0, 2.0],
            yaw: 0.0,
            width: 2.0,
            height: 2.0,
            bar: 0.2,
        };
        // centre of the aperture is a full half-width away from the posts
        assert_relative_eq!(g.distance([0.0, 0.0, 2.0], [0.0; 3], false), 1.0, epsilon = 1e-12);
        assert_eq!(gate_side(&g, [0.5, 0.0, 2.0], [0.0; 3]), Some(0.5));
        assert_eq!(gate_side(&g, [0.5, 3.0, 2.0], [0.0; 3]), None);
    }
}
