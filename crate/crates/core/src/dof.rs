//! Generalized coordinates shared by every agent.
//!
//! Every agent is stored with six coordinates `(x, y, z, roll, pitch, yaw)`.
//! Planar agents use only `x`, `y` and `yaw`; the other channels stay at zero.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

pub const DOF_COUNT: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dof {
    X,
    Y,
    Z,
    Roll,
    Pitch,
    Yaw,
}

impl Dof {
    pub const ALL: [Dof; DOF_COUNT] = [Dof::X, Dof::Y, Dof::Z, Dof::Roll, Dof::Pitch, Dof::Yaw];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_angular(self) -> bool {
        matches!(self, Dof::Roll | Dof::Pitch | Dof::Yaw)
    }

    pub fn name(self) -> &'static str {
        match self {
            Dof::X => "x",
            Dof::Y => "y",
            Dof::Z => "z",
            Dof::Roll => "roll",
            Dof::Pitch => "pitch",
            Dof::Yaw => "yaw",
        }
    }

    pub fn from_name(name: &str) -> Option<Dof> {
        Dof::ALL.into_iter().find(|d| d.name() == name)
    }
}

impl fmt::Display for Dof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Difference `a - b`, wrapped when `dof` is angular.
pub fn dof_diff(dof: Dof, a: f64, b: f64) -> f64 {
    if dof.is_angular() {
        wrap_angle(a - b)
    } else {
        a - b
    }
}

/// Six-component vector over [`Dof`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DofVec(pub [f64; DOF_COUNT]);

impl DofVec {
    pub const ZERO: DofVec = DofVec([0.0; DOF_COUNT]);

    pub fn splat(v: f64) -> Self {
        DofVec([v; DOF_COUNT])
    }

    pub fn get(&self, dof: Dof) -> f64 {
        self.0[dof.index()]
    }

    pub fn set(&mut self, dof: Dof, v: f64) {
        self.0[dof.index()] = v;
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        DofVec(self.0.map(f))
    }

    pub fn zip(self, other: DofVec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = [0.0; DOF_COUNT];
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(self.0[i], other.0[i]);
        }
        DofVec(out)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Wrap the angular components into `(-π, π]`.
    pub fn wrapped(mut self) -> Self {
        for d in [Dof::Roll, Dof::Pitch, Dof::Yaw] {
            self.0[d.index()] = wrap_angle(self.0[d.index()]);
        }
        self
    }

    pub fn linear_norm(&self) -> f64 {
        (self.0[0] * self.0[0] + self.0[1] * self.0[1] + self.0[2] * self.0[2]).sqrt()
    }
}

impl Index<Dof> for DofVec {
    type Output = f64;
    fn index(&self, d: Dof) -> &f64 {
        &self.0[d.index()]
    }
}

impl IndexMut<Dof> for DofVec {
    fn index_mut(&mut self, d: Dof) -> &mut f64 {
        &mut self.0[d.index()]
    }
}

impl Add for DofVec {
    type Output = DofVec;
    fn add(self, o: DofVec) -> DofVec {
        self.zip(o, |a, b| a + b)
    }
}

impl Sub for DofVec {
    type Output = DofVec;
    fn sub(self, o: DofVec) -> DofVec {
        self.zip(o, |a, b| a - b)
    }
}

impl Neg for DofVec {
    type Output = DofVec;
    fn neg(self) -> DofVec {
        self.map(|a| -a)
    }
}

impl Mul<f64> for DofVec {
    type Output = DofVec;
    fn mul(self, s: f64) -> DofVec {
        self.map(|a| a * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-7.0) - (-7.0 + 2.0 * PI)).abs() < 1e-12);
        assert_eq!(wrap_angle(0.3), 0.3);
    }

    #[test]
    fn shortest_arc_difference() {
        let d = dof_diff(Dof::Yaw, PI - 0.05, -PI + 0.05);
        assert!((d + 0.1).abs() < 1e-12);
        assert_eq!(dof_diff(Dof::X, 3.0, 1.0), 2.0);
    }
}
