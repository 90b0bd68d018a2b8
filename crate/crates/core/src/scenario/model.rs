//! Scenario file model. Files are TOML documents; see the README for the
//! grammar. Per-DoF vectors list the agent's active DoFs in order:
//! `[x, y, yaw]` for planar agents, `[x, y, z, roll, pitch, yaw]` for spatial.

use serde::{Deserialize, Serialize};

use crate::band::BandMode;
use crate::via::YawMode;
use crate::world::{AgentKind, Bubble, Obstacle, ViscousField};

fn default_log_every() -> u64 {
    1
}

fn default_trigger_radius() -> f64 {
    crate::via::DEFAULT_TRIGGER_RADIUS
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

fn is_one(v: &u64) -> bool {
    *v == 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Simulated time in seconds.
    pub duration: f64,
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    /// Log every n-th step.
    #[serde(default = "default_log_every", skip_serializing_if = "is_one")]
    pub log_every: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub viscous: ViscousField,
    #[serde(default, rename = "agent", skip_serializing_if = "Vec::is_empty")]
    pub agents: Vec<AgentSpec>,
    #[serde(default, rename = "obstacle", skip_serializing_if = "Vec::is_empty")]
    pub obstacles: Vec<Obstacle>,
}

/// Axis-aligned workspace box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Bounds {
    pub fn contains(&self, p: [f64; 3], planar: bool) -> bool {
        let n = if planar { 2 } else { 3 };
        (0..n).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: String,
    pub kind: AgentKind,
    pub pose: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub twist: Vec<f64>,
    pub inertia: Vec<f64>,
    pub accel_max: Vec<f64>,
    pub vel_max: Vec<f64>,
    /// Physical footprint radius for the penetration check.
    #[serde(default, skip_serializing_if = "is_default")]
    pub radius: f64,
    /// Feedback sampling rate; omitted means ground truth every step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback_hz: Option<f64>,
    pub band: BandSpec,
    pub tracker: TrackerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bubble: Option<Bubble>,
    pub via: ViaSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    #[serde(default, skip_serializing_if = "is_default")]
    pub mode: BandMode,
    pub stiffness: Vec<f64>,
    /// Apparent inertia; defaults to the agent inertia.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<Vec<f64>>,
    /// Defaults to the agent limits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accel_max: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vel_max: Option<Vec<f64>>,
}

/// Region-of-attraction profile per active DoF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerSpec {
    pub k0: Vec<f64>,
    pub x0: Vec<f64>,
    pub xb: Vec<f64>,
    pub f_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViaSpec {
    #[serde(default = "default_trigger_radius")]
    pub trigger_radius: f64,
    #[serde(default, skip_serializing_if = "is_default")]
    pub yaw: YawMode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    /// Seeded random points appended after `points`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomVia>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<SwapSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomVia {
    pub count: usize,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapSpec {
    pub at: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomVia>,
}

impl Scenario {
    pub fn total_dofs(&self) -> usize {
        self.agents.iter().map(|a| a.kind.dofs().len()).sum()
    }

    pub fn steps(&self) -> u64 {
        (self.duration / self.dt).round() as u64
    }
}
