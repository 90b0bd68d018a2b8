//! Via-point sequencing: proximity-triggered advance, optional face-target
//! yaw, and time-scheduled plan swaps.

use serde::{Deserialize, Serialize};

use crate::dof::{wrap_angle, Dof, DofVec};
use crate::world::AgentKind;
use crate::{NavError, Result};

pub const DEFAULT_TRIGGER_RADIUS: f64 = 0.2;
pub const DEFAULT_YAW_DEADBAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YawMode {
    /// Use the yaw stored in each via-pose.
    #[default]
    Explicit,
    /// Point the agent at its current via-point.
    FaceTarget,
}

/// Replaces the remaining plan at time `at`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanSwap {
    pub at: f64,
    pub points: Vec<DofVec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViaPlan {
    pub kind: AgentKind,
    pub points: Vec<DofVec>,
    pub trigger_radius: f64,
    pub yaw_mode: YawMode,
    pub yaw_deadband: f64,
    pub schedule: Vec<PlanSwap>,
    cursor: usize,
    next_swap: usize,
    advances: usize,
    held_yaw: Option<f64>,
}

impl ViaPlan {
    pub fn new(kind: AgentKind, points: Vec<DofVec>, trigger_radius: f64) -> Result<Self> {
        let plan = Self {
            kind,
            points,
            trigger_radius,
            yaw_mode: YawMode::Explicit,
            yaw_deadband: DEFAULT_YAW_DEADBAND,
            schedule: Vec::new(),
            cursor: 0,
            next_swap: 0,
            advances: 0,
            held_yaw: None,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_yaw_mode(mut self, mode: YawMode) -> Self {
        self.yaw_mode = mode;
        self
    }

    pub fn with_schedule(mut self, schedule: Vec<PlanSwap>) -> Result<Self> {
        self.schedule = schedule;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.trigger_radius > 0.0 && self.trigger_radius.is_finite()) {
            return Err(NavError::invalid(
                "via.trigger_radius",
                format!("must be > 0, got {}", self.trigger_radius),
            ));
        }
        if self.points.is_empty() {
            return Err(NavError::invalid("via.points", "plan is empty"));
        }
        if self.points.iter().any(|p| !p.is_finite()) {
            return Err(NavError::invalid("via.points", "non-finite via-pose"));
        }
        for w in self.schedule.windows(2) {
            if !(w[1].at > w[0].at) {
                return Err(NavError::invalid(
                    "via.schedule",
                    format!("swap times must be strictly increasing ({} then {})", w[0].at, w[1].at),
                ));
            }
        }
        if self.schedule.iter().any(|s| s.points.is_empty()) {
            return Err(NavError::invalid("via.schedule", "swap plan is empty"));
        }
        Ok(())
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Cursor advances so far, across swaps.
    pub fn advances(&self) -> usize {
        self.advances
    }

    pub fn is_final(&self) -> bool {
        self.cursor + 1 == self.points.len()
    }

    /// Positional distance from `pose` to the current via-pose.
    pub fn distance(&self, pose: &DofVec) -> f64 {
        let target = &self.points[self.cursor];
        self.kind
            .linear_dofs()
            .iter()
            .map(|&d| (target[d] - pose[d]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Target for this step. Advances at most once per call.
    pub fn current_target(&mut self, pose: &DofVec, t: f64) -> DofVec {
        while self.next_swap < self.schedule.len() && self.schedule[self.next_swap].at <= t {
            self.points = self.schedule[self.next_swap].points.clone();
            self.cursor = 0;
            self.next_swap += 1;
        }
        if !self.is_final() && self.distance(pose) < self.trigger_radius {
            self.cursor += 1;
            self.advances += 1;
        }
        let mut target = self.points[self.cursor];
        if self.yaw_mode == YawMode::FaceTarget {
            let held = self.held_yaw.unwrap_or(pose[Dof::Yaw]);
            let yaw = face_target_yaw(pose, &target, self.yaw_deadband).unwrap_or(held);
            self.held_yaw = Some(yaw);
            target[Dof::Yaw] = yaw;
        }
        target
    }
}

/// Heading from `pose` to `via` in the horizontal plane, `None` inside the
/// deadband.
pub fn face_target_yaw(pose: &DofVec, via: &DofVec, deadband: f64) -> Option<f64> {
    let dx = via[Dof::X] - pose[Dof::X];
    let dy = via[Dof::Y] - pose[Dof::Y];
    if dx.hypot(dy) <= deadband {
        return None;
    }
    Some(wrap_angle(dy.atan2(dx)))
}
