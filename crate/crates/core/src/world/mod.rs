//! Fixed-step multi-agent world.
//!
//! Agents are rigid bodies driven by `Ẍ = T·M⁻¹·(W − W_ext)` plus an external
//! viscous field the controllers do not know about. Controller wrenches are
//! held constant over each step while bubbles, obstacles and the viscous
//! field are re-evaluated at every Runge-Kutta stage.

pub mod body;
pub mod bubble;
pub mod geometry;
pub mod obstacle;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dof::{Dof, DofVec};
use crate::{NavError, Result};
pub use body::{agent_accel, AgentBody, AgentKind};
pub use bubble::{bubble_wrench, Bubble, BubbleShape};
pub use geometry::{Point3, Shape};
pub use obstacle::{Obstacle, Track};

/// Damping `F = −c·Ẋ` applied componentwise in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscousField {
    /// Coefficients for `x, y, z, roll, pitch, yaw`.
    pub damping: [f64; 6],
}

impl ViscousField {
    pub fn uniform(c: f64) -> Self {
        Self { damping: [c; 6] }
    }

    pub fn force(&self, twist: &DofVec) -> DofVec {
        twist.zip(DofVec(self.damping), |v, c| -c * v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.damping.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(NavError::invalid("viscous.damping", "coefficients must be >= 0"));
        }
        Ok(())
    }
}

/// An agent as seen by the world.
#[derive(Debug, Clone)]
pub struct WorldAgent {
    pub id: String,
    pub body: AgentBody,
    pub bubble: Option<Bubble>,
    /// Last repulsion direction, used when an entity sits on the agent centre.
    pub fallback_dir: Point3,
}

impl WorldAgent {
    pub fn new(id: impl Into<String>, body: AgentBody, bubble: Option<Bubble>) -> Self {
        Self {
            id: id.into(),
            body,
            bubble,
            fallback_dir: [1.0, 0.0, 0.0],
        }
    }
}

/// Supplies the world-frame control wrench of one agent.
pub trait Controller: Send {
    fn command(&mut self, t: f64, body: &AgentBody) -> Result<DofVec>;
}

/// Quantities of one agent at the start of a step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentStepRecord {
    pub wrench: DofVec,
    pub w_ext: DofVec,
    /// Commanded acceleration `T·M⁻¹·(W − W_ext)` after actuator saturation.
    pub accel: DofVec,
}

#[derive(Debug, Clone)]
pub struct World {
    pub agents: Vec<WorldAgent>,
    pub obstacles: Vec<Obstacle>,
    pub viscous: ViscousField,
    pub dt: f64,
    pub step_index: u64,
}

#[derive(Clone, Copy)]
struct Stage {
    pose: DofVec,
    twist: DofVec,
}

struct Derivative {
    accel: DofVec,
    commanded: DofVec,
    w_ext: DofVec,
    fallback: Point3,
}

impl World {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(NavError::invalid("dt", format!("must be > 0, got {dt}")));
        }
        Ok(Self {
            agents: Vec::new(),
            obstacles: Vec::new(),
            viscous: ViscousField::default(),
            dt,
            step_index: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.dt
    }

    /// Evaluate every controller on the current state, then integrate one step.
    pub fn step<C: Controller>(&mut self, controllers: &mut [C], parallel: bool) -> Result<Vec<AgentStepRecord>> {
        if controllers.len() != self.agents.len() {
            return Err(NavError::DimensionMismatch {
                expected: self.agents.len(),
                got: controllers.len(),
            });
        }
        let t = self.time();
        let wrenches: Vec<DofVec> = if parallel {
            controllers
                .par_iter_mut()
                .zip(self.agents.par_iter())
                .map(|(c, a)| c.command(t, &a.body))
                .collect::<Result<_>>()?
        } else {
            controllers
                .iter_mut()
                .zip(&self.agents)
                .map(|(c, a)| c.command(t, &a.body))
                .collect::<Result<_>>()?
        };
        self.step_with_wrenches(&wrenches)
    }

    /// Integrate one step with the given world-frame wrenches held constant.
    pub fn step_with_wrenches(&mut self, wrenches: &[DofVec]) -> Result<Vec<AgentStepRecord>> {
        let n = self.agents.len();
        if wrenches.len() != n {
            return Err(NavError::DimensionMismatch {
                expected: n,
                got: wrenches.len(),
            });
        }
        let t = self.time();
        let h = self.dt;
        let y0: Vec<Stage> = self
            .agents
            .iter()
            .map(|a| Stage {
                pose: a.body.pose,
                twist: a.body.twist,
            })
            .collect();

        let d1 = self.derivatives(&y0, wrenches, t);
        let records: Vec<AgentStepRecord> = d1
            .iter()
            .zip(wrenches)
            .map(|(d, w)| AgentStepRecord {
                wrench: *w,
                w_ext: d.w_ext,
                accel: d.commanded,
            })
            .collect();

        let advance = |base: &[Stage], k_pose: &[DofVec], k_twist: &[Derivative], s: f64| -> Vec<Stage> {
            base.iter()
                .zip(k_pose.iter().zip(k_twist))
                .map(|(b, (v, d))| Stage {
                    pose: b.pose + *v * s,
                    twist: b.twist + d.accel * s,
                })
                .collect()
        };

        let v1: Vec<DofVec> = y0.iter().map(|s| s.twist).collect();
        let y1 = advance(&y0, &v1, &d1, 0.5 * h);
        let d2 = self.derivatives(&y1, wrenches, t + 0.5 * h);
        let v2: Vec<DofVec> = y1.iter().map(|s| s.twist).collect();
        let y2 = advance(&y0, &v2, &d2, 0.5 * h);
        let d3 = self.derivatives(&y2, wrenches, t + 0.5 * h);
        let v3: Vec<DofVec> = y2.iter().map(|s| s.twist).collect();
        let y3 = advance(&y0, &v3, &d3, h);
        let d4 = self.derivatives(&y3, wrenches, t + h);
        let v4: Vec<DofVec> = y3.iter().map(|s| s.twist).collect();

        for (i, agent) in self.agents.iter_mut().enumerate() {
            let kind = agent.body.kind;
            let dp = (v1[i] + (v2[i] + v3[i]) * 2.0 + v4[i]) * (h / 6.0);
            let dv = (d1[i].accel + (d2[i].accel + d3[i].accel) * 2.0 + d4[i].accel) * (h / 6.0);
            agent.body.pose = kind.mask(agent.body.pose + dp).wrapped();
            agent.body.twist = kind.mask(agent.body.twist + dv);
            agent.fallback_dir = d1[i].fallback;
        }
        self.step_index += 1;

        for agent in &self.agents {
            if !agent.body.pose.is_finite() {
                return Err(self.halt(&agent.id, "pose"));
            }
            if !agent.body.twist.is_finite() {
                return Err(self.halt(&agent.id, "twist"));
            }
        }
        Ok(records)
    }

    fn halt(&self, agent: &str, what: &'static str) -> NavError {
        NavError::SimulationHalt {
            step: self.step_index,
            agent: agent.to_string(),
            what,
        }
    }

    fn derivatives(&self, stage: &[Stage], wrenches: &[DofVec], t: f64) -> Vec<Derivative> {
        (0..self.agents.len())
            .map(|i| {
                let agent = &self.agents[i];
                let mut body = agent.body;
                body.pose = stage[i].pose;
                body.twist = stage[i].twist;
                let (w_ext, fallback) = self.external_wrench(i, &body, stage, t);
                let command = body.saturate(&body.to_body(&(wrenches[i] - w_ext)));
                let commanded = agent_accel(&body, &command, &DofVec::ZERO);
                let drag = body.to_body(&self.viscous.force(&body.twist));
                let passive = agent_accel(&body, &drag, &DofVec::ZERO);
                Derivative {
                    accel: commanded + passive,
                    commanded,
                    w_ext,
                    fallback,
                }
            })
            .collect()
    }

    fn external_wrench(&self, i: usize, body: &AgentBody, stage: &[Stage], t: f64) -> (DofVec, Point3) {
        let agent = &self.agents[i];
        let Some(bubble) = &agent.bubble else {
            return (DofVec::ZERO, agent.fallback_dir);
        };
        let planar = body.kind.is_planar();
        let p = body.position();
        let reach = bubble.reach();
        let obstacle_points = self
            .obstacles
            .iter()
            .filter_map(move |o| o.closest_point(p, t, planar));
        let agent_points = stage
            .iter()
            .enumerate()
            .filter(move |(j, _)| *j != i)
            .map(|(_, s)| [s.pose[Dof::X], s.pose[Dof::Y], s.pose[Dof::Z]])
            .filter(move |q| {
                let dz = if planar { 0.0 } else { q[2] - p[2] };
                let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                dx * dx + dy * dy + dz * dz < reach * reach
            });
        bubble_wrench(bubble, body, obstacle_points.chain(agent_points), agent.fallback_dir)
    }

    /// Repulsive potential stored by all active bubble contacts of agent `i`.
    pub fn bubble_potential(&self, i: usize) -> f64 {
        let agent = &self.agents[i];
        let Some(bubble) = &agent.bubble else {
            return 0.0;
        };
        let t = self.time();
        let planar = agent.body.kind.is_planar();
        let p = agent.body.position();
        let mut total = 0.0;
        let others = self
            .agents
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, a)| a.body.position());
        for near in self
            .obstacles
            .iter()
            .filter_map(|o| o.closest_point(p, t, planar))
            .chain(others)
        {
            if let Some(c) = bubble.contact(&agent.body, near, agent.fallback_dir) {
                total += bubble.potential(c.penetration);
            }
        }
        total
    }

    /// `(agent, obstacle)` pairs where an agent footprint overlaps an obstacle.
    pub fn penetrations(&self) -> Vec<(usize, usize)> {
        let t = self.time();
        let mut out = Vec::new();
        for (i, a) in self.agents.iter().enumerate() {
            let planar = a.body.kind.is_planar();
            for (k, o) in self.obstacles.iter().enumerate() {
                if let Some(d) = o.distance(a.body.position(), t, planar) {
                    if d < a.body.radius || d == 0.0 {
                        out.push((i, k));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::RoaProfileParams;
    use approx::assert_relative_eq;

    fn free_mass(kind: AgentKind) -> AgentBody {
        AgentBody::new(kind, DofVec::splat(1.0), DofVec::splat(1e6), DofVec::splat(1e6))
    }

    #[test]
    fn constant_force_is_exact() {
        let mut w = World::new(1e-3).unwrap();
        w.agents.push(WorldAgent::new("m", free_mass(AgentKind::Planar), None));
        let f = DofVec([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        for _ in 0..1000 {
            w.step_with_wrenches(&[f]).unwrap();
        }
        let b = &w.agents[0].body;
        assert_relative_eq!(b.pose[Dof::X], 0.5, epsilon = 1e-12);
        assert_relative_eq!(b.twist[Dof::X], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn viscous_decay_matches_exponential() {
        let mut w = World::new(1e-3).unwrap();
        w.viscous = ViscousField::uniform(0.5);
        let mut body = free_mass(AgentKind::Planar);
        body.twist[Dof::X] = 1.0;
        w.agents.push(WorldAgent::new("m", body, None));
        for _ in 0..2000 {
            w.step_with_wrenches(&[DofVec::ZERO]).unwrap();
        }
        assert_relative_eq!(w.agents[0].body.twist[Dof::X], (-1.0_f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn mirrored_agents_stay_mirrored() {
        let bubble = Bubble {
            shape: BubbleShape::Circle { radius: 1.0 },
            repulsion: RoaProfileParams::new(10.0, 0.1, 0.3, 5.0),
        };
        let mut w = World::new(1e-3).unwrap();
        let mut a = free_mass(AgentKind::Planar);
        a.pose[Dof::X] = -0.4;
        a.pose[Dof::Y] = 0.05;
        a.twist[Dof::X] = 0.3;
        let mut b = a;
        b.pose[Dof::X] = 0.4;
        b.twist[Dof::X] = -0.3;
        w.agents.push(WorldAgent::new("a", a, Some(bubble)));
        w.agents.push(WorldAgent::new("b", b, Some(bubble)));
        for _ in 0..3000 {
            w.step_with_wrenches(&[DofVec::ZERO, DofVec::ZERO]).unwrap();
            let (pa, pb) = (&w.agents[0].body, &w.agents[1].body);
            assert!((pa.pose[Dof::X] + pb.pose[Dof::X]).abs() < 1e-9);
            assert!((pa.pose[Dof::Y] - pb.pose[Dof::Y]).abs() < 1e-9);
            assert!((pa.twist[Dof::X] + pb.twist[Dof::X]).abs() < 1e-9);
        }
        // they bounced apart
        assert!(w.agents[0].body.twist[Dof::X] < 0.0);
    }

    #[test]
    fn nan_halts_with_agent_name() {
        let mut w = World::new(1e-3).unwrap();
        w.agents.push(WorldAgent::new("bad", free_mass(AgentKind::Planar), None));
        let err = w
            .step_with_wrenches(&[DofVec([f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0])])
            .unwrap_err();
        match err {
            NavError::SimulationHalt { step, agent, .. } => {
                assert_eq!(step, 1);
                assert_eq!(agent, "bad");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn obstacle_repels_and_saturation_limits_accel() {
        let bubble = Bubble {
            shape: BubbleShape::Circle { radius: 1.0 },
            repulsion: RoaProfileParams::new(100.0, 0.1, 0.3, 50.0),
        };
        let mut w = World::new(1e-3).unwrap();
        let mut body = AgentBody::new(AgentKind::Planar, DofVec::splat(10.0), DofVec::splat(0.5), DofVec::splat(1.0));
        body.pose[Dof::X] = 0.5;
        w.agents.push(WorldAgent::new("a", body, Some(bubble)));
        w.obstacles.push(Obstacle::fixed(
            "post",
            Shape::Disc {
                center: [0.0; 3],
                radius: 0.0,
            },
        ));
        let rec = w.step_with_wrenches(&[DofVec::ZERO]).unwrap();
        // repulsion 50 N along +x is clipped to 10 kg * 0.5 m/s²
        assert_relative_eq!(rec[0].accel[Dof::X], 0.5, epsilon = 1e-12);
        assert!(rec[0].w_ext[Dof::X] < 0.0);
    }
}
