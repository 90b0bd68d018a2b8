use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{AgentSpec, RandomVia, Scenario};
use super::{band_params, dof_vec, tracker_profiles, validate, ScenarioError};
use crate::band::BandPlanner;
use crate::dof::DofVec;
use crate::feedback::ZohChannel;
use crate::log::{AgentColumns, AgentSample, Channel, LogSchema};
use crate::tracker::TrackerState;
use crate::via::{PlanSwap, ViaPlan};
use crate::world::{AgentBody, AgentKind, Controller, World, WorldAgent};
use crate::{NavError, Result};

pub(crate) fn body_from_spec(a: &AgentSpec) -> AgentBody {
    let kind = a.kind;
    let mut body = AgentBody::new(
        kind,
        dof_vec(kind, &a.inertia),
        dof_vec(kind, &a.accel_max),
        dof_vec(kind, &a.vel_max),
    );
    body.pose = dof_vec(kind, &a.pose).wrapped();
    body.twist = dof_vec(kind, &a.twist);
    body.radius = a.radius;
    body
}

fn random_points(kind: AgentKind, r: &RandomVia, rng: &mut ChaCha8Rng) -> Vec<DofVec> {
    (0..r.count)
        .map(|_| {
            let v: Vec<f64> = r
                .min
                .iter()
                .zip(&r.max)
                .map(|(lo, hi)| if hi > lo { rng.random_range(*lo..*hi) } else { *lo })
                .collect();
            dof_vec(kind, &v)
        })
        .collect()
}

/// Band planner, tracker, via plan and feedback channel of one agent.
#[derive(Debug, Clone)]
pub struct AgentController {
    pub id: String,
    pub band: BandPlanner,
    pub tracker: TrackerState,
    pub via: ViaPlan,
    pub feedback: ZohChannel,
    dt: f64,
    /// Planner outputs used for the latest command.
    last: [DofVec; 4],
}

impl AgentController {
    pub fn x_vp(&self) -> DofVec {
        self.last[0]
    }
}

impl Controller for AgentController {
    fn command(&mut self, t: f64, body: &AgentBody) -> Result<DofVec> {
        let held_since = self.feedback.last_sample_time();
        let (pose, _) = self.feedback.sample(&body.pose, &body.twist, t)?;
        let fresh = self.feedback.rate().is_none() || self.feedback.last_sample_time() != held_since;
        let x_vp = self.via.current_target(&pose, t);
        let x_d = self.band.desired();
        self.last = [x_vp, x_d, self.band.velocity(), self.band.acceleration()];
        let w = if fresh {
            self.tracker.track_wrench(&x_d, &pose)?
        } else {
            self.tracker.hold_wrench(&x_d, &pose)
        };
        self.band.step(&x_vp, self.dt)?;
        Ok(w)
    }
}

/// A scenario instantiated as a world plus one controller per agent.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub world: World,
    pub controllers: Vec<AgentController>,
    /// Evaluate controllers on the rayon pool. Results are identical to
    /// serial evaluation.
    pub parallel: bool,
    pub schema: LogSchema,
    pub steps: u64,
    pub log_every: u64,
}

impl Simulation {
    pub fn new(s: &Scenario) -> Result<Self> {
        validate(s).map_err(|e| match e {
            ScenarioError::Invalid { field, reason, .. } => NavError::InvalidParam { field, reason },
            other => NavError::invalid("scenario", other.to_string()),
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        let mut world = World::new(s.dt)?;
        world.viscous = s.viscous;
        world.obstacles = s.obstacles.clone();
        let mut controllers = Vec::with_capacity(s.agents.len());
        for a in &s.agents {
            let kind = a.kind;
            let body = body_from_spec(a);
            world.agents.push(WorldAgent::new(a.id.clone(), body, a.bubble));

            let dofs = kind.dofs();
            let band_axes: Vec<_> = dofs.iter().copied().zip(band_params(a)).collect();
            let band = BandPlanner::new(a.band.mode, &body.pose, &band_axes);
            let profiles: Vec<_> = dofs.iter().copied().zip(tracker_profiles(a)).collect();
            let tracker = TrackerState::new(&profiles);

            let mut points: Vec<DofVec> = a.via.points.iter().map(|p| dof_vec(kind, p).wrapped()).collect();
            if let Some(r) = &a.via.random {
                points.extend(random_points(kind, r, &mut rng));
            }
            let mut schedule = Vec::new();
            for sw in &a.via.schedule {
                let mut pts: Vec<DofVec> = sw.points.iter().map(|p| dof_vec(kind, p).wrapped()).collect();
                if let Some(r) = &sw.random {
                    pts.extend(random_points(kind, r, &mut rng));
                }
                schedule.push(PlanSwap { at: sw.at, points: pts });
            }
            let via = ViaPlan::new(kind, points, a.via.trigger_radius)?
                .with_yaw_mode(a.via.yaw)
                .with_schedule(schedule)?;

            controllers.push(AgentController {
                id: a.id.clone(),
                band,
                tracker,
                via,
                feedback: ZohChannel::new(a.feedback_hz)?,
                dt: s.dt,
                last: [DofVec::ZERO; 4],
            });
        }
        let schema = LogSchema {
            agents: s
                .agents
                .iter()
                .map(|a| AgentColumns {
                    id: a.id.clone(),
                    dofs: a.kind.dofs().to_vec(),
                })
                .collect(),
        };
        Ok(Self {
            world,
            controllers,
            parallel: false,
            schema,
            steps: s.steps(),
            log_every: s.log_every,
        })
    }

    pub fn time(&self) -> f64 {
        self.world.time()
    }

    /// Advance one step; returns every agent's sample at the start of it.
    pub fn step(&mut self) -> Result<Vec<AgentSample>> {
        let pre: Vec<(DofVec, DofVec)> = self.world.agents.iter().map(|a| (a.body.pose, a.body.twist)).collect();
        let records = self.world.step(&mut self.controllers, self.parallel)?;
        Ok(records
            .iter()
            .zip(&self.controllers)
            .zip(pre)
            .map(|((r, c), (pose, twist))| {
                let mut s = AgentSample {
                    via_index: c.via.cursor(),
                    ..Default::default()
                };
                for (ch, v) in [
                    (Channel::ViaPose, c.last[0]),
                    (Channel::Desired, c.last[1]),
                    (Channel::DesiredVel, c.last[2]),
                    (Channel::DesiredAcc, c.last[3]),
                    (Channel::Pose, pose),
                    (Channel::Twist, twist),
                    (Channel::Accel, r.accel),
                    (Channel::Wrench, r.wrench),
                    (Channel::ExtWrench, r.w_ext),
                ] {
                    s.set(ch, v);
                }
                s
            })
            .collect())
    }

    /// Kinetic energy plus the energy held by trackers and bubbles.
    pub fn total_energy(&self) -> f64 {
        let mut e = 0.0;
        for (i, (a, c)) in self.world.agents.iter().zip(&self.controllers).enumerate() {
            e += a.body.kinetic_energy();
            e += c.tracker.stored_energy(&c.band.desired(), &a.body.pose);
            e += self.world.bubble_potential(i);
        }
        e
    }
}
