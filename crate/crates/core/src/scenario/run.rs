use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use super::model::Scenario;
use super::sim::Simulation;
use crate::dof::{dof_diff, Dof, DofVec};
use crate::log::{Channel, CsvSink, LogSink, NullSink, SCHEMA_VERSION};
use crate::metrics::{peak_momentum, peak_power};
use crate::world::geometry::gate_side;
use crate::world::Shape;
use crate::{NavError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSummary {
    pub id: String,
    pub dofs: Vec<Dof>,
    /// Tracking RMSE `x_d − x` per DoF over every step.
    pub rmse: DofVec,
    pub q_max: f64,
    pub p_max: f64,
    /// Via-points reached: cursor advances plus the final one if reached.
    pub via_reached: usize,
    pub final_error: f64,
    /// The plan is on its last via-point and within the trigger radius.
    pub completed: bool,
    /// Largest commanded acceleration per DoF.
    pub peak_accel: DofVec,
    pub peak_desired_vel: DofVec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateCrossing {
    pub agent: usize,
    pub obstacle: usize,
    pub t: f64,
    /// `+1` along the gate normal, `−1` against it.
    pub direction: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub name: String,
    pub steps: u64,
    pub dt: f64,
    pub wall_clock: f64,
    pub agents: Vec<AgentSummary>,
    /// Steps on which some agent footprint overlapped an obstacle.
    pub penetration_steps: u64,
    pub gate_crossings: Vec<GateCrossing>,
}

impl RunSummary {
    pub fn agent(&self, id: &str) -> Option<&AgentSummary> {
        self.agents.iter().find(|a| a.id == id)
    }

    /// `key = value` report.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "schema_version = {SCHEMA_VERSION}");
        let _ = writeln!(s, "scenario = {}", self.name);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "dt = {}", self.dt);
        let _ = writeln!(s, "wall_clock_s = {:.3}", self.wall_clock);
        let _ = writeln!(s, "penetration_steps = {}", self.penetration_steps);
        let wrong_way = self.gate_crossings.iter().filter(|g| g.direction < 0).count();
        let _ = writeln!(s, "gate_crossings = {}", self.gate_crossings.len());
        let _ = writeln!(s, "gate_crossings_wrong_way = {wrong_way}");
        for a in &self.agents {
            for d in &a.dofs {
                let _ = writeln!(s, "{}.rmse.{} = {}", a.id, d, a.rmse[*d]);
            }
            let _ = writeln!(s, "{}.q_max = {}", a.id, a.q_max);
            let _ = writeln!(s, "{}.p_max = {}", a.id, a.p_max);
            let _ = writeln!(s, "{}.via_reached = {}", a.id, a.via_reached);
            let _ = writeln!(s, "{}.final_error = {}", a.id, a.final_error);
            let _ = writeln!(s, "{}.completed = {}", a.id, a.completed);
        }
        s
    }
}

struct Accumulator {
    sq_err: DofVec,
    q_max: f64,
    p_max: f64,
    peak_accel: DofVec,
    peak_vd: DofVec,
}

/// Run a built simulation to the end, streaming logged rows into `sink`.
pub fn run<S: LogSink>(name: &str, sim: &mut Simulation, sink: &mut S) -> Result<RunSummary> {
    let started = Instant::now();
    let dt = sim.world.dt;
    sink.begin(&sim.schema, dt * sim.log_every as f64)?;
    let n = sim.world.agents.len();
    let mut acc: Vec<Accumulator> = (0..n)
        .map(|_| Accumulator {
            sq_err: DofVec::ZERO,
            q_max: 0.0,
            p_max: 0.0,
            peak_accel: DofVec::ZERO,
            peak_vd: DofVec::ZERO,
        })
        .collect();
    let gates: Vec<usize> = sim
        .world
        .obstacles
        .iter()
        .enumerate()
        .filter(|(_, o)| matches!(o.shape, Shape::Gate { .. }))
        .map(|(k, _)| k)
        .collect();
    let mut gate_prev = vec![None::<f64>; n * gates.len()];
    let mut crossings = Vec::new();
    let mut penetration_steps = 0;

    for k in 0..sim.steps {
        let t = sim.time();
        let samples = sim.step()?;
        for (i, s) in samples.iter().enumerate() {
            let inertia = sim.world.agents[i].body.inertia;
            let a = &mut acc[i];
            let (x_d, x) = (s.get(Channel::Desired), s.get(Channel::Pose));
            for d in Dof::ALL {
                let e = dof_diff(d, x_d[d], x[d]);
                a.sq_err[d] += e * e;
                a.peak_accel[d] = a.peak_accel[d].max(s.get(Channel::Accel)[d].abs());
                a.peak_vd[d] = a.peak_vd[d].max(s.get(Channel::DesiredVel)[d].abs());
            }
            let v_d = [*s.get(Channel::DesiredVel)];
            a.q_max = a.q_max.max(peak_momentum(&v_d, &inertia));
            a.p_max = a.p_max.max(peak_power(&v_d, &[*s.get(Channel::DesiredAcc)], &inertia));
        }
        if k % sim.log_every == 0 {
            sink.record(t, &samples)?;
        }

        let t_now = sim.time();
        if !sim.world.penetrations().is_empty() {
            penetration_steps += 1;
        }
        for (i, agent) in sim.world.agents.iter().enumerate() {
            for (g, &ob) in gates.iter().enumerate() {
                let o = &sim.world.obstacles[ob];
                let side = if o.is_active(t_now) {
                    gate_side(&o.shape, agent.body.position(), o.offset(t_now))
                } else {
                    None
                };
                let slot = &mut gate_prev[i * gates.len() + g];
                if let (Some(before), Some(after)) = (*slot, side) {
                    if before != 0.0 && after != 0.0 && before.signum() != after.signum() {
                        crossings.push(GateCrossing {
                            agent: i,
                            obstacle: ob,
                            t: t_now,
                            direction: if after > before { 1 } else { -1 },
                        });
                    }
                }
                *slot = side;
            }
        }
    }
    sink.finish()?;

    let steps = sim.steps.max(1) as f64;
    let agents = sim
        .controllers
        .iter()
        .zip(&sim.world.agents)
        .zip(acc)
        .map(|((c, w), a)| {
            let final_error = c.via.distance(&w.body.pose);
            let within = final_error < c.via.trigger_radius;
            AgentSummary {
                id: c.id.clone(),
                dofs: w.body.kind.dofs().to_vec(),
                rmse: a.sq_err.map(|s| (s / steps).sqrt()),
                q_max: a.q_max,
                p_max: a.p_max,
                via_reached: c.via.advances() + usize::from(c.via.is_final() && within),
                final_error,
                completed: c.via.is_final() && within,
                peak_accel: a.peak_accel,
                peak_desired_vel: a.peak_vd,
            }
        })
        .collect();
    Ok(RunSummary {
        name: name.to_string(),
        steps: sim.steps,
        dt,
        wall_clock: started.elapsed().as_secs_f64(),
        agents,
        penetration_steps,
        gate_crossings: crossings,
    })
}

/// Run `scenario` and write `<name>.csv` and `<name>.summary.txt` into `out`.
pub fn write_outputs(scenario: &Scenario, out: &Path, parallel: bool) -> Result<RunSummary> {
    std::fs::create_dir_all(out)?;
    let mut sim = Simulation::new(scenario)?;
    sim.parallel = parallel;
    let file = BufWriter::new(File::create(out.join(format!("{}.csv", scenario.name)))?);
    let mut sink = CsvSink::new(file);
    let summary = run(&scenario.name, &mut sim, &mut sink)?;
    std::fs::write(out.join(format!("{}.summary.txt", scenario.name)), summary.to_text())?;
    Ok(summary)
}

/// Mean and standard deviation of wall-clock seconds per simulated step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingStats {
    pub mean: f64,
    pub sd: f64,
}

impl TimingStats {
    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self { mean, sd: var.sqrt() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchReport {
    pub repeats: usize,
    pub steps: u64,
    pub single: TimingStats,
    pub swarm: TimingStats,
    /// `swarm.mean / single.mean`.
    pub ratio: f64,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        format!(
            "repeats = {}\nsteps = {}\nsingle_ms_per_step = {:.6} ± {:.6}\nswarm_ms_per_step = {:.6} ± {:.6}\nratio = {:.3}\n",
            self.repeats,
            self.steps,
            self.single.mean * 1e3,
            self.single.sd * 1e3,
            self.swarm.mean * 1e3,
            self.swarm.sd * 1e3,
            self.ratio
        )
    }
}

/// Time both scenarios `repeats` times, serially and without logging.
pub fn bench(single: &Scenario, swarm: &Scenario, repeats: usize) -> Result<BenchReport> {
    if repeats == 0 {
        return Err(NavError::invalid("repeats", "must be >= 1"));
    }
    if single.dt != swarm.dt || single.duration != swarm.duration {
        return Err(NavError::invalid(
            "bench",
            format!(
                "scenarios must share dt and duration ({}/{} vs {}/{})",
                single.dt, single.duration, swarm.dt, swarm.duration
            ),
        ));
    }
    let time_one = |s: &Scenario| -> Result<f64> {
        let mut sim = Simulation::new(s)?;
        let started = Instant::now();
        for _ in 0..sim.steps {
            sim.step()?;
        }
        Ok(started.elapsed().as_secs_f64() / sim.steps.max(1) as f64)
    };
    let (mut a, mut b) = (Vec::with_capacity(repeats), Vec::with_capacity(repeats));
    for _ in 0..repeats {
        a.push(time_one(single)?);
        b.push(time_one(swarm)?);
    }
    let single_stats = TimingStats::from_samples(&a);
    let swarm_stats = TimingStats::from_samples(&b);
    Ok(BenchReport {
        repeats,
        steps: single.steps(),
        single: single_stats,
        swarm: swarm_stats,
        ratio: swarm_stats.mean / single_stats.mean,
    })
}

/// Run without logging; used by tests and benchmarks.
pub fn run_silent(scenario: &Scenario) -> Result<RunSummary> {
    let mut sim = Simulation::new(scenario)?;
    run(&scenario.name, &mut sim, &mut NullSink)
}
