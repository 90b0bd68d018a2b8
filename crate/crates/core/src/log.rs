//! Trajectory logging.
//!
//! Rows are streamed through a [`LogSink`]: [`CsvSink`] writes the CSV
//! schema, [`TrajectoryLog`] keeps everything in memory for analysis and
//! [`NullSink`] drops it (benchmarks).
//!
//! CSV columns: `t`, then for each agent `<id>.via` (cursor index) followed by
//! `<id>.<channel>.<dof>` for every channel in [`Channel::ALL`] and every
//! active DoF of the agent. Floats use Rust's shortest round-trip formatting.

use std::io::{Read, Write};

use crate::dof::{Dof, DofVec};
use crate::{NavError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Current via-pose.
    ViaPose,
    /// Band output: desired pose, velocity, acceleration.
    Desired,
    DesiredVel,
    DesiredAcc,
    /// Ground-truth pose and twist.
    Pose,
    Twist,
    /// Commanded acceleration after actuator limits.
    Accel,
    /// Control wrench and external (bubble) wrench, world frame.
    Wrench,
    ExtWrench,
}

impl Channel {
    pub const ALL: [Channel; 9] = [
        Channel::ViaPose,
        Channel::Desired,
        Channel::DesiredVel,
        Channel::DesiredAcc,
        Channel::Pose,
        Channel::Twist,
        Channel::Accel,
        Channel::Wrench,
        Channel::ExtWrench,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::ViaPose => "x_vp",
            Channel::Desired => "x_d",
            Channel::DesiredVel => "v_d",
            Channel::DesiredAcc => "a_d",
            Channel::Pose => "x",
            Channel::Twist => "v",
            Channel::Accel => "a",
            Channel::Wrench => "w",
            Channel::ExtWrench => "w_ext",
        }
    }

    fn from_name(s: &str) -> Option<Channel> {
        Channel::ALL.into_iter().find(|c| c.name() == s)
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One agent's values at one logged step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentSample {
    pub via_index: usize,
    pub channels: [DofVec; 9],
}

impl AgentSample {
    pub fn get(&self, c: Channel) -> &DofVec {
        &self.channels[c.index()]
    }

    pub fn set(&mut self, c: Channel, v: DofVec) {
        self.channels[c.index()] = v;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentColumns {
    pub id: String,
    pub dofs: Vec<Dof>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogSchema {
    pub agents: Vec<AgentColumns>,
}

impl LogSchema {
    pub fn header(&self) -> Vec<String> {
        let mut cols = vec!["t".to_string()];
        for a in &self.agents {
            cols.push(format!("{}.via", a.id));
            for c in Channel::ALL {
                for d in &a.dofs {
                    cols.push(format!("{}.{}.{}", a.id, c.name(), d.name()));
                }
            }
        }
        cols
    }

    fn parse(header: &csv::StringRecord) -> Result<Self> {
        let mut it = header.iter();
        if it.next() != Some("t") {
            return Err(NavError::LogFormat("first column must be `t`".into()));
        }
        let mut agents: Vec<AgentColumns> = Vec::new();
        for col in it {
            if let Some(id) = col.strip_suffix(".via") {
                if !id.contains('.') {
                    agents.push(AgentColumns {
                        id: id.to_string(),
                        dofs: Vec::new(),
                    });
                    continue;
                }
            }
            let agent = agents
                .last_mut()
                .ok_or_else(|| NavError::LogFormat(format!("column `{col}` before any agent")))?;
            let rest = col
                .strip_prefix(&agent.id)
                .and_then(|r| r.strip_prefix('.'))
                .ok_or_else(|| NavError::LogFormat(format!("column `{col}` outside agent `{}`", agent.id)))?;
            let (chan, dof) = rest
                .split_once('.')
                .ok_or_else(|| NavError::LogFormat(format!("malformed column `{col}`")))?;
            Channel::from_name(chan).ok_or_else(|| NavError::LogFormat(format!("unknown channel in `{col}`")))?;
            let dof = Dof::from_name(dof).ok_or_else(|| NavError::LogFormat(format!("unknown DoF in `{col}`")))?;
            if chan == Channel::ALL[0].name() {
                agent.dofs.push(dof);
            }
        }
        let schema = LogSchema { agents };
        if schema.header().len() != header.len() {
            return Err(NavError::LogFormat("column set does not match the schema".into()));
        }
        Ok(schema)
    }
}

pub trait LogSink {
    fn begin(&mut self, schema: &LogSchema, dt: f64) -> Result<()>;
    fn record(&mut self, t: f64, samples: &[AgentSample]) -> Result<()>;
    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

pub struct NullSink;

impl LogSink for NullSink {
    fn begin(&mut self, _: &LogSchema, _: f64) -> Result<()> {
        Ok(())
    }
    fn record(&mut self, _: f64, _: &[AgentSample]) -> Result<()> {
        Ok(())
    }
}

pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
    schema: Option<LogSchema>,
    row: Vec<String>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(inner: W) -> Self {
        Self {
            writer: csv::Writer::from_writer(inner),
            schema: None,
            row: Vec::new(),
        }
    }

    pub fn into_inner(self) -> Result<W> {
        self.writer
            .into_inner()
            .map_err(|e| NavError::Io(std::io::Error::other(e.to_string())))
    }
}

impl<W: Write> LogSink for CsvSink<W> {
    fn begin(&mut self, schema: &LogSchema, _dt: f64) -> Result<()> {
        self.writer.write_record(schema.header())?;
        self.schema = Some(schema.clone());
        Ok(())
    }

    fn record(&mut self, t: f64, samples: &[AgentSample]) -> Result<()> {
        let schema = self
            .schema
            .as_ref()
            .ok_or_else(|| NavError::LogFormat("record before begin".into()))?;
        self.row.clear();
        self.row.push(t.to_string());
        for (a, s) in schema.agents.iter().zip(samples) {
            self.row.push(s.via_index.to_string());
            for c in Channel::ALL {
                let v = s.get(c);
                for d in &a.dofs {
                    self.row.push(v[*d].to_string());
                }
            }
        }
        self.writer.write_record(&self.row)?;
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

/// In-memory log on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub dt: f64,
    pub schema: Option<LogSchema>,
    pub t: Vec<f64>,
    /// `samples[agent][step]`.
    pub samples: Vec<Vec<AgentSample>>,
}

impl LogSink for TrajectoryLog {
    fn begin(&mut self, schema: &LogSchema, dt: f64) -> Result<()> {
        self.dt = dt;
        self.samples = vec![Vec::new(); schema.agents.len()];
        self.schema = Some(schema.clone());
        self.t.clear();
        Ok(())
    }

    fn record(&mut self, t: f64, samples: &[AgentSample]) -> Result<()> {
        if samples.len() != self.samples.len() {
            return Err(NavError::DimensionMismatch {
                expected: self.samples.len(),
                got: samples.len(),
            });
        }
        self.t.push(t);
        for (trace, s) in self.samples.iter_mut().zip(samples) {
            trace.push(*s);
        }
        Ok(())
    }
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.schema.as_ref()?.agents.iter().position(|a| a.id == id)
    }

    pub fn dofs(&self, agent: usize) -> &[Dof] {
        self.schema.as_ref().map_or(&[], |s| &s.agents[agent].dofs)
    }

    /// One channel of one agent over the whole run.
    pub fn channel(&self, agent: usize, c: Channel) -> Vec<DofVec> {
        self.samples[agent].iter().map(|s| *s.get(c)).collect()
    }

    pub fn via_indices(&self, agent: usize) -> Vec<usize> {
        self.samples[agent].iter().map(|s| s.via_index).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let schema = self.schema.as_ref().ok_or(NavError::Empty("log has no schema"))?;
        let mut sink = CsvSink::new(out);
        sink.begin(schema, self.dt)?;
        let mut row = Vec::with_capacity(self.samples.len());
        for (i, t) in self.t.iter().enumerate() {
            row.clear();
            row.extend(self.samples.iter().map(|trace| trace[i]));
            sink.record(*t, &row)?;
        }
        sink.finish()
    }

    /// Parse a CSV written by [`CsvSink`]. The time grid must be uniform.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let schema = LogSchema::parse(reader.headers()?)?;
        let mut log = TrajectoryLog::default();
        log.begin(&schema, 0.0)?;
        let mut row = vec![AgentSample::default(); schema.agents.len()];
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| NavError::LogFormat(format!("row {}: bad number in column {}", line + 2, i + 1)))
            };
            let t = num(0)?;
            let mut col = 1;
            for (a, s) in schema.agents.iter().zip(row.iter_mut()) {
                s.via_index = num(col)? as usize;
                col += 1;
                for c in Channel::ALL {
                    let mut v = DofVec::ZERO;
                    for d in &a.dofs {
                        v[*d] = num(col)?;
                        col += 1;
                    }
                    s.set(c, v);
                }
            }
            log.record(t, &row)?;
        }
        if log.t.len() >= 2 {
            let dt = log.t[1] - log.t[0];
            let uniform = log
                .t
                .windows(2)
                .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1.0));
            if !(dt > 0.0) || !uniform {
                return Err(NavError::LogFormat("time column is not a uniform grid".into()));
            }
            log.dt = dt;
        }
        Ok(log)
    }
}
