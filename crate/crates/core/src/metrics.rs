//! Post-run analysis: RMSE, peak momentum and power, and the minimum-jerk
//! reference used to judge how gentle the planned motions are.

use crate::dof::{dof_diff, Dof, DofVec};
use crate::log::{Channel, TrajectoryLog};
use crate::{NavError, Result};

/// Segments shorter than this are rejected by [`compare_with_min_jerk`].
pub const MIN_SEGMENT_SAMPLES: usize = 10;

/// Per-DoF root-mean-square of `reference − actual`, wrapping angular DoFs.
pub fn rmse(reference: &[DofVec], actual: &[DofVec]) -> Result<DofVec> {
    if reference.len() != actual.len() {
        return Err(NavError::DimensionMismatch {
            expected: reference.len(),
            got: actual.len(),
        });
    }
    if reference.is_empty() {
        return Err(NavError::Empty("rmse over an empty log"));
    }
    let mut sum = DofVec::ZERO;
    for (r, a) in reference.iter().zip(actual) {
        for d in Dof::ALL {
            let e = dof_diff(d, r[d], a[d]);
            sum[d] += e * e;
        }
    }
    Ok(sum.map(|s| (s / reference.len() as f64).sqrt()))
}

/// Tracking RMSE (`x_d` vs `x`) of one agent.
pub fn tracking_rmse(log: &TrajectoryLog, agent: usize) -> Result<DofVec> {
    rmse(&log.channel(agent, Channel::Desired), &log.channel(agent, Channel::Pose))
}

/// Quintic point-to-point motion with zero boundary velocity and acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinJerk {
    pub start: DofVec,
    pub end: DofVec,
    pub duration: f64,
}

impl MinJerk {
    pub fn new(start: DofVec, end: DofVec, duration: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(NavError::invalid("duration", format!("must be > 0, got {duration}")));
        }
        Ok(Self { start, end, duration })
    }

    /// Position, velocity and acceleration at `t`, clamped to `[0, T]`.
    pub fn eval(&self, t: f64) -> (DofVec, DofVec, DofVec) {
        let big_t = self.duration;
        let s = (t / big_t).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        let p = 10.0 * s3 - 15.0 * s3 * s + 6.0 * s3 * s2;
        let v = (30.0 * s2 - 60.0 * s3 + 30.0 * s2 * s2) / big_t;
        let a = (60.0 * s - 180.0 * s2 + 120.0 * s3) / (big_t * big_t);
        let d = self.end - self.start;
        (self.start + d * p, d * v, d * a)
    }
}

/// Scalar convenience form of [`MinJerk::eval`].
pub fn min_jerk(x_start: f64, x_end: f64, duration: f64, t: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..=duration).contains(&t) {
        return Err(NavError::invalid("t", format!("must lie in [0, {duration}], got {t}")));
    }
    let mj = MinJerk::new(DofVec::splat(x_start), DofVec::splat(x_end), duration)?;
    let (p, v, a) = mj.eval(t);
    Ok((p[Dof::X], v[Dof::X], a[Dof::X]))
}

/// `max_t ‖M·v(t)‖`.
pub fn peak_momentum(velocity: &[DofVec], inertia: &DofVec) -> f64 {
    velocity
        .iter()
        .map(|v| {
            let q = v.zip(*inertia, |v, m| v * m);
            q.0.iter().map(|c| c * c).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

/// `max_t |vᵀ·M·a|`.
pub fn peak_power(velocity: &[DofVec], accel: &[DofVec], inertia: &DofVec) -> f64 {
    velocity
        .iter()
        .zip(accel)
        .map(|(v, a)| (0..6).map(|i| v.0[i] * inertia.0[i] * a.0[i]).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// Interval `[start, end)` during which one via-point was active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub via_index: usize,
    pub start: usize,
    pub end: usize,
}

/// Via-point hold intervals of one agent.
pub fn segments(log: &TrajectoryLog, agent: usize) -> Vec<Segment> {
    let idx = log.via_indices(agent);
    let targets = log.channel(agent, Channel::ViaPose);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=idx.len() {
        if i == idx.len() || idx[i] != idx[start] || targets[i] != targets[start] {
            out.push(Segment {
                via_index: idx[start],
                start,
                end: i,
            });
            start = i;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinJerkReport {
    pub planned_q: f64,
    pub planned_p: f64,
    pub min_jerk_q: f64,
    pub min_jerk_p: f64,
    /// Samples from the segment start until the band settled.
    pub samples: usize,
    pub duration: f64,
}

impl MinJerkReport {
    pub fn q_ratio(&self) -> f64 {
        ratio(self.planned_q, self.min_jerk_q)
    }

    pub fn p_ratio(&self) -> f64 {
        ratio(self.planned_p, self.min_jerk_p)
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// Compare a planned point-to-point motion against the minimum-jerk motion
/// with the same endpoints and duration.
///
/// The motion ends at the first sample where the band is within `1e-3` of the
/// move distance from the via-point (or at the segment end).
pub fn compare_with_min_jerk(
    log: &TrajectoryLog,
    agent: usize,
    segment: Segment,
    inertia: &DofVec,
) -> Result<MinJerkReport> {
    let s = &log.samples[agent][segment.start..segment.end];
    if s.len() < MIN_SEGMENT_SAMPLES {
        return Err(NavError::invalid(
            "segment",
            format!("{} samples, need at least {MIN_SEGMENT_SAMPLES}", s.len()),
        ));
    }
    let dofs = log.dofs(agent);
    let gap = |a: &DofVec, b: &DofVec| -> f64 {
        dofs.iter().map(|&d| dof_diff(d, a[d], b[d]).powi(2)).sum::<f64>().sqrt()
    };
    let target = *s[0].get(Channel::ViaPose);
    let start = *s[0].get(Channel::Desired);
    let distance = gap(&target, &start);
    let settled = s
        .iter()
        .position(|x| gap(&target, x.get(Channel::Desired)) <= 1e-3 * distance)
        .unwrap_or(s.len() - 1);
    let motion = &s[..=settled];
    let n = motion.len();
    if n < MIN_SEGMENT_SAMPLES && distance > 0.0 {
        return Err(NavError::invalid(
            "segment",
            format!("motion spans {n} samples, need at least {MIN_SEGMENT_SAMPLES}"),
        ));
    }
    let v: Vec<DofVec> = motion.iter().map(|x| *x.get(Channel::DesiredVel)).collect();
    let a: Vec<DofVec> = motion.iter().map(|x| *x.get(Channel::DesiredAcc)).collect();
    let planned_q = peak_momentum(&v, inertia);
    let planned_p = peak_power(&v, &a, inertia);
    let duration = (n - 1) as f64 * log.dt;
    if distance == 0.0 || duration <= 0.0 {
        return Ok(MinJerkReport {
            planned_q,
            planned_p,
            min_jerk_q: 0.0,
            min_jerk_p: 0.0,
            samples: n,
            duration,
        });
    }
    let end = *motion[n - 1].get(Channel::Desired);
    // unwrap angular endpoints so the reference moves the short way
    let mut end_unwrapped = start;
    for &d in dofs {
        end_unwrapped[d] = start[d] + dof_diff(d, end[d], start[d]);
    }
    let mj = MinJerk::new(start, end_unwrapped, duration)?;
    let (mut mv, mut ma) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let (_, vv, aa) = mj.eval(i as f64 * log.dt);
        mv.push(vv);
        ma.push(aa);
    }
    Ok(MinJerkReport {
        planned_q,
        planned_p,
        min_jerk_q: peak_momentum(&mv, inertia),
        min_jerk_p: peak_power(&mv, &ma, inertia),
        samples: n,
        duration,
    })
}

/// Central-difference derivative with one-sided ends.
pub fn finite_difference(values: &[DofVec], dt: f64) -> Vec<DofVec> {
    let n = values.len();
    (0..n)
        .map(|i| match (i, n) {
            (_, 0 | 1) => DofVec::ZERO,
            (0, _) => (values[1] - values[0]) * (1.0 / dt),
            (i, n) if i == n - 1 => (values[i] - values[i - 1]) * (1.0 / dt),
            (i, _) => (values[i + 1] - values[i - 1]) * (0.5 / dt),
        })
        .collect()
}
