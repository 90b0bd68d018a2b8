//! Zero-order-hold feedback: controllers see the state sampled on a fixed
//! grid of `1/rate` seconds and held between samples.

use crate::dof::DofVec;
use crate::{NavError, Result};

/// Slack absorbing float drift in `t·rate` at grid points.
const GRID_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ZohChannel {
    /// Sampling rate in Hz; `None` passes the truth straight through.
    rate: Option<f64>,
    held: Option<(i64, DofVec, DofVec)>,
    last_query: f64,
}

impl ZohChannel {
    pub fn new(rate: Option<f64>) -> Result<Self> {
        if let Some(r) = rate {
            if !(r > 0.0 && r.is_finite()) {
                return Err(NavError::invalid("feedback_hz", format!("must be > 0, got {r}")));
            }
        }
        Ok(Self {
            rate,
            held: None,
            last_query: f64::NEG_INFINITY,
        })
    }

    pub fn pass_through() -> Self {
        Self {
            rate: None,
            held: None,
            last_query: f64::NEG_INFINITY,
        }
    }

    pub fn rate(&self) -> Option<f64> {
        self.rate
    }

    /// Time of the held sample, if any.
    pub fn last_sample_time(&self) -> Option<f64> {
        match (self.rate, &self.held) {
            (Some(r), Some((k, _, _))) => Some(*k as f64 / r),
            _ => None,
        }
    }

    /// Pose and twist the controller sees at time `t`.
    pub fn sample(&mut self, pose: &DofVec, twist: &DofVec, t: f64) -> Result<(DofVec, DofVec)> {
        if !t.is_finite() {
            return Err(NavError::NonFinite { what: "t", value: t });
        }
        if t < self.last_query {
            return Err(NavError::TimeRegression {
                now: t,
                last: self.last_query,
            });
        }
        self.last_query = t;
        let Some(rate) = self.rate else {
            return Ok((*pose, *twist));
        };
        let k = ((t + GRID_EPS) * rate).floor() as i64;
        match &self.held {
            Some((held_k, p, v)) if *held_k >= k => Ok((*p, *v)),
            _ => {
                self.held = Some((k, *pose, *twist));
                Ok((*pose, *twist))
            }
        }
    }
}
