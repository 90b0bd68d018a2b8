//! Passive navigation planning for mobile robots.
//!
//! A fractal impedance elastic band ([`band`]) turns via-points into a smooth
//! desired-state stream, and a fractal impedance region-of-attraction tracker
//! ([`tracker`]) turns that stream into a bounded control wrench. The
//! [`world`] module simulates multi-agent rigid bodies with repulsive bubbles,
//! obstacles and a viscous field; [`scenario`] loads scenario files, runs them
//! and writes CSV logs that [`metrics`] analyses.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod dof;
pub mod feedback;
pub mod fic;
pub mod log;
pub mod metrics;
pub mod scenario;
pub mod tracker;
pub mod via;
pub mod world;

pub use dof::{wrap_angle, Dof, DofVec, DOF_COUNT};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NavError {
    #[error("non-finite value for {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("invalid parameter {field}: {reason}")]
    InvalidParam { field: String, reason: String },

    #[error("time went backwards: {now} < {last}")]
    TimeRegression { now: f64, last: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("simulation halted at step {step}: agent {agent} has non-finite {what}")]
    SimulationHalt {
        step: u64,
        agent: String,
        what: &'static str,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("log format: {0}")]
    LogFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl NavError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        NavError::InvalidParam {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = NavError> = std::result::Result<T, E>;
