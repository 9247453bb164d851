//! Trace-driven simulation of a multi-tenant orbital edge computing (OEC)
//! satellite that runs tenant functions as serverless invocations, plus an
//! offline feasibility planner for admission decisions.
//!
//! The satellite captures one multi-spectral frame per period, prefilters
//! dark and cloudy frames, and enqueues one invocation per deployed function
//! for every kept frame. The executor time-shifts work: invocations are
//! dequeued only while battery state of charge and chip temperature permit,
//! and their outputs accumulate in a downlink buffer that drains during
//! ground station contact windows. The invocation queue is persisted so the
//! executor survives hard resets (e.g. after a single-event upset).
//!
//! Modules follow the pipeline:
//!
//! - [`traces`] — telemetry ingestion: power traces, trajectories, ground
//!   stations, contact schedules, and solar geometry.
//! - [`platform`] — battery state of charge and first-order chip thermals.
//! - [`framesource`] — frame stream generation/replay and prefiltering.
//! - [`workload`] — tenant function profiles and invocation simulation.
//! - [`executor`] — the simulation loop, gating, downlink, persistence,
//!   and fault injection.
//! - [`planner`] — closed-form power/downlink/latency admission constraints.
//! - [`config`] — run configuration files and output writing.
//! - [`scenario`] — a synthetic reference scenario (traces, profiles,
//!   ready-made run configs) used by the examples and tests.

use serde::{Deserialize, Serialize};

pub mod config;
pub mod executor;
pub mod framesource;
pub mod planner;
pub mod platform;
pub mod scenario;
pub mod traces;
pub mod workload;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty trace")]
    EmptyTrace,
    #[error("{file}:{line}: {msg}")]
    Malformed {
        file: String,
        line: u64,
        msg: String,
    },
    #[error("timestamps not strictly increasing (t={t} follows t={prev})")]
    NonMonotonicTime { prev: f64, t: f64 },
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("time {t} precedes trace start {start}")]
    BeforeStart { t: f64, start: f64 },
    #[error("time {t} outside trajectory span [{start}, {end}]")]
    OutsideSpan { t: f64, start: f64, end: f64 },
    #[error("no samples")]
    NoSamples,
    #[error("cannot enumerate subsets of {n} functions (limit {max})")]
    TooManyFunctions { n: usize, max: usize },
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("non-positive rate")]
    NonPositiveRate,
    #[error("config: {0}")]
    Config(String),
    #[error("simulation: {0}")]
    Sim(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Radio link parameters shared by the executor, planner, and uplink model.
///
/// Rates are raw channel rates in bits per second; `overhead` is the fraction
/// lost to protocol and error correction, so the usable downlink rate is
/// `downlink_bps * (1 - overhead)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinkConfig {
    pub downlink_bps: f64,
    pub uplink_bps: f64,
    pub overhead: f64,
    pub antenna_power_w: f64,
}

impl LinkConfig {
    pub fn effective_downlink_bps(&self) -> f64 {
        self.downlink_bps * (1.0 - self.overhead)
    }

    pub fn effective_uplink_bps(&self) -> f64 {
        self.uplink_bps * (1.0 - self.overhead)
    }

    pub fn validate(&self) -> Result<()> {
        if self.downlink_bps <= 0.0 || self.uplink_bps <= 0.0 {
            return Err(Error::NonPositiveRate);
        }
        if !(0.0..1.0).contains(&self.overhead) {
            return Err(Error::OutOfRange(format!(
                "link overhead {} not in [0, 1)",
                self.overhead
            )));
        }
        if self.antenna_power_w < 0.0 {
            return Err(Error::OutOfRange("negative antenna power".into()));
        }
        Ok(())
    }
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            downlink_bps: 100e6,
            uplink_bps: 1e6,
            overhead: 0.20,
            antenna_power_w: 20.0,
        }
    }
}
