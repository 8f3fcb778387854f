//! Deterministic discrete-event simulation of both execution models on
//! heterogeneous platforms.
//!
//! Iteration costs come from a [`CostModel`](crate::cost::CostModel) and are
//! divided by per-PE speeds; coordination costs (counter RMWs, message hops,
//! request serving) come from the [`PlatformSpec`](crate::platform::PlatformSpec).
//! Simulations are bit-reproducible: events are ordered by (time, push
//! sequence) and the only randomness is the seeded tie-break between counter
//! accesses arriving at the same instant.

mod onesided;
mod queue;
mod replay;
mod twosided;

pub use onesided::simulate_onesided;
pub use replay::replay_schedule;
pub use twosided::{simulate_twosided, simulate_twosided_with, RequestTiming};

use serde::{Deserialize, Serialize};

/// One chunk execution in simulated time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimTraceEntry {
    pub pe: usize,
    pub step: u64,
    pub start: u64,
    pub size: u64,
    /// When the chunk was in the PE's hands (counters accumulated or
    /// assignment delivered).
    pub t_dispatch: f64,
    pub t_begin: f64,
    pub t_end: f64,
}

/// Outcome of one simulation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimResult {
    /// Parallel loop time: the latest chunk-execution end over all PEs.
    pub t_parallel_loop: f64,
    pub per_pe_finish: Vec<f64>,
    pub per_pe_busy: Vec<f64>,
    pub per_pe_iterations: Vec<u64>,
    pub trace: Vec<SimTraceEntry>,
    /// Seconds each served request waited at the master before its chunk
    /// calculation began. Two-sided only; empty for the one-sided model.
    pub served_waits: Vec<f64>,
    /// Scheduling steps that assigned work.
    pub total_steps: u64,
    /// Step indices consumed by fetches that found the loop exhausted
    /// (one-sided only).
    pub wasted_steps: u64,
}

impl SimResult {
    pub(crate) fn new(pe_count: usize) -> Self {
        SimResult {
            per_pe_finish: vec![0.0; pe_count],
            per_pe_busy: vec![0.0; pe_count],
            per_pe_iterations: vec![0; pe_count],
            ..SimResult::default()
        }
    }

    pub(crate) fn finalize(mut self) -> Self {
        self.t_parallel_loop = self.per_pe_finish.iter().copied().fold(0.0, f64::max);
        self.trace.sort_by(|a, b| a.step.cmp(&b.step));
        self.total_steps = self.trace.len() as u64;
        self
    }
}

/// Seed for the tie-break stream, decorrelated from the cost-model stream.
pub(crate) fn tie_break_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}
