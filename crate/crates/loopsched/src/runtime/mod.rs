//! Multi-threaded execution engines for the scheduled loop.
//!
//! [`onesided`] implements distributed chunk calculation: workers share two
//! atomic counters and compute their own chunk sizes from the index-only
//! formulas. [`twosided`] implements the master-worker baseline: one PE
//! computes all chunks with the recursive formulas and serves work requests
//! over in-process queues.

pub mod onesided;
pub mod twosided;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::platform::PlatformSpec;
use crate::technique::LoopSpec;
use crate::workload::WorkloadKernel;

pub use onesided::{acquire_chunk, run_loop_onesided, AcquiredChunk, SchedulerState};
pub use twosided::{run_loop_twosided, ChunkAssignment, TwosidedOptions, WorkRequest};

/// One executed chunk, with wall-clock nanoseconds (from loop entry) for
/// each phase of its lifetime: fetching the step index, fetching the loop
/// start (or receiving the assignment), then executing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkTraceEntry {
    pub pe: usize,
    pub step: u64,
    pub start: u64,
    pub size: u64,
    pub t_fetch_step: u64,
    pub t_fetch_start: u64,
    pub t_begin: u64,
    pub t_end: u64,
}

/// Outcome of a threaded loop execution.
#[derive(Debug, Clone, Default)]
pub struct RunResult {
    pub trace: Vec<ChunkTraceEntry>,
    /// Nanoseconds each PE spent executing iterations.
    pub per_pe_busy: Vec<u64>,
    /// Nanoseconds from loop entry to each PE's last executed chunk end.
    pub per_pe_finish: Vec<u64>,
    pub per_pe_iterations: Vec<u64>,
    /// Parallel loop time: the latest chunk-execution end over all PEs.
    pub t_parallel_loop: u64,
    /// Scheduling steps issued, including fetches that found the loop
    /// already exhausted.
    pub total_steps: u64,
    /// Fetches that obtained a step index but no iterations.
    pub wasted_steps: u64,
    /// Chunk-calculation windows on the master (two-sided only); used to
    /// observe that centralized calculations are serialized.
    pub calc_spans: Vec<(u64, u64)>,
    /// Nanoseconds each served request waited at the master (two-sided only).
    pub served_waits: Vec<u64>,
}

impl RunResult {
    pub(crate) fn finalize(mut self) -> Self {
        self.t_parallel_loop = self.per_pe_finish.iter().copied().max().unwrap_or(0);
        self
    }

    /// Executed iteration ranges sorted by start, for coverage checks.
    pub fn sorted_ranges(&self) -> Vec<(u64, u64)> {
        let mut ranges: Vec<(u64, u64)> =
            self.trace.iter().map(|c| (c.start, c.start + c.size)).collect();
        ranges.sort_unstable();
        ranges
    }
}

pub(crate) fn elapsed_ns(epoch: Instant) -> u64 {
    epoch.elapsed().as_nanos() as u64
}

pub(crate) fn check_run_inputs<K: WorkloadKernel + ?Sized>(
    loop_spec: LoopSpec,
    kernel: &K,
    platform: &PlatformSpec,
) -> Result<()> {
    platform.validate()?;
    if platform.pe_count != loop_spec.p {
        return Err(Error::InvalidPlatform(format!(
            "platform has {} PEs but the loop is scheduled for {}",
            platform.pe_count, loop_spec.p
        )));
    }
    if kernel.len() != loop_spec.n {
        return Err(Error::InvalidWorkload(format!(
            "kernel has {} iterations but the loop has {}",
            kernel.len(),
            loop_spec.n
        )));
    }
    Ok(())
}

/// Pre-partitioned execution: PE `j` runs the `j`-th block of
/// `ceil(N/P)` iterations with no scheduling at all.
pub fn run_loop_static(
    loop_spec: LoopSpec,
    kernel: &(impl WorkloadKernel + ?Sized),
    platform: &PlatformSpec,
) -> Result<RunResult> {
    check_run_inputs(loop_spec, kernel, platform)?;
    let p = loop_spec.p;
    let block = loop_spec.n.div_ceil(p as u64);
    let epoch = Instant::now();
    let mut outcomes: Vec<Result<Option<ChunkTraceEntry>>> = Vec::with_capacity(p);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..p)
            .map(|pe| {
                let start = (pe as u64 * block).min(loop_spec.n);
                let end = ((pe as u64 + 1) * block).min(loop_spec.n);
                scope.spawn(move || -> Result<Option<ChunkTraceEntry>> {
                    if start >= end {
                        return Ok(None);
                    }
                    let t0 = elapsed_ns(epoch);
                    for iteration in start..end {
                        kernel.execute(iteration).map_err(|source| Error::Kernel {
                            pe,
                            step: pe as u64,
                            start,
                            size: end - start,
                            source,
                        })?;
                    }
                    let t1 = elapsed_ns(epoch);
                    Ok(Some(ChunkTraceEntry {
                        pe,
                        step: pe as u64,
                        start,
                        size: end - start,
                        t_fetch_step: t0,
                        t_fetch_start: t0,
                        t_begin: t0,
                        t_end: t1,
                    }))
                })
            })
            .collect();
        for handle in handles {
            outcomes.push(handle.join().expect("static worker panicked"));
        }
    });
    let mut result = RunResult {
        per_pe_busy: vec![0; p],
        per_pe_finish: vec![0; p],
        per_pe_iterations: vec![0; p],
        ..RunResult::default()
    };
    for outcome in outcomes {
        if let Some(entry) = outcome? {
            result.per_pe_busy[entry.pe] = entry.t_end - entry.t_begin;
            result.per_pe_finish[entry.pe] = entry.t_end;
            result.per_pe_iterations[entry.pe] = entry.size;
            result.total_steps += 1;
            result.trace.push(entry);
        }
    }
    Ok(result.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::SyntheticKernel;

    #[test]
    fn static_run_covers_all_iterations_once() {
        let kernel = SyntheticKernel::counting(103);
        let loop_spec = LoopSpec::new(103, 4).unwrap();
        let platform = PlatformSpec::homogeneous(4);
        let result = run_loop_static(loop_spec, &kernel, &platform).unwrap();
        assert!(kernel.execution_counts().iter().all(|&c| c == 1));
        assert_eq!(result.per_pe_iterations, vec![26, 26, 26, 25]);
        assert_eq!(result.trace.len(), 4);
    }

    #[test]
    fn static_run_with_more_pes_than_iterations() {
        let kernel = SyntheticKernel::counting(3);
        let loop_spec = LoopSpec::new(3, 8).unwrap();
        let platform = PlatformSpec::homogeneous(8);
        let result = run_loop_static(loop_spec, &kernel, &platform).unwrap();
        assert_eq!(kernel.execution_counts(), vec![1, 1, 1]);
        assert_eq!(result.per_pe_iterations.iter().sum::<u64>(), 3);
    }
}
