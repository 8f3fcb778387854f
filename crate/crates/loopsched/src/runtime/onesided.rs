//! Distributed chunk calculation over shared atomic counters.
//!
//! The scheduler state is just two integers: the global scheduling step and
//! the first unscheduled loop iteration. A worker that wants work performs
//!
//! 1. `fetch_add(step, 1)` to claim a step index,
//! 2. a local, index-only chunk-size calculation for that step,
//! 3. `fetch_add(loop_start, K)` to claim the iteration range.
//!
//! The two fetch-adds are the only serialization points; no worker ever
//! waits for another worker's chunk calculation or execution. Because steps
//! 1 and 3 are separate atomics, a worker holding a later step index may
//! claim an earlier iteration range — iteration order is not monotonic in
//! the step index, which is harmless for independent iterations.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::platform::PlatformSpec;
use crate::runtime::{check_run_inputs, elapsed_ns, ChunkTraceEntry, RunResult};
use crate::technique::{chunk_transformed, LoopSpec, TechniqueConfig};
use crate::workload::WorkloadKernel;

/// Shared scheduler state. Both counters only ever grow; the loop is
/// exhausted once `loop_start` reaches the iteration count.
#[derive(Debug)]
pub struct SchedulerState {
    step_counter: AtomicU64,
    loop_start: AtomicU64,
    n: u64,
}

/// A successfully claimed chunk: the fetched step index, the first
/// iteration, and the clamped size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcquiredChunk {
    pub step: u64,
    pub start: u64,
    pub size: u64,
}

impl SchedulerState {
    pub fn new(n: u64) -> Self {
        SchedulerState { step_counter: AtomicU64::new(0), loop_start: AtomicU64::new(0), n }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of step indices handed out so far.
    pub fn step_counter(&self) -> u64 {
        self.step_counter.load(Ordering::SeqCst)
    }

    pub fn loop_start(&self) -> u64 {
        self.loop_start.load(Ordering::SeqCst)
    }
}

/// Claims the next chunk for `pe`, or `None` once the loop is exhausted.
/// Exhausted calls still consume a step index; that is the normal shutdown
/// signal, not an error.
///
/// `config` must already be validated for the loop's PE count; an invalid
/// configuration is a caller bug and panics.
pub fn acquire_chunk(
    state: &SchedulerState,
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    pe: usize,
) -> Option<AcquiredChunk> {
    let (chunk, _, _) = acquire_chunk_timed(state, config, loop_spec, pe);
    chunk
}

/// As [`acquire_chunk`] but also reports the two fetch instants so the
/// runtime can timestamp the trace. Times are measured by the caller's
/// clock; this function returns the claimed values plus the computed size.
fn acquire_chunk_timed(
    state: &SchedulerState,
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    pe: usize,
) -> (Option<AcquiredChunk>, u64, u64) {
    let step = state.step_counter.fetch_add(1, Ordering::SeqCst);
    let size = chunk_transformed(config, loop_spec, step, pe)
        .expect("technique config validated before the run");
    let start = state.loop_start.fetch_add(size, Ordering::SeqCst);
    if start >= state.n {
        (None, step, size)
    } else {
        (Some(AcquiredChunk { step, start, size: size.min(state.n - start) }), step, size)
    }
}

/// Runs the loop with one worker thread per PE, each looping on
/// [`acquire_chunk`] and executing its claimed iterations.
///
/// The platform's speeds and latencies are not simulated here — threads run
/// at native speed; heterogeneity experiments belong to the simulator. Only
/// `pe_count` is used.
pub fn run_loop_onesided(
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    kernel: &(impl WorkloadKernel + ?Sized),
    platform: &PlatformSpec,
) -> Result<RunResult> {
    config.validate(loop_spec.p)?;
    check_run_inputs(loop_spec, kernel, platform)?;
    let state = SchedulerState::new(loop_spec.n);
    let epoch = Instant::now();
    let mut outcomes: Vec<Result<WorkerOutcome>> = Vec::with_capacity(loop_spec.p);
    std::thread::scope(|scope| {
        let state = &state;
        let handles: Vec<_> = (0..loop_spec.p)
            .map(|pe| scope.spawn(move || worker(pe, state, config, loop_spec, kernel, epoch)))
            .collect();
        for handle in handles {
            outcomes.push(handle.join().expect("one-sided worker panicked"));
        }
    });

    let mut result = RunResult {
        per_pe_busy: vec![0; loop_spec.p],
        per_pe_finish: vec![0; loop_spec.p],
        per_pe_iterations: vec![0; loop_spec.p],
        total_steps: state.step_counter(),
        ..RunResult::default()
    };
    for outcome in outcomes {
        let out = outcome?;
        result.per_pe_busy[out.pe] = out.busy;
        result.per_pe_finish[out.pe] = out.finish;
        result.per_pe_iterations[out.pe] = out.iterations;
        result.wasted_steps += out.wasted;
        result.trace.extend(out.trace);
    }
    result.trace.sort_by_key(|c| c.step);
    Ok(result.finalize())
}

struct WorkerOutcome {
    pe: usize,
    trace: Vec<ChunkTraceEntry>,
    busy: u64,
    finish: u64,
    iterations: u64,
    wasted: u64,
}

fn worker(
    pe: usize,
    state: &SchedulerState,
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    kernel: &(impl WorkloadKernel + ?Sized),
    epoch: Instant,
) -> Result<WorkerOutcome> {
    let mut out =
        WorkerOutcome { pe, trace: Vec::new(), busy: 0, finish: 0, iterations: 0, wasted: 0 };
    loop {
        let t_fetch_step = elapsed_ns(epoch);
        let step = state.step_counter.fetch_add(1, Ordering::SeqCst);
        let size = chunk_transformed(config, loop_spec, step, pe)
            .expect("technique config validated before the run");
        let t_fetch_start = elapsed_ns(epoch);
        let start = state.loop_start.fetch_add(size, Ordering::SeqCst);
        if start >= state.n {
            out.wasted += 1;
            return Ok(out);
        }
        let size = size.min(state.n - start);
        let t_begin = elapsed_ns(epoch);
        for iteration in start..start + size {
            kernel.execute(iteration).map_err(|source| Error::Kernel {
                pe,
                step,
                start,
                size,
                source,
            })?;
        }
        let t_end = elapsed_ns(epoch);
        out.trace.push(ChunkTraceEntry {
            pe,
            step,
            start,
            size,
            t_fetch_step,
            t_fetch_start,
            t_begin,
            t_end,
        });
        out.busy += t_end - t_begin;
        out.iterations += size;
        out.finish = t_end;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::technique::{generate_schedule, Mode, Technique};
    use crate::workload::{KernelError, SyntheticKernel};
    use std::collections::BTreeSet;

    fn plain(kind: Technique) -> TechniqueConfig {
        TechniqueConfig::plain(kind)
    }

    #[test]
    fn single_iteration_loop_yields_one_chunk_then_none() {
        let state = SchedulerState::new(1);
        let l = LoopSpec::new(1, 1).unwrap();
        let cfg = plain(Technique::Ss);
        assert_eq!(
            acquire_chunk(&state, &cfg, l, 0),
            Some(AcquiredChunk { step: 0, start: 0, size: 1 })
        );
        assert_eq!(acquire_chunk(&state, &cfg, l, 0), None);
    }

    #[test]
    fn exhausted_fetches_still_consume_steps() {
        let state = SchedulerState::new(4);
        let l = LoopSpec::new(4, 2).unwrap();
        let cfg = plain(Technique::Static);
        assert!(acquire_chunk(&state, &cfg, l, 0).is_some());
        assert!(acquire_chunk(&state, &cfg, l, 1).is_some());
        for _ in 0..3 {
            assert!(acquire_chunk(&state, &cfg, l, 0).is_none());
        }
        assert_eq!(state.step_counter(), 5);
        assert!(state.loop_start() >= 4);
    }

    #[test]
    fn static_split_gives_each_pe_half() {
        // Iterations cost enough that neither thread can drain the whole
        // loop before the other's first fetch.
        let kernel = SyntheticKernel::from_costs(vec![5e-5; 100]);
        let l = LoopSpec::new(100, 2).unwrap();
        let result =
            run_loop_onesided(&plain(Technique::Static), l, &kernel, &PlatformSpec::homogeneous(2))
                .unwrap();
        assert_eq!(result.per_pe_iterations, vec![50, 50]);
        assert!(kernel.execution_counts().iter().all(|&c| c == 1));
    }

    #[test]
    fn gss_chunk_sizes_match_the_index_only_sequence() {
        // Iteration ranges may land in any order, but the sizes must be the
        // first steps of the index-only sequence whenever no step was lost
        // to an exhaustion race.
        let l = LoopSpec::new(10, 2).unwrap();
        let cfg = plain(Technique::Gss);
        for _ in 0..50 {
            let kernel = SyntheticKernel::counting(10);
            let result =
                run_loop_onesided(&cfg, l, &kernel, &PlatformSpec::homogeneous(2)).unwrap();
            assert!(kernel.execution_counts().iter().all(|&c| c == 1));
            let ranges = result.sorted_ranges();
            assert_eq!(ranges.first().map(|r| r.0), Some(0));
            assert_eq!(ranges.last().map(|r| r.1), Some(10));

            let executed: BTreeSet<u64> = result.trace.iter().map(|c| c.step).collect();
            let clean_prefix = executed.iter().max().map_or(true, |&m| m + 1 == executed.len() as u64);
            if clean_prefix {
                let mut sizes: Vec<u64> = result
                    .trace
                    .iter()
                    .map(|c| chunk_transformed(&cfg, l, c.step, c.pe).unwrap())
                    .collect();
                sizes.sort_unstable();
                let mut expected: Vec<u64> = (0..executed.len() as u64)
                    .map(|i| chunk_transformed(&cfg, l, i, 0).unwrap())
                    .collect();
                expected.sort_unstable();
                assert_eq!(sizes, expected);
            }
        }
    }

    #[test]
    fn trace_and_schedule_agree_for_single_worker() {
        let l = LoopSpec::new(1000, 1).unwrap();
        for kind in Technique::ALL {
            let cfg = match kind {
                Technique::Wf => TechniqueConfig::weighted(vec![1.0]),
                _ => plain(kind),
            };
            let kernel = SyntheticKernel::counting(1000);
            let result =
                run_loop_onesided(&cfg, l, &kernel, &PlatformSpec::homogeneous(1)).unwrap();
            let schedule = generate_schedule(&cfg, l, Mode::Transformed, |_| 0).unwrap();
            let got: Vec<(u64, u64)> =
                result.trace.iter().map(|c| (c.start, c.size)).collect();
            let expected: Vec<(u64, u64)> =
                schedule.chunks.iter().map(|c| (c.start, c.size)).collect();
            assert_eq!(got, expected, "{kind:?}");
        }
    }

    #[test]
    fn kernel_failures_identify_the_owning_chunk() {
        struct FailAt(u64, u64);
        impl WorkloadKernel for FailAt {
            fn len(&self) -> u64 {
                self.1
            }
            fn execute(&self, iteration: u64) -> std::result::Result<(), KernelError> {
                if iteration == self.0 {
                    Err(KernelError::Failed("injected".into()))
                } else {
                    Ok(())
                }
            }
        }
        let kernel = FailAt(7, 16);
        let l = LoopSpec::new(16, 2).unwrap();
        let err =
            run_loop_onesided(&plain(Technique::Static), l, &kernel, &PlatformSpec::homogeneous(2))
                .unwrap_err();
        match err {
            Error::Kernel { start, size, .. } => {
                assert!(start <= 7 && 7 < start + size);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn timestamps_are_ordered_within_each_entry() {
        let kernel = SyntheticKernel::counting(64);
        let l = LoopSpec::new(64, 4).unwrap();
        let result =
            run_loop_onesided(&plain(Technique::Fac2), l, &kernel, &PlatformSpec::homogeneous(4))
                .unwrap();
        for c in &result.trace {
            assert!(c.t_fetch_step <= c.t_fetch_start);
            assert!(c.t_fetch_start <= c.t_begin);
            assert!(c.t_begin <= c.t_end);
        }
        assert_eq!(result.t_parallel_loop, *result.per_pe_finish.iter().max().unwrap());
    }
}
