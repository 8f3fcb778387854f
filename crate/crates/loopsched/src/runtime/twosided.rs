//! Master-worker baseline with centralized chunk calculation.
//!
//! One PE (the master) owns the recursive scheduler state and serves work
//! requests from the others over in-process queues. The master is
//! non-dedicated: it executes its own chunks in slices of
//! `serve_granularity` iterations and polls the request queue between
//! slices, so requests arriving mid-slice wait. Among simultaneously
//! pending requests the lowest PE index is always served first.
//!
//! By default a worker requests its next chunk only after finishing the
//! current one, leaving the master's response time on the worker's critical
//! path; [`RequestTiming::Overlapped`] double-buffers requests instead.

use std::collections::BTreeMap;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::platform::PlatformSpec;
use crate::runtime::{check_run_inputs, elapsed_ns, ChunkTraceEntry, RunResult};
use crate::sim::RequestTiming;
use crate::technique::{LoopSpec, RecursiveChunker, TechniqueConfig};
use crate::workload::WorkloadKernel;

/// A worker asking the master for its next chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkRequest {
    pub pe: usize,
    /// Nanoseconds from loop entry when the request was posted.
    pub t_sent: u64,
}

/// The master's reply: an iteration range, or a terminal marker once the
/// loop is exhausted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkAssignment {
    pub step: u64,
    pub start: u64,
    pub size: u64,
    pub terminal: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct TwosidedOptions {
    /// Iterations the master executes between request-queue polls.
    pub serve_granularity: u64,
    /// When workers post their next request.
    pub request_timing: RequestTiming,
    /// Abort with a diagnostic if a worker or the idle master sees no
    /// message for this long.
    pub deadlock_timeout: Duration,
}

impl Default for TwosidedOptions {
    fn default() -> Self {
        TwosidedOptions {
            serve_granularity: 1,
            request_timing: RequestTiming::default(),
            deadlock_timeout: Duration::from_secs(30),
        }
    }
}

/// Runs the loop under the master-worker model with the default deadlock
/// budget. The master is the platform's coordinator PE.
pub fn run_loop_twosided(
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    kernel: &(impl WorkloadKernel + ?Sized),
    platform: &PlatformSpec,
    serve_granularity: u64,
) -> Result<RunResult> {
    run_loop_twosided_with(
        config,
        loop_spec,
        kernel,
        platform,
        TwosidedOptions { serve_granularity, ..TwosidedOptions::default() },
    )
}

pub fn run_loop_twosided_with(
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    kernel: &(impl WorkloadKernel + ?Sized),
    platform: &PlatformSpec,
    options: TwosidedOptions,
) -> Result<RunResult> {
    config.validate(loop_spec.p)?;
    check_run_inputs(loop_spec, kernel, platform)?;
    if options.serve_granularity == 0 {
        return Err(Error::InvalidConfig("serve granularity must be >= 1".into()));
    }
    let master_pe = platform.coordinator_pe;
    let chunker = RecursiveChunker::new(config.clone(), loop_spec)?;
    let epoch = Instant::now();

    let (request_tx, request_rx) = mpsc::channel::<WorkRequest>();
    let mut assignment_channels: Vec<Option<(Sender<ChunkAssignment>, Receiver<ChunkAssignment>)>> =
        (0..loop_spec.p).map(|_| Some(mpsc::channel())).collect();

    let mut worker_outcomes: Vec<Result<PeOutcome>> = Vec::new();
    let mut master_outcome: Option<Result<MasterOutcome>> = None;
    std::thread::scope(|scope| {
        let mut assignment_txs: Vec<Option<Sender<ChunkAssignment>>> =
            vec![None; loop_spec.p];
        let mut handles = Vec::new();
        for pe in 0..loop_spec.p {
            if pe == master_pe {
                assignment_channels[pe] = None;
                continue;
            }
            let (tx, rx) = assignment_channels[pe].take().unwrap();
            assignment_txs[pe] = Some(tx);
            let request_tx = request_tx.clone();
            handles.push(scope.spawn(move || {
                worker(pe, request_tx, rx, kernel, epoch, platform.comm_latency, options)
            }));
        }
        drop(request_tx);
        let master_handle = scope.spawn(|| {
            master(master_pe, chunker, request_rx, assignment_txs, kernel, epoch, options)
        });
        for handle in handles {
            worker_outcomes.push(handle.join().expect("two-sided worker panicked"));
        }
        master_outcome = Some(master_handle.join().expect("two-sided master panicked"));
    });

    let master_out = master_outcome.unwrap();
    // A kernel failure is the root cause; report it ahead of any secondary
    // shutdown noise from the other threads.
    let mut first_error = None;
    let mut pe_outcomes = Vec::new();
    for outcome in worker_outcomes.into_iter().chain([master_out.map(|m| m.pe_outcome)]) {
        match outcome {
            Ok(out) => pe_outcomes.push(out),
            Err(e @ Error::Kernel { .. }) => return Err(e),
            Err(e) => first_error = Some(first_error.unwrap_or(e)),
        }
    }
    if let Some(e) = first_error {
        return Err(e);
    }

    let mut result = RunResult {
        per_pe_busy: vec![0; loop_spec.p],
        per_pe_finish: vec![0; loop_spec.p],
        per_pe_iterations: vec![0; loop_spec.p],
        ..RunResult::default()
    };
    for out in pe_outcomes {
        result.per_pe_busy[out.pe] = out.busy;
        result.per_pe_finish[out.pe] = out.finish;
        result.per_pe_iterations[out.pe] = out.iterations;
        result.trace.extend(out.trace);
        result.calc_spans.extend(out.calc_spans);
        result.served_waits.extend(out.served_waits);
    }
    result.trace.sort_by_key(|c| c.step);
    result.total_steps = result.trace.len() as u64;
    Ok(result.finalize())
}

#[derive(Default)]
struct PeOutcome {
    pe: usize,
    trace: Vec<ChunkTraceEntry>,
    busy: u64,
    finish: u64,
    iterations: u64,
    calc_spans: Vec<(u64, u64)>,
    served_waits: Vec<u64>,
}

struct MasterOutcome {
    pe_outcome: PeOutcome,
}

struct OwnChunk {
    step: u64,
    start: u64,
    size: u64,
    done: u64,
    t_begin: u64,
}

#[allow(clippy::too_many_arguments)]
fn master(
    master_pe: usize,
    mut chunker: RecursiveChunker,
    request_rx: Receiver<WorkRequest>,
    assignment_txs: Vec<Option<Sender<ChunkAssignment>>>,
    kernel: &(impl WorkloadKernel + ?Sized),
    epoch: Instant,
    options: TwosidedOptions,
) -> Result<MasterOutcome> {
    let worker_count = assignment_txs.iter().filter(|t| t.is_some()).count();
    let mut out = PeOutcome { pe: master_pe, ..PeOutcome::default() };
    let mut pending: BTreeMap<usize, u64> = BTreeMap::new();
    let mut own: Option<OwnChunk> = None;
    let mut finished_workers = 0usize;
    loop {
        while let Ok(req) = request_rx.try_recv() {
            pending.insert(req.pe, req.t_sent);
        }
        // Serve every pending request, lowest rank first, before touching
        // own work again.
        if let Some((&pe, &t_sent)) = pending.first_key_value() {
            pending.remove(&pe);
            let t_calc_begin = elapsed_ns(epoch);
            let chunk = chunker.next(pe);
            let t_calc_end = elapsed_ns(epoch);
            out.calc_spans.push((t_calc_begin, t_calc_end));
            out.served_waits.push(t_calc_begin.saturating_sub(t_sent));
            let assignment = match chunk {
                Some(c) => {
                    ChunkAssignment { step: c.step, start: c.start, size: c.size, terminal: false }
                }
                None => {
                    finished_workers += 1;
                    ChunkAssignment { step: 0, start: 0, size: 0, terminal: true }
                }
            };
            let tx = assignment_txs[pe].as_ref().expect("request from a live worker");
            if tx.send(assignment).is_err() && !assignment.terminal {
                // Worker already gone (kernel failure); stop expecting it.
                finished_workers += 1;
            }
            continue;
        }
        if own.is_none() && chunker.remaining() > 0 {
            let t_calc_begin = elapsed_ns(epoch);
            let chunk = chunker.next(master_pe).expect("remaining checked above");
            let t_calc_end = elapsed_ns(epoch);
            out.calc_spans.push((t_calc_begin, t_calc_end));
            own = Some(OwnChunk {
                step: chunk.step,
                start: chunk.start,
                size: chunk.size,
                done: 0,
                t_begin: 0,
            });
        }
        if let Some(o) = own.as_mut() {
            if o.done == 0 {
                o.t_begin = elapsed_ns(epoch);
            }
            let slice_end = (o.done + options.serve_granularity).min(o.size);
            let t_slice_begin = elapsed_ns(epoch);
            for iteration in o.start + o.done..o.start + slice_end {
                kernel.execute(iteration).map_err(|source| Error::Kernel {
                    pe: master_pe,
                    step: o.step,
                    start: o.start,
                    size: o.size,
                    source,
                })?;
            }
            let t_slice_end = elapsed_ns(epoch);
            out.busy += t_slice_end - t_slice_begin;
            o.done = slice_end;
            if o.done == o.size {
                out.trace.push(ChunkTraceEntry {
                    pe: master_pe,
                    step: o.step,
                    start: o.start,
                    size: o.size,
                    t_fetch_step: o.t_begin,
                    t_fetch_start: o.t_begin,
                    t_begin: o.t_begin,
                    t_end: t_slice_end,
                });
                out.iterations += o.size;
                out.finish = t_slice_end;
                own = None;
            }
            continue;
        }
        // Loop exhausted and the master is idle; wait for the remaining
        // workers to ask for (terminal) assignments.
        if finished_workers >= worker_count {
            break;
        }
        match request_rx.recv_timeout(options.deadlock_timeout) {
            Ok(req) => {
                pending.insert(req.pe, req.t_sent);
            }
            Err(RecvTimeoutError::Disconnected) => break,
            Err(RecvTimeoutError::Timeout) => {
                return Err(Error::Deadlock(format!(
                    "master idle for {:?} with {} of {worker_count} workers unfinished",
                    options.deadlock_timeout,
                    worker_count - finished_workers
                )));
            }
        }
    }
    Ok(MasterOutcome { pe_outcome: out })
}

fn worker(
    pe: usize,
    request_tx: Sender<WorkRequest>,
    assignment_rx: Receiver<ChunkAssignment>,
    kernel: &(impl WorkloadKernel + ?Sized),
    epoch: Instant,
    comm_latency: f64,
    options: TwosidedOptions,
) -> Result<PeOutcome> {
    let mut out = PeOutcome { pe, ..PeOutcome::default() };
    let _ = request_tx.send(WorkRequest { pe, t_sent: elapsed_ns(epoch) });
    loop {
        let assignment = match assignment_rx.recv_timeout(options.deadlock_timeout) {
            Ok(a) => a,
            // Master exited early (its own failure is reported separately).
            Err(RecvTimeoutError::Disconnected) => return Ok(out),
            Err(RecvTimeoutError::Timeout) => {
                return Err(Error::Deadlock(format!(
                    "worker {pe} waited {:?} without an assignment",
                    options.deadlock_timeout
                )));
            }
        };
        let t_recv = elapsed_ns(epoch);
        if assignment.terminal {
            return Ok(out);
        }
        if comm_latency > 0.0 {
            // Threads run in one address space; approximate the two message
            // hops by delaying the worker for a full round trip.
            std::thread::sleep(Duration::from_secs_f64(2.0 * comm_latency));
        }
        if options.request_timing == RequestTiming::Overlapped {
            let _ = request_tx.send(WorkRequest { pe, t_sent: elapsed_ns(epoch) });
        }
        let t_begin = elapsed_ns(epoch);
        for iteration in assignment.start..assignment.start + assignment.size {
            kernel.execute(iteration).map_err(|source| Error::Kernel {
                pe,
                step: assignment.step,
                start: assignment.start,
                size: assignment.size,
                source,
            })?;
        }
        let t_end = elapsed_ns(epoch);
        if options.request_timing == RequestTiming::OnFinish {
            let _ = request_tx.send(WorkRequest { pe, t_sent: t_end });
        }
        out.trace.push(ChunkTraceEntry {
            pe,
            step: assignment.step,
            start: assignment.start,
            size: assignment.size,
            t_fetch_step: t_recv,
            t_fetch_start: t_recv,
            t_begin,
            t_end,
        });
        out.busy += t_end - t_begin;
        out.iterations += assignment.size;
        out.finish = t_end;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::technique::{Technique, TechniqueConfig};
    use crate::workload::{KernelError, SyntheticKernel};

    fn plain(kind: Technique) -> TechniqueConfig {
        TechniqueConfig::plain(kind)
    }

    #[test]
    fn ss_serializes_chunk_calculations_through_the_master() {
        let kernel = SyntheticKernel::counting(10);
        let l = LoopSpec::new(10, 2).unwrap();
        let result =
            run_loop_twosided(&plain(Technique::Ss), l, &kernel, &PlatformSpec::homogeneous(2), 1)
                .unwrap();
        assert!(kernel.execution_counts().iter().all(|&c| c == 1));
        assert!(result.trace.iter().all(|c| c.size == 1));
        // Chunk calculations never overlap: all spans are disjoint in time.
        let mut spans = result.calc_spans.clone();
        spans.sort_unstable();
        for pair in spans.windows(2) {
            assert!(pair[0].1 <= pair[1].0, "calc spans overlap: {pair:?}");
        }
        // One calculation per executed chunk plus one terminal reply for the
        // single worker.
        assert_eq!(spans.len(), result.total_steps as usize + 1);
    }

    #[test]
    fn gss_master_computes_the_recursive_sequence() {
        let kernel = SyntheticKernel::counting(10);
        let l = LoopSpec::new(10, 2).unwrap();
        let result =
            run_loop_twosided(&plain(Technique::Gss), l, &kernel, &PlatformSpec::homogeneous(2), 1)
                .unwrap();
        let mut sizes: Vec<u64> = result.trace.iter().map(|c| c.size).collect();
        // Steps are globally ordered by the master.
        assert_eq!(sizes.len(), 4);
        sizes.sort_unstable();
        let mut expected = vec![5, 3, 1, 1];
        expected.sort_unstable();
        assert_eq!(sizes, expected);
        assert!(kernel.execution_counts().iter().all(|&c| c == 1));
    }

    #[test]
    fn fac2_balances_equal_workers_within_a_batch() {
        let kernel = SyntheticKernel::from_costs(vec![2e-5; 4096]);
        let l = LoopSpec::new(4096, 4).unwrap();
        let result =
            run_loop_twosided(&plain(Technique::Fac2), l, &kernel, &PlatformSpec::homogeneous(4), 1)
                .unwrap();
        let max = *result.per_pe_iterations.iter().max().unwrap();
        let min = *result.per_pe_iterations.iter().min().unwrap();
        // Counts stay within one batch width (the first batch spans N/2 =
        // 2048 iterations): a worker can double-buffer one extra first-batch
        // chunk during warmup and stay a chunk ahead in later batches, but
        // can never hoard a whole extra batch.
        assert!(max - min < 2048, "imbalance {max}-{min}");
    }

    #[test]
    fn single_pe_degenerates_to_sequential_master() {
        let kernel = SyntheticKernel::counting(9);
        let l = LoopSpec::new(9, 1).unwrap();
        let result =
            run_loop_twosided(&plain(Technique::Gss), l, &kernel, &PlatformSpec::homogeneous(1), 2)
                .unwrap();
        assert_eq!(kernel.execution_counts(), vec![1; 9]);
        assert_eq!(result.per_pe_iterations, vec![9]);
    }

    #[test]
    fn master_kernel_failure_surfaces_with_chunk_identity() {
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
        let kernel = FailAt(0, 64);
        let l = LoopSpec::new(64, 3).unwrap();
        let err = run_loop_twosided(
            &plain(Technique::Gss),
            l,
            &kernel,
            &PlatformSpec::homogeneous(3),
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Kernel { .. }), "got {err}");
    }

    #[test]
    fn zero_granularity_is_rejected() {
        let kernel = SyntheticKernel::counting(4);
        let l = LoopSpec::new(4, 2).unwrap();
        let err =
            run_loop_twosided(&plain(Technique::Ss), l, &kernel, &PlatformSpec::homogeneous(2), 0)
                .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }
}
