//! Simulation of the master-worker model.
//!
//! The master owns the recursive scheduler state. Serving one request costs
//! `serve_overhead / master_speed`; requests that arrive while the master is
//! computing a slice of its own chunk queue up and are served oldest first,
//! with simultaneous arrivals resolved lowest rank first. Workers either
//! request on finishing a chunk (the classical baseline) or keep one request
//! in flight while executing, per [`RequestTiming`].

use crate::cost::{CostModel, CostTable};
use crate::error::{Error, Result};
use crate::platform::PlatformSpec;
use crate::sim::queue::EventQueue;
use crate::sim::{SimResult, SimTraceEntry};
use crate::technique::{LoopSpec, RecursiveChunker, TechniqueConfig};

/// When a worker posts its next work request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestTiming {
    /// Request once the current chunk has finished executing. The master's
    /// response time sits fully on the worker's critical path.
    #[default]
    OnFinish,
    /// Post the next request the moment a chunk starts executing, hiding
    /// the response time behind the current chunk (double buffering).
    Overlapped,
}

#[derive(Debug, Clone, Copy)]
struct Assignment {
    step: u64,
    start: u64,
    size: u64,
    terminal: bool,
}

enum Ev {
    /// A worker's request reaches the master.
    RequestArrive(usize),
    /// Lets the master take its first action at t = 0.
    MasterKick,
    /// The master finishes its current action (serve, own slice, self-assign).
    MasterFree,
    AssignArrive(usize, Assignment),
    WorkerDone(usize),
}

enum Action {
    Serve(usize),
    OwnSlice { iterations: u64, duration: f64 },
    SelfAssign,
}

struct OwnChunk {
    step: u64,
    start: u64,
    size: u64,
    done: u64,
    t_begin: f64,
}

#[derive(Default, Clone, Copy)]
struct WorkerState {
    executing: bool,
    done: bool,
}

/// Simulates the two-sided model with the default worker request timing.
/// Requires at least two PEs; deterministic for given inputs and seed (the
/// seed only drives the cost model).
pub fn simulate_twosided(
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    cost: &CostModel,
    platform: &PlatformSpec,
    serve_granularity: u64,
    seed: u64,
) -> Result<SimResult> {
    simulate_twosided_with(
        config,
        loop_spec,
        cost,
        platform,
        serve_granularity,
        RequestTiming::default(),
        seed,
    )
}

/// As [`simulate_twosided`], with an explicit worker request-timing policy.
pub fn simulate_twosided_with(
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    cost: &CostModel,
    platform: &PlatformSpec,
    serve_granularity: u64,
    request_timing: RequestTiming,
    seed: u64,
) -> Result<SimResult> {
    platform.validate()?;
    config.validate(loop_spec.p)?;
    if platform.pe_count != loop_spec.p {
        return Err(Error::InvalidPlatform(format!(
            "platform has {} PEs but the loop is scheduled for {}",
            platform.pe_count, loop_spec.p
        )));
    }
    if platform.pe_count < 2 {
        return Err(Error::InvalidPlatform(
            "the master-worker model needs at least two PEs".into(),
        ));
    }
    if serve_granularity == 0 {
        return Err(Error::InvalidConfig("serve granularity must be >= 1".into()));
    }

    let master = platform.coordinator_pe;
    let master_speed = platform.speeds[master];
    let costs = CostTable::new(&cost.materialize(loop_spec.n, seed)?);
    let mut chunker = RecursiveChunker::new(config.clone(), loop_spec)?;
    let mut queue = EventQueue::new();
    let mut result = SimResult::new(loop_spec.p);
    let mut pending: Vec<(f64, usize)> = Vec::new();
    let mut workers = vec![WorkerState::default(); loop_spec.p];
    let mut buffered: Vec<Option<Assignment>> = vec![None; loop_spec.p];
    let mut own: Option<OwnChunk> = None;
    let mut master_busy = false;
    let mut in_flight: Option<Action> = None;

    for pe in 0..loop_spec.p {
        if pe != master {
            queue.push(platform.comm_latency, Ev::RequestArrive(pe));
        }
    }
    queue.push(0.0, Ev::MasterKick);

    while let Some((now, event)) = queue.pop() {
        match event {
            Ev::RequestArrive(pe) => {
                pending.push((now, pe));
            }
            Ev::MasterKick => {}
            Ev::MasterFree => {
                master_busy = false;
                match in_flight.take().expect("master was busy") {
                    Action::Serve(pe) => {
                        let assignment = match chunker.next(pe) {
                            Some(c) => Assignment {
                                step: c.step,
                                start: c.start,
                                size: c.size,
                                terminal: false,
                            },
                            None => Assignment { step: 0, start: 0, size: 0, terminal: true },
                        };
                        queue.push(now + platform.comm_latency, Ev::AssignArrive(pe, assignment));
                    }
                    Action::OwnSlice { iterations, duration } => {
                        let chunk = own.as_mut().expect("own slice without a chunk");
                        result.per_pe_busy[master] += duration;
                        chunk.done += iterations;
                        if chunk.done == chunk.size {
                            result.trace.push(SimTraceEntry {
                                pe: master,
                                step: chunk.step,
                                start: chunk.start,
                                size: chunk.size,
                                t_dispatch: chunk.t_begin,
                                t_begin: chunk.t_begin,
                                t_end: now,
                            });
                            result.per_pe_iterations[master] += chunk.size;
                            result.per_pe_finish[master] = now;
                            own = None;
                        }
                    }
                    Action::SelfAssign => {
                        let chunk = chunker.next(master).expect("checked before self-assign");
                        own = Some(OwnChunk {
                            step: chunk.step,
                            start: chunk.start,
                            size: chunk.size,
                            done: 0,
                            t_begin: now,
                        });
                    }
                }
            }
            Ev::AssignArrive(pe, assignment) => {
                if workers[pe].executing {
                    buffered[pe] = Some(assignment);
                } else if assignment.terminal {
                    workers[pe].done = true;
                } else {
                    start_worker_chunk(
                        pe,
                        assignment,
                        now,
                        request_timing,
                        &costs,
                        platform,
                        &mut queue,
                        &mut result,
                        &mut workers,
                    );
                }
            }
            Ev::WorkerDone(pe) => {
                workers[pe].executing = false;
                result.per_pe_finish[pe] = now;
                match request_timing {
                    RequestTiming::OnFinish => {
                        queue.push(now + platform.comm_latency, Ev::RequestArrive(pe));
                    }
                    RequestTiming::Overlapped => {
                        if let Some(assignment) = buffered[pe].take() {
                            if assignment.terminal {
                                workers[pe].done = true;
                            } else {
                                start_worker_chunk(
                                    pe,
                                    assignment,
                                    now,
                                    request_timing,
                                    &costs,
                                    platform,
                                    &mut queue,
                                    &mut result,
                                    &mut workers,
                                );
                            }
                        }
                    }
                }
            }
        }

        // Let the master pick its next action whenever it is free.
        if !master_busy {
            if let Some((arrival, pe)) = pop_next_request(&mut pending) {
                result.served_waits.push(now - arrival);
                in_flight = Some(Action::Serve(pe));
                master_busy = true;
                queue.push(now + platform.serve_overhead / master_speed, Ev::MasterFree);
            } else if let Some(chunk) = own.as_ref() {
                let iterations = serve_granularity.min(chunk.size - chunk.done);
                let duration =
                    costs.range_cost(chunk.start + chunk.done, iterations) / master_speed;
                in_flight = Some(Action::OwnSlice { iterations, duration });
                master_busy = true;
                queue.push(now + duration, Ev::MasterFree);
            } else if chunker.remaining() > 0 {
                in_flight = Some(Action::SelfAssign);
                master_busy = true;
                queue.push(now + platform.serve_overhead / master_speed, Ev::MasterFree);
            }
        }
    }
    Ok(result.finalize())
}

/// Oldest request first; simultaneous arrivals go to the lowest rank.
fn pop_next_request(pending: &mut Vec<(f64, usize)>) -> Option<(f64, usize)> {
    if pending.is_empty() {
        return None;
    }
    let mut best = 0;
    for i in 1..pending.len() {
        let (t, pe) = pending[i];
        let (bt, bpe) = pending[best];
        if t < bt || (t == bt && pe < bpe) {
            best = i;
        }
    }
    Some(pending.swap_remove(best))
}

#[allow(clippy::too_many_arguments)]
fn start_worker_chunk(
    pe: usize,
    assignment: Assignment,
    now: f64,
    request_timing: RequestTiming,
    costs: &CostTable,
    platform: &PlatformSpec,
    queue: &mut EventQueue<Ev>,
    result: &mut SimResult,
    workers: &mut [WorkerState],
) {
    workers[pe].executing = true;
    if request_timing == RequestTiming::Overlapped {
        // Keep one request in flight while this chunk runs.
        queue.push(now + platform.comm_latency, Ev::RequestArrive(pe));
    }
    let duration = costs.range_cost(assignment.start, assignment.size) / platform.speeds[pe];
    result.trace.push(SimTraceEntry {
        pe,
        step: assignment.step,
        start: assignment.start,
        size: assignment.size,
        t_dispatch: now,
        t_begin: now,
        t_end: now + duration,
    });
    result.per_pe_busy[pe] += duration;
    result.per_pe_iterations[pe] += assignment.size;
    queue.push(now + duration, Ev::WorkerDone(pe));
}
