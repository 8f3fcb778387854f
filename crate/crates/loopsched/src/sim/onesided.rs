//! Simulation of the distributed chunk-calculation model.
//!
//! Each chunk acquisition is two read-modify-write operations on counters
//! hosted at the coordinator PE: claim a step index, then accumulate the
//! locally computed chunk size into the loop start. A counter serves one
//! RMW at a time for `lock_overhead` seconds; concurrent arrivals queue in
//! arrival order with same-instant ties resolved by the platform's
//! tie-break policy (seeded-random by default, modeling lock polling).
//! Acquiring from a PE other than the coordinator adds one `comm_latency`
//! hop on the way in and one on the way out, so an uncontended acquisition
//! costs `2 * lock_overhead` plus (for remote PEs) `2 * comm_latency`; the
//! second RMW is issued directly from the counter side, the chunk
//! calculation itself being folded into the lock window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::{CostModel, CostTable};
use crate::error::{Error, Result};
use crate::platform::{PlatformSpec, TieBreak};
use crate::sim::queue::EventQueue;
use crate::sim::{tie_break_seed, SimResult, SimTraceEntry};
use crate::technique::{chunk_transformed, LoopSpec, TechniqueConfig};

enum Ev {
    /// RMW request reaches the step counter.
    StepArrive(usize),
    /// Step-counter RMW completes for this PE.
    StepServed(usize),
    /// RMW request reaches the loop-start counter.
    StartArrive(usize),
    /// Loop-start RMW completes for this PE.
    StartServed(usize),
    ExecDone(usize),
}

#[derive(Default)]
struct Counter {
    value: u64,
    busy: bool,
    waiting: Vec<(f64, usize)>,
}

impl Counter {
    /// Picks the next waiter: earliest arrival, ties by policy.
    fn pick(&mut self, tie_break: TieBreak, rng: &mut ChaCha8Rng) -> Option<usize> {
        if self.busy || self.waiting.is_empty() {
            return None;
        }
        let min_arrival =
            self.waiting.iter().map(|w| w.0).fold(f64::INFINITY, f64::min);
        let tied: Vec<usize> = self
            .waiting
            .iter()
            .enumerate()
            .filter(|(_, w)| w.0 == min_arrival)
            .map(|(i, _)| i)
            .collect();
        let chosen = if tied.len() == 1 {
            tied[0]
        } else {
            match tie_break {
                TieBreak::Random => tied[rng.gen_range(0..tied.len())],
                TieBreak::Rank => {
                    *tied.iter().min_by_key(|&&i| self.waiting[i].1).unwrap()
                }
            }
        };
        self.busy = true;
        Some(self.waiting.swap_remove(chosen).1)
    }
}

/// Simulates the one-sided model. Deterministic for given inputs and seed.
pub fn simulate_onesided(
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    cost: &CostModel,
    platform: &PlatformSpec,
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
    let costs = CostTable::new(&cost.materialize(loop_spec.n, seed)?);
    let mut rng = ChaCha8Rng::seed_from_u64(tie_break_seed(seed));
    let mut queue = EventQueue::new();
    let mut step_counter = Counter::default();
    let mut start_counter = Counter::default();
    let mut pending_chunk = vec![(0u64, 0u64); loop_spec.p]; // (step, size) per PE
    let mut result = SimResult::new(loop_spec.p);
    let hop = |pe: usize| {
        if pe == platform.coordinator_pe {
            0.0
        } else {
            platform.comm_latency
        }
    };

    for pe in 0..loop_spec.p {
        queue.push(hop(pe), Ev::StepArrive(pe));
    }

    while let Some((now, event)) = queue.pop() {
        match event {
            Ev::StepArrive(pe) => {
                step_counter.waiting.push((now, pe));
                if let Some(winner) = step_counter.pick(platform.tie_break, &mut rng) {
                    queue.push(now + platform.lock_overhead, Ev::StepServed(winner));
                }
            }
            Ev::StepServed(pe) => {
                let step = step_counter.value;
                step_counter.value += 1;
                let size = chunk_transformed(config, loop_spec, step, pe)?;
                pending_chunk[pe] = (step, size);
                step_counter.busy = false;
                if let Some(winner) = step_counter.pick(platform.tie_break, &mut rng) {
                    queue.push(now + platform.lock_overhead, Ev::StepServed(winner));
                }
                queue.push(now, Ev::StartArrive(pe));
            }
            Ev::StartArrive(pe) => {
                start_counter.waiting.push((now, pe));
                if let Some(winner) = start_counter.pick(platform.tie_break, &mut rng) {
                    queue.push(now + platform.lock_overhead, Ev::StartServed(winner));
                }
            }
            Ev::StartServed(pe) => {
                let (step, size) = pending_chunk[pe];
                let start = start_counter.value;
                start_counter.value += size;
                start_counter.busy = false;
                if let Some(winner) = start_counter.pick(platform.tie_break, &mut rng) {
                    queue.push(now + platform.lock_overhead, Ev::StartServed(winner));
                }
                let at_pe = now + hop(pe);
                if start >= loop_spec.n {
                    result.wasted_steps += 1;
                } else {
                    let size = size.min(loop_spec.n - start);
                    let duration = costs.range_cost(start, size) / platform.speeds[pe];
                    result.trace.push(SimTraceEntry {
                        pe,
                        step,
                        start,
                        size,
                        t_dispatch: at_pe,
                        t_begin: at_pe,
                        t_end: at_pe + duration,
                    });
                    result.per_pe_busy[pe] += duration;
                    result.per_pe_iterations[pe] += size;
                    queue.push(at_pe + duration, Ev::ExecDone(pe));
                }
            }
            Ev::ExecDone(pe) => {
                result.per_pe_finish[pe] = now;
                queue.push(now + hop(pe), Ev::StepArrive(pe));
            }
        }
    }
    Ok(result.finalize())
}
