//! Chunk-size mathematics for loop self-scheduling.
//!
//! Each technique assigns a chunk of `K_i` consecutive loop iterations at
//! scheduling step `i`. Two equivalent formulations are provided:
//!
//! * **Recursive** ([`chunk_recursive`]): the classical form, which needs
//!   scheduler-held state — the remaining iteration count `R_i` and/or the
//!   previous chunk size. Chunks must therefore be calculated one after
//!   another by whoever owns that state (a master).
//! * **Transformed** ([`chunk_transformed`]): index-only closed forms that
//!   depend solely on the step index, so any number of workers can calculate
//!   chunks concurrently after fetching a step index from a shared counter.
//!
//! For TSS the two forms are identical in exact integer arithmetic (the
//! decrement per step is a constant). For GSS and FAC2 they agree exactly in
//! real arithmetic but may differ by small amounts once each step is rounded
//! up independently; both still partition the iteration space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(weights) == P` for weighted factoring.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// The self-scheduling techniques supported by the runtimes and simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    /// One chunk of `ceil(N/P)` iterations per processing element.
    Static,
    /// Self-scheduling: every chunk is a single iteration.
    Ss,
    /// Guided self-scheduling: `ceil(R_i / P)`.
    Gss,
    /// Trapezoid self-scheduling: linearly decreasing chunks.
    Tss,
    /// Practical factoring: half the remaining work per batch of P chunks.
    Fac2,
    /// Weighted factoring: FAC2 batch chunks scaled by per-PE weights.
    Wf,
}

impl Technique {
    pub const ALL: [Technique; 6] = [
        Technique::Static,
        Technique::Ss,
        Technique::Gss,
        Technique::Tss,
        Technique::Fac2,
        Technique::Wf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Static => "static",
            Technique::Ss => "ss",
            Technique::Gss => "gss",
            Technique::Tss => "tss",
            Technique::Fac2 => "fac2",
            Technique::Wf => "wf",
        }
    }
}

impl std::fmt::Display for Technique {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(Technique::Static),
            "ss" => Ok(Technique::Ss),
            "gss" => Ok(Technique::Gss),
            "tss" => Ok(Technique::Tss),
            "fac2" => Ok(Technique::Fac2),
            "wf" => Ok(Technique::Wf),
            other => Err(Error::InvalidTechnique(format!(
                "unknown technique `{other}` (expected static|ss|gss|tss|fac2|wf)"
            ))),
        }
    }
}

/// A technique plus its parameters. Weights are present iff the technique is
/// weighted factoring; they are per-PE relative speeds normalized so that
/// they sum to the PE count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueConfig {
    pub kind: Technique,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl TechniqueConfig {
    /// Configuration for any technique except weighted factoring.
    pub fn plain(kind: Technique) -> Self {
        TechniqueConfig { kind, weights: None }
    }

    /// Weighted factoring with the given per-PE weights.
    pub fn weighted(weights: Vec<f64>) -> Self {
        TechniqueConfig { kind: Technique::Wf, weights: Some(weights) }
    }

    /// Checks the weight invariants against a concrete PE count.
    pub fn validate(&self, p: usize) -> Result<()> {
        match (self.kind, &self.weights) {
            (Technique::Wf, None) => Err(Error::InvalidTechnique(
                "weighted factoring requires per-PE weights".into(),
            )),
            (Technique::Wf, Some(w)) => {
                if w.len() != p {
                    return Err(Error::InvalidTechnique(format!(
                        "expected {p} weights, got {}",
                        w.len()
                    )));
                }
                if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                    return Err(Error::InvalidTechnique(
                        "all weights must be finite and strictly positive".into(),
                    ));
                }
                let sum: f64 = w.iter().sum();
                if (sum - p as f64).abs() > WEIGHT_SUM_TOLERANCE {
                    return Err(Error::InvalidTechnique(format!(
                        "weights must sum to the PE count ({p}), got {sum}"
                    )));
                }
                Ok(())
            }
            (_, Some(_)) => Err(Error::InvalidTechnique(
                "weights are only meaningful for weighted factoring".into(),
            )),
            (_, None) => Ok(()),
        }
    }

    fn weight(&self, pe: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[pe])
    }
}

/// The parallel loop being scheduled: `n` iterations over `p` processing
/// elements. `p > n` is allowed; PEs that find the loop exhausted on their
/// first fetch simply receive no work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub n: u64,
    pub p: usize,
}

impl LoopSpec {
    pub fn new(n: u64, p: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLoop("iteration count must be >= 1".into()));
        }
        if p == 0 {
            return Err(Error::InvalidLoop("PE count must be >= 1".into()));
        }
        Ok(LoopSpec { n, p })
    }
}

/// Whether chunk sizes come from the stateful recursive formulas or the
/// index-only transformed ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Recursive,
    Transformed,
}

/// One scheduling decision: `size` iterations starting at `start`, assigned
/// at step `step` to processing element `pe`. Sizes are already clamped to
/// the end of the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub step: u64,
    pub start: u64,
    pub size: u64,
    pub pe: usize,
}

/// A materialized sequence of chunks covering `[0, n)` exactly once.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub chunks: Vec<Chunk>,
    pub technique: TechniqueConfig,
    pub loop_spec: LoopSpec,
}

impl Schedule {
    /// Verifies that the chunks are disjoint, contiguous when sorted by
    /// start, and cover all `n` iterations exactly once.
    pub fn verify_partition(&self) -> Result<()> {
        let mut sorted: Vec<&Chunk> = self.chunks.iter().collect();
        sorted.sort_by_key(|c| c.start);
        let mut next = 0u64;
        for c in sorted {
            if c.size == 0 {
                return Err(Error::InvalidSchedule(format!(
                    "empty chunk at step {}",
                    c.step
                )));
            }
            if c.start != next {
                return Err(Error::InvalidSchedule(format!(
                    "gap or overlap at iteration {next} (chunk starts at {})",
                    c.start
                )));
            }
            next = c.start + c.size;
        }
        if next != self.loop_spec.n {
            return Err(Error::InvalidSchedule(format!(
                "chunks cover {next} of {} iterations",
                self.loop_spec.n
            )));
        }
        Ok(())
    }
}

/// TSS constants: the first chunk and the per-step decrement. The smallest
/// chunk is pinned to 1; when the projected step count is 1 the decrement
/// degenerates to 0 and the technique assigns constant chunks.
fn tss_constants(n: u64, p: usize) -> (u64, u64) {
    let k0 = n.div_ceil(2 * p as u64).max(1);
    let steps = (2 * n as u128).div_ceil(k0 as u128 + 1) as u64;
    let decrement = if steps > 1 { (k0 - 1) / (steps - 1) } else { 0 };
    (k0, decrement)
}

fn ceil_positive(x: f64) -> u64 {
    let c = x.ceil();
    if c <= 1.0 {
        1
    } else {
        c as u64
    }
}

/// FAC2 closed form: half of `N/P` per batch, where batch `b` covers steps
/// `[bP, (b+1)P)`.
fn fac2_transformed(loop_spec: LoopSpec, step: u64) -> u64 {
    let batch = step / loop_spec.p as u64 + 1;
    let exp = i32::try_from(batch).unwrap_or(i32::MAX);
    let per_pe = loop_spec.n as f64 / loop_spec.p as f64;
    ceil_positive(0.5f64.powi(exp) * per_pe)
}

/// Chunk size at `step` from the recursive formulas.
///
/// `remaining` is the number of unscheduled iterations before this step and
/// `prev_chunk` carries the technique's state: the previous chunk size for
/// TSS, the current batch's base chunk size for FAC2 and WF (required
/// whenever `step mod P != 0`). The result is unclamped except for a floor
/// of 1, which guarantees progress.
pub fn chunk_recursive(
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    step: u64,
    remaining: u64,
    prev_chunk: Option<u64>,
    pe: usize,
) -> Result<u64> {
    config.validate(loop_spec.p)?;
    if pe >= loop_spec.p {
        return Err(Error::InvalidLoop(format!(
            "pe {pe} out of range for {} PEs",
            loop_spec.p
        )));
    }
    if remaining == 0 {
        return Err(Error::InvalidLoop("remaining iterations must be >= 1".into()));
    }
    if remaining > loop_spec.n {
        return Err(Error::InvalidLoop(format!(
            "remaining {remaining} exceeds loop length {}",
            loop_spec.n
        )));
    }
    let p = loop_spec.p as u64;
    let need_prev = || {
        prev_chunk.ok_or_else(|| {
            Error::InvalidTechnique(format!(
                "step {step} needs the previous chunk size for {}",
                config.kind
            ))
        })
    };
    let k = match config.kind {
        Technique::Static => loop_spec.n.div_ceil(p),
        Technique::Ss => 1,
        Technique::Gss => remaining.div_ceil(p),
        Technique::Tss => {
            let (k0, c) = tss_constants(loop_spec.n, loop_spec.p);
            if step == 0 {
                k0
            } else {
                need_prev()?.saturating_sub(c)
            }
        }
        Technique::Fac2 => {
            if step % p == 0 {
                remaining.div_ceil(2 * p)
            } else {
                need_prev()?
            }
        }
        Technique::Wf => {
            let base = if step % p == 0 {
                remaining.div_ceil(2 * p)
            } else {
                need_prev()?
            };
            ceil_positive(config.weight(pe) * base as f64)
        }
    };
    Ok(k.max(1))
}

/// Chunk size at `step` from the index-only transformed formulas.
///
/// Depends only on the step index (and the PE's weight for WF), never on
/// scheduler state, so chunks for different steps can be calculated
/// concurrently. The result is unclamped except for a floor of 1.
pub fn chunk_transformed(
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    step: u64,
    pe: usize,
) -> Result<u64> {
    config.validate(loop_spec.p)?;
    if pe >= loop_spec.p {
        return Err(Error::InvalidLoop(format!(
            "pe {pe} out of range for {} PEs",
            loop_spec.p
        )));
    }
    let p = loop_spec.p as u64;
    let k = match config.kind {
        Technique::Static => loop_spec.n.div_ceil(p),
        Technique::Ss => 1,
        Technique::Gss => {
            let ratio = (loop_spec.p as f64 - 1.0) / loop_spec.p as f64;
            let exp = i32::try_from(step).unwrap_or(i32::MAX);
            let per_pe = loop_spec.n as f64 / loop_spec.p as f64;
            ceil_positive(ratio.powi(exp) * per_pe)
        }
        Technique::Tss => {
            let (k0, c) = tss_constants(loop_spec.n, loop_spec.p);
            let k = k0 as i128 - step as i128 * c as i128;
            if k < 1 {
                1
            } else {
                k as u64
            }
        }
        Technique::Fac2 => fac2_transformed(loop_spec, step),
        Technique::Wf => {
            let base = fac2_transformed(loop_spec, step);
            ceil_positive(config.weight(pe) * base as f64)
        }
    };
    Ok(k.max(1))
}

/// Incremental driver for the recursive formulas. Owns the scheduler state
/// (remaining iterations, previous chunk / batch base) that a master holds
/// in the two-sided execution model.
#[derive(Debug, Clone)]
pub struct RecursiveChunker {
    config: TechniqueConfig,
    loop_spec: LoopSpec,
    next_step: u64,
    assigned: u64,
    /// TSS: previous unclamped chunk. FAC2/WF: current batch base size.
    carry: Option<u64>,
}

impl RecursiveChunker {
    pub fn new(config: TechniqueConfig, loop_spec: LoopSpec) -> Result<Self> {
        config.validate(loop_spec.p)?;
        Ok(RecursiveChunker { config, loop_spec, next_step: 0, assigned: 0, carry: None })
    }

    pub fn remaining(&self) -> u64 {
        self.loop_spec.n - self.assigned
    }

    pub fn next_step(&self) -> u64 {
        self.next_step
    }

    /// Calculates the next chunk for `pe`, or `None` once the loop is
    /// exhausted. Returned chunks are clamped to the end of the loop.
    pub fn next(&mut self, pe: usize) -> Option<Chunk> {
        let remaining = self.remaining();
        if remaining == 0 {
            return None;
        }
        let step = self.next_step;
        let raw = chunk_recursive(&self.config, self.loop_spec, step, remaining, self.carry, pe)
            .expect("chunker state is maintained internally");
        // Carry the unscaled value: for WF the batch base, not the weighted chunk.
        self.carry = Some(match self.config.kind {
            Technique::Wf | Technique::Fac2 if step % self.loop_spec.p as u64 == 0 => {
                remaining.div_ceil(2 * self.loop_spec.p as u64).max(1)
            }
            Technique::Wf | Technique::Fac2 => self.carry.unwrap(),
            _ => raw,
        });
        let size = raw.min(remaining);
        let start = self.loop_spec.n - remaining;
        self.next_step += 1;
        self.assigned += size;
        Some(Chunk { step, start, size, pe })
    }
}

/// Materializes the full chunk sequence for a technique, accumulating the
/// loop start and clamping the final chunk to the end of the loop.
/// `pe_assignment` maps each step index to the PE that would execute it
/// (which scales WF chunks by that PE's weight).
pub fn generate_schedule(
    config: &TechniqueConfig,
    loop_spec: LoopSpec,
    mode: Mode,
    mut pe_assignment: impl FnMut(u64) -> usize,
) -> Result<Schedule> {
    config.validate(loop_spec.p)?;
    let mut chunks = Vec::new();
    match mode {
        Mode::Recursive => {
            let mut chunker = RecursiveChunker::new(config.clone(), loop_spec)?;
            while let Some(chunk) = {
                let pe = pe_assignment(chunker.next_step());
                chunker.next(pe)
            } {
                chunks.push(chunk);
                if chunks.len() as u64 > loop_spec.n {
                    return Err(Error::InvalidSchedule(
                        "schedule exceeded one step per iteration".into(),
                    ));
                }
            }
        }
        Mode::Transformed => {
            let mut start = 0u64;
            let mut step = 0u64;
            while start < loop_spec.n {
                let pe = pe_assignment(step);
                let k = chunk_transformed(config, loop_spec, step, pe)?;
                let size = k.min(loop_spec.n - start);
                chunks.push(Chunk { step, start, size, pe });
                start += size;
                step += 1;
                if step > loop_spec.n {
                    return Err(Error::InvalidSchedule(
                        "schedule exceeded one step per iteration".into(),
                    ));
                }
            }
        }
    }
    Ok(Schedule { chunks, technique: config.clone(), loop_spec })
}

/// Summary of a schedule: its step count and chunk-size profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleStats {
    pub num_steps: usize,
    pub min_chunk: u64,
    pub max_chunk: u64,
    /// Chunk sizes in step order.
    pub chunk_size_profile: Vec<u64>,
}

pub fn schedule_stats(schedule: &Schedule) -> ScheduleStats {
    let mut by_step: Vec<&Chunk> = schedule.chunks.iter().collect();
    by_step.sort_by_key(|c| c.step);
    let profile: Vec<u64> = by_step.iter().map(|c| c.size).collect();
    ScheduleStats {
        num_steps: profile.len(),
        min_chunk: profile.iter().copied().min().unwrap_or(0),
        max_chunk: profile.iter().copied().max().unwrap_or(0),
        chunk_size_profile: profile,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plain(kind: Technique) -> TechniqueConfig {
        TechniqueConfig::plain(kind)
    }

    fn spec(n: u64, p: usize) -> LoopSpec {
        LoopSpec::new(n, p).unwrap()
    }

    #[test]
    fn gss_first_two_chunks_match_both_paths() {
        let cfg = plain(Technique::Gss);
        let l = spec(10, 2);
        assert_eq!(chunk_recursive(&cfg, l, 0, 10, None, 0).unwrap(), 5);
        assert_eq!(chunk_recursive(&cfg, l, 1, 5, None, 0).unwrap(), 3);
        assert_eq!(chunk_transformed(&cfg, l, 0, 0).unwrap(), 5);
        assert_eq!(chunk_transformed(&cfg, l, 1, 0).unwrap(), 3);
    }

    #[test]
    fn gss_recursive_sequence_drains_remainder() {
        // The master-side recursion keeps halving the remainder: 5,3,1,1.
        let cfg = plain(Technique::Gss);
        let s = generate_schedule(&cfg, spec(10, 2), Mode::Recursive, |_| 0).unwrap();
        let sizes: Vec<u64> = s.chunks.iter().map(|c| c.size).collect();
        assert_eq!(sizes, vec![5, 3, 1, 1]);
    }

    #[test]
    fn gss_transformed_schedule_clamps_tail() {
        let cfg = plain(Technique::Gss);
        let s = generate_schedule(&cfg, spec(10, 2), Mode::Transformed, |_| 0).unwrap();
        let starts: Vec<u64> = s.chunks.iter().map(|c| c.start).collect();
        let sizes: Vec<u64> = s.chunks.iter().map(|c| c.size).collect();
        assert_eq!(starts, vec![0, 5, 8]);
        assert_eq!(sizes, vec![5, 3, 2]);
    }

    #[test]
    fn ss_is_always_one() {
        let cfg = plain(Technique::Ss);
        for (n, p, step) in [(1u64, 1usize, 0u64), (100, 7, 3), (50, 2, 49)] {
            let l = spec(n, p);
            assert_eq!(chunk_recursive(&cfg, l, step, n, None, 0).unwrap(), 1);
            assert_eq!(chunk_transformed(&cfg, l, step, 0).unwrap(), 1);
        }
    }

    #[test]
    fn tss_decrement_example() {
        // N=1000, P=4: first chunk 125, 16 projected steps, decrement 8.
        let cfg = plain(Technique::Tss);
        let l = spec(1000, 4);
        assert_eq!(chunk_transformed(&cfg, l, 0, 0).unwrap(), 125);
        assert_eq!(chunk_recursive(&cfg, l, 1, 875, Some(125), 0).unwrap(), 117);
        assert_eq!(chunk_transformed(&cfg, l, 1, 0).unwrap(), 117);
    }

    #[test]
    fn tss_tiny_loop_degenerates_to_constant() {
        let (k0, c) = tss_constants(1, 1);
        assert_eq!((k0, c), (1, 0));
        let cfg = plain(Technique::Tss);
        let s = generate_schedule(&cfg, spec(1, 1), Mode::Transformed, |_| 0).unwrap();
        assert_eq!(s.chunks.len(), 1);
    }

    #[test]
    fn fac2_integer_paths_may_disagree() {
        // Recursive path at step 4 sees R=48 and yields 6; the closed form
        // rounds the real-valued 6.25 up to 7. Both are valid chunkings.
        let cfg = plain(Technique::Fac2);
        let l = spec(100, 4);
        assert_eq!(chunk_transformed(&cfg, l, 4, 0).unwrap(), 7);
        assert_eq!(chunk_recursive(&cfg, l, 4, 48, None, 0).unwrap(), 6);
    }

    #[test]
    fn fac2_within_batch_repeats_base() {
        let cfg = plain(Technique::Fac2);
        let l = spec(100, 4);
        assert_eq!(chunk_recursive(&cfg, l, 1, 87, Some(13), 0).unwrap(), 13);
        assert!(chunk_recursive(&cfg, l, 1, 87, None, 0).is_err());
    }

    #[test]
    fn static_schedule_clamps_last_chunk() {
        let cfg = plain(Technique::Static);
        let s = generate_schedule(&cfg, spec(10, 4), Mode::Transformed, |_| 0).unwrap();
        let sizes: Vec<u64> = s.chunks.iter().map(|c| c.size).collect();
        assert_eq!(sizes, vec![3, 3, 3, 1]);
    }

    #[test]
    fn schedule_stats_counts_steps() {
        let gss = generate_schedule(&plain(Technique::Gss), spec(10, 2), Mode::Transformed, |_| 0)
            .unwrap();
        assert_eq!(schedule_stats(&gss).num_steps, 3);
        let ss =
            generate_schedule(&plain(Technique::Ss), spec(7, 2), Mode::Transformed, |_| 0).unwrap();
        assert_eq!(schedule_stats(&ss).num_steps, 7);
        let st = generate_schedule(&plain(Technique::Static), spec(10, 4), Mode::Transformed, |_| 0)
            .unwrap();
        let stats = schedule_stats(&st);
        assert_eq!(stats.num_steps, 4);
        assert_eq!(stats.min_chunk, 1);
        assert_eq!(stats.max_chunk, 3);
    }

    #[test]
    fn wf_reproduces_fac2_with_unit_weights() {
        let wf = TechniqueConfig::weighted(vec![1.0; 4]);
        let fac2 = plain(Technique::Fac2);
        let l = spec(500, 4);
        for step in 0..40 {
            for pe in 0..4 {
                assert_eq!(
                    chunk_transformed(&wf, l, step, pe).unwrap(),
                    chunk_transformed(&fac2, l, step, 0).unwrap()
                );
            }
        }
    }

    #[test]
    fn wf_scales_fac2_by_weight() {
        let wf = TechniqueConfig::weighted(vec![0.5, 1.5]);
        let fac2 = plain(Technique::Fac2);
        let l = spec(1000, 2);
        for step in 0..20 {
            let base = chunk_transformed(&fac2, l, step, 0).unwrap();
            for pe in 0..2 {
                let expected = ((wf.weights.as_ref().unwrap()[pe] * base as f64).ceil() as u64).max(1);
                assert_eq!(chunk_transformed(&wf, l, step, pe).unwrap(), expected);
            }
        }
    }

    #[test]
    fn wf_validation_rejects_bad_weights() {
        assert!(TechniqueConfig::plain(Technique::Wf).validate(2).is_err());
        assert!(TechniqueConfig::weighted(vec![1.0, 0.5]).validate(2).is_err());
        assert!(TechniqueConfig::weighted(vec![2.0, -0.5, 0.5]).validate(3).is_err());
        assert!(TechniqueConfig::weighted(vec![1.0]).validate(2).is_err());
        assert!(TechniqueConfig::weighted(vec![0.5, 1.5]).validate(2).is_ok());
        // Weights on a non-WF technique are rejected too.
        let bad = TechniqueConfig { kind: Technique::Gss, weights: Some(vec![1.0, 1.0]) };
        assert!(bad.validate(2).is_err());
    }

    #[test]
    fn recursive_rejects_inconsistent_remaining() {
        let cfg = plain(Technique::Gss);
        let l = spec(10, 2);
        assert!(chunk_recursive(&cfg, l, 0, 11, None, 0).is_err());
        assert!(chunk_recursive(&cfg, l, 0, 0, None, 0).is_err());
    }

    #[test]
    fn transformed_floors_at_one() {
        let gss = plain(Technique::Gss);
        let tss = plain(Technique::Tss);
        // N=1000, P=4 gives a real trapezoid decrement (8 per step), so far
        // past the nominal end both formulas bottom out at the floor of 1.
        let l = spec(1000, 4);
        assert_eq!(chunk_transformed(&gss, l, 10_000, 0).unwrap(), 1);
        assert_eq!(chunk_transformed(&tss, l, 10_000, 0).unwrap(), 1);
    }

    #[test]
    fn tss_recursive_matches_transformed_prefix() {
        let cfg = plain(Technique::Tss);
        for (n, p) in [(1000u64, 4usize), (100, 2), (37, 3), (5000, 16)] {
            let l = spec(n, p);
            let mut remaining = n;
            let mut prev = None;
            let mut step = 0;
            while remaining > 0 {
                let rec = chunk_recursive(&cfg, l, step, remaining, prev, 0).unwrap();
                let tra = chunk_transformed(&cfg, l, step, 0).unwrap();
                assert_eq!(rec, tra, "n={n} p={p} step={step}");
                prev = Some(rec);
                remaining -= rec.min(remaining);
                step += 1;
            }
        }
    }

    fn weights_strategy(p: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.25f64..4.0, p).prop_map(move |raw| {
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|w| w * p as f64 / sum).collect()
        })
    }

    fn config_strategy(p: usize) -> impl Strategy<Value = TechniqueConfig> {
        prop_oneof![
            Just(TechniqueConfig::plain(Technique::Static)),
            Just(TechniqueConfig::plain(Technique::Ss)),
            Just(TechniqueConfig::plain(Technique::Gss)),
            Just(TechniqueConfig::plain(Technique::Tss)),
            Just(TechniqueConfig::plain(Technique::Fac2)),
            weights_strategy(p).prop_map(TechniqueConfig::weighted),
        ]
    }

    proptest! {
        #[test]
        fn schedules_partition_the_iteration_space(
            n in 1u64..20_000,
            p in 1usize..64,
            seed in any::<u64>(),
            mode in prop_oneof![Just(Mode::Recursive), Just(Mode::Transformed)],
            cfg in (1usize..64).prop_flat_map(config_strategy),
        ) {
            // Weights were generated for an arbitrary PE count; regenerate for p.
            let cfg = match cfg.kind {
                Technique::Wf => {
                    let mut raw: Vec<f64> = (0..p).map(|i| 0.5 + ((seed >> (i % 48)) & 7) as f64 / 4.0).collect();
                    let sum: f64 = raw.iter().sum();
                    raw.iter_mut().for_each(|w| *w *= p as f64 / sum);
                    TechniqueConfig::weighted(raw)
                }
                _ => cfg,
            };
            let l = LoopSpec::new(n, p).unwrap();
            let s = generate_schedule(&cfg, l, mode, |step| (step as usize + seed as usize) % p).unwrap();
            prop_assert!(s.verify_partition().is_ok());
            prop_assert!(s.chunks.len() as u64 <= n);
        }

        #[test]
        fn transformed_sequences_are_monotone(
            n in 1u64..100_000,
            p in 1usize..64,
        ) {
            let l = LoopSpec::new(n, p).unwrap();
            for kind in [Technique::Gss, Technique::Tss, Technique::Fac2] {
                let cfg = TechniqueConfig::plain(kind);
                let mut prev = u64::MAX;
                for step in 0..200u64 {
                    let k = chunk_transformed(&cfg, l, step, 0).unwrap();
                    prop_assert!(k <= prev, "{kind:?} grew at step {step}");
                    prev = k;
                }
            }
        }

        #[test]
        fn fac2_batches_are_constant_and_halving(
            n in 1u64..100_000,
            p in 1usize..32,
        ) {
            let l = LoopSpec::new(n, p).unwrap();
            let cfg = TechniqueConfig::plain(Technique::Fac2);
            let mut batch_values = Vec::new();
            for batch in 0..8u64 {
                let first = chunk_transformed(&cfg, l, batch * p as u64, 0).unwrap();
                for offset in 1..p as u64 {
                    let k = chunk_transformed(&cfg, l, batch * p as u64 + offset, 0).unwrap();
                    prop_assert_eq!(k, first);
                }
                batch_values.push(first);
            }
            for w in batch_values.windows(2) {
                // Next batch halves, up to the ceiling and the floor of 1.
                prop_assert_eq!(w[1], w[0].div_ceil(2).max(1));
            }
        }
    }
}
