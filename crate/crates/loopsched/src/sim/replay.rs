//! What-if replay of a fixed chunk assignment with zero coordination cost.

use crate::cost::{CostModel, CostTable};
use crate::error::{Error, Result};
use crate::platform::PlatformSpec;
use crate::sim::{SimResult, SimTraceEntry};
use crate::technique::Schedule;

/// Computes per-PE finish times for a fixed schedule: every PE executes its
/// chunks back to back, in step order, with no scheduling overhead at all.
pub fn replay_schedule(
    schedule: &Schedule,
    cost: &CostModel,
    platform: &PlatformSpec,
    seed: u64,
) -> Result<SimResult> {
    platform.validate()?;
    schedule.verify_partition()?;
    if platform.pe_count != schedule.loop_spec.p {
        return Err(Error::InvalidPlatform(format!(
            "platform has {} PEs but the schedule targets {}",
            platform.pe_count, schedule.loop_spec.p
        )));
    }
    if let Some(bad) = schedule.chunks.iter().find(|c| c.pe >= platform.pe_count) {
        return Err(Error::InvalidSchedule(format!(
            "chunk at step {} assigned to nonexistent PE {}",
            bad.step, bad.pe
        )));
    }
    let costs = CostTable::new(&cost.materialize(schedule.loop_spec.n, seed)?);
    let mut result = SimResult::new(platform.pe_count);
    let mut chunks: Vec<_> = schedule.chunks.iter().collect();
    chunks.sort_by_key(|c| c.step);
    for chunk in chunks {
        let begin = result.per_pe_finish[chunk.pe];
        let duration = costs.range_cost(chunk.start, chunk.size) / platform.speeds[chunk.pe];
        result.trace.push(SimTraceEntry {
            pe: chunk.pe,
            step: chunk.step,
            start: chunk.start,
            size: chunk.size,
            t_dispatch: begin,
            t_begin: begin,
            t_end: begin + duration,
        });
        result.per_pe_finish[chunk.pe] = begin + duration;
        result.per_pe_busy[chunk.pe] += duration;
        result.per_pe_iterations[chunk.pe] += chunk.size;
    }
    Ok(result.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::technique::{generate_schedule, LoopSpec, Mode, Technique, TechniqueConfig};

    #[test]
    fn static_homogeneous_finishes_simultaneously() {
        let cfg = TechniqueConfig::plain(Technique::Static);
        let l = LoopSpec::new(100, 4).unwrap();
        let s = generate_schedule(&cfg, l, Mode::Transformed, |step| step as usize).unwrap();
        let r =
            replay_schedule(&s, &CostModel::constant(0.5), &PlatformSpec::homogeneous(4), 0)
                .unwrap();
        assert_eq!(r.per_pe_finish, vec![12.5; 4]);
    }

    #[test]
    fn finish_times_scale_inversely_with_speed() {
        let cfg = TechniqueConfig::plain(Technique::Static);
        let l = LoopSpec::new(100, 2).unwrap();
        let s = generate_schedule(&cfg, l, Mode::Transformed, |step| step as usize).unwrap();
        let mut platform = PlatformSpec::homogeneous(2);
        platform.speeds = vec![1.0, 2.0];
        let r = replay_schedule(&s, &CostModel::constant(1.0), &platform, 0).unwrap();
        assert!((r.per_pe_finish[0] / r.per_pe_finish[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gss_prefix_sums_match_hand_computation() {
        // GSS on 10 iterations over 2 PEs: sizes 5, 3, 2 at starts 0, 5, 8.
        // Round-robin assignment puts steps 0 and 2 on PE 0.
        let cfg = TechniqueConfig::plain(Technique::Gss);
        let l = LoopSpec::new(10, 2).unwrap();
        let s = generate_schedule(&cfg, l, Mode::Transformed, |step| step as usize % 2).unwrap();
        let r =
            replay_schedule(&s, &CostModel::constant(1.0), &PlatformSpec::homogeneous(2), 0)
                .unwrap();
        assert_eq!(r.per_pe_finish, vec![7.0, 3.0]);
        assert_eq!(r.t_parallel_loop, 7.0);
    }

    #[test]
    fn rejects_non_partitioning_schedules() {
        let cfg = TechniqueConfig::plain(Technique::Ss);
        let l = LoopSpec::new(5, 1).unwrap();
        let mut s = generate_schedule(&cfg, l, Mode::Transformed, |_| 0).unwrap();
        s.chunks.pop();
        assert!(replay_schedule(&s, &CostModel::constant(1.0), &PlatformSpec::homogeneous(1), 0)
            .is_err());
    }
}
