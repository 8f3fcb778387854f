//! Synthetic timed workload for controlled load-imbalance experiments.
//!
//! Each iteration busy-spins for a cost drawn from a [`CostModel`]. The
//! kernel also counts how many times every iteration executed, which the
//! tests use to verify exactly-once scheduling.

use std::sync::atomic::{AtomicU32, Ordering};
use std::time::Instant;

use crate::cost::CostModel;
use crate::error::Result;
use crate::workload::{KernelError, WorkloadKernel};

pub struct SyntheticKernel {
    costs: Vec<f64>,
    executions: Vec<AtomicU32>,
}

impl SyntheticKernel {
    /// A zero-cost kernel that only tracks execution counts.
    pub fn counting(n: u64) -> Self {
        SyntheticKernel::from_costs(vec![0.0; n as usize])
    }

    pub fn from_costs(costs: Vec<f64>) -> Self {
        let mut executions = Vec::with_capacity(costs.len());
        executions.resize_with(costs.len(), || AtomicU32::new(0));
        SyntheticKernel { costs, executions }
    }

    /// How many times each iteration ran; all ones after a correct run.
    pub fn execution_counts(&self) -> Vec<u32> {
        self.executions.iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }
}

/// Kernel whose iteration `i` busy-spins for the model's cost at `i`.
pub fn synthetic_kernel(model: &CostModel, n: u64, seed: u64) -> Result<SyntheticKernel> {
    Ok(SyntheticKernel::from_costs(model.materialize(n, seed)?))
}

impl WorkloadKernel for SyntheticKernel {
    fn len(&self) -> u64 {
        self.costs.len() as u64
    }

    fn execute(&self, iteration: u64) -> std::result::Result<(), KernelError> {
        let cost = *self
            .costs
            .get(iteration as usize)
            .ok_or(KernelError::OutOfRange(iteration))?;
        let previous = self.executions[iteration as usize].fetch_add(1, Ordering::Relaxed);
        if previous != 0 {
            return Err(KernelError::DuplicateResult(iteration));
        }
        if cost > 0.0 {
            let start = Instant::now();
            while start.elapsed().as_secs_f64() < cost {
                std::hint::spin_loop();
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_every_execution() {
        let kernel = SyntheticKernel::counting(5);
        for i in 0..5 {
            kernel.execute(i).unwrap();
        }
        assert_eq!(kernel.execution_counts(), vec![1; 5]);
        assert!(matches!(kernel.execute(2), Err(KernelError::DuplicateResult(2))));
    }

    #[test]
    fn trace_costs_reach_the_right_iteration() {
        let model = CostModel::Trace { costs: vec![1.0, 2.0, 3.0] };
        let kernel = synthetic_kernel(&model, 3, 0).unwrap();
        assert_eq!(kernel.costs()[2], 3.0);
    }

    #[test]
    fn spin_takes_roughly_the_requested_time() {
        let kernel = SyntheticKernel::from_costs(vec![0.005]);
        let start = Instant::now();
        kernel.execute(0).unwrap();
        assert!(start.elapsed().as_secs_f64() >= 0.005);
    }
}
