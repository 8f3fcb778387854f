//! Iteration kernels executed by the runtimes.
//!
//! A kernel exposes the loop body as `execute(iteration)`. Results are
//! written into slots owned by the iteration index, so concurrent calls for
//! distinct indices never alias and a scheduled loop produces output
//! identical to sequential execution regardless of chunk assignment.

pub mod mandelbrot;
pub mod point_cloud;
pub mod spin_image;
pub mod synthetic;

pub use mandelbrot::{escape_iterations, MandelbrotKernel, MandelbrotParams};
pub use point_cloud::{generate_point_cloud, OrientedPoint};
pub use spin_image::{compute_spin_image, SpinImageKernel, SpinImageParams};
pub use synthetic::{synthetic_kernel, SyntheticKernel};

/// Failure of a single loop iteration.
#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error("iteration {0} out of range")]
    OutOfRange(u64),
    /// The result slot for an iteration was written more than once, meaning
    /// the scheduler violated exactly-once execution.
    #[error("result slot for iteration {0} written twice")]
    DuplicateResult(u64),
    #[error("{0}")]
    Failed(String),
}

/// A parallel-loop body. `execute` must be deterministic and side-effect
/// free outside the result slot owned by its iteration index.
pub trait WorkloadKernel: Sync {
    /// Total number of loop iterations.
    fn len(&self) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Runs one iteration, writing into that iteration's result slot.
    fn execute(&self, iteration: u64) -> Result<(), KernelError>;
}
