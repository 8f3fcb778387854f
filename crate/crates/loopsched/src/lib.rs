//! Dynamic loop self-scheduling with distributed chunk calculation.
//!
//! Self-scheduling techniques (SS, GSS, TSS, FAC2, WF) assign variably-sized
//! chunks of loop iterations to processing elements on demand. Classically a
//! master computes every chunk because the formulas depend on scheduler
//! state; this crate also provides the index-only transformed formulas that
//! let every worker compute its own chunk after two atomic fetch-adds on
//! shared counters, removing the master from the critical path.
//!
//! The crate has four layers:
//!
//! * [`technique`] — chunk-size formulas (recursive and index-only) and full
//!   schedule generation.
//! * [`runtime`] — real multi-threaded execution of both models over
//!   pluggable [`workload`] kernels (Mandelbrot, spin-image, synthetic).
//! * [`sim`] — a deterministic discrete-event simulator of both models on
//!   heterogeneous platforms, for experiments that need controlled PE
//!   speeds and coordination costs.
//! * [`experiment`] — a config-driven driver that runs repetitions and
//!   writes CSV/JSON reports; the `loopsched` binary is a thin wrapper
//!   around it.
//!
//! Every major capability has a runnable program under `examples/`.

pub mod cost;
pub mod error;
pub mod experiment;
pub mod platform;
pub mod runtime;
pub mod sim;
pub mod technique;
pub mod workload;

pub use cost::{CostModel, CostTable};
pub use error::{Error, Result};
pub use platform::{preset, Placement, PlatformSpec, TieBreak};
pub use technique::{
    chunk_recursive, chunk_transformed, generate_schedule, schedule_stats, Chunk, LoopSpec, Mode,
    RecursiveChunker, Schedule, ScheduleStats, Technique, TechniqueConfig,
};
