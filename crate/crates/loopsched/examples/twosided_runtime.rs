//! Runs the master-worker baseline on threads: PE 0 computes every chunk
//! with the recursive formulas and serves requests between slices of its
//! own work. The trace shows that chunk calculations are strictly
//! serialized through the master.
//!
//!     cargo run --release --example twosided_runtime [workers] [n]

use loopsched::cost::CostModel;
use loopsched::platform::PlatformSpec;
use loopsched::runtime::run_loop_twosided;
use loopsched::technique::{LoopSpec, Technique, TechniqueConfig};
use loopsched::workload::synthetic_kernel;

fn main() {
    let mut args = std::env::args().skip(1);
    let pes: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    let n: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(4096);
    let loop_spec = LoopSpec::new(n, pes).expect("valid loop");
    let platform = PlatformSpec::homogeneous(pes);
    let cost = CostModel::SyntheticRandom { mean: 5e-5, stddev: 1e-5 };

    println!("master-worker run: {n} timed iterations over {pes} PEs (master = PE 0)\n");
    for kind in [Technique::Ss, Technique::Gss, Technique::Fac2] {
        let config = TechniqueConfig::plain(kind);
        let kernel = synthetic_kernel(&cost, n, 7).expect("kernel");
        let result =
            run_loop_twosided(&config, loop_spec, &kernel, &platform, 1).expect("run");

        let mut spans = result.calc_spans.clone();
        spans.sort_unstable();
        let overlaps = spans.windows(2).filter(|w| w[0].1 > w[1].0).count();
        let mean_wait_us = if result.served_waits.is_empty() {
            0.0
        } else {
            result.served_waits.iter().sum::<u64>() as f64
                / result.served_waits.len() as f64
                / 1e3
        };
        println!(
            "{kind:>5}: {} chunks, T_p^loop = {:.2} ms, per-PE iterations {:?}",
            result.trace.len(),
            result.t_parallel_loop as f64 / 1e6,
            result.per_pe_iterations,
        );
        println!(
            "       {} chunk calculations, {overlaps} overlapping in time; \
             mean request wait {mean_wait_us:.1} us",
            spans.len(),
        );
    }
}
