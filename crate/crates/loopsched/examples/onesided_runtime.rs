//! Runs the Mandelbrot loop on the threaded one-sided runtime: every worker
//! claims a step index and an iteration range with two atomic fetch-adds and
//! computes its own chunk size, so no thread ever serves another.
//!
//!     cargo run --release --example onesided_runtime [workers]

use loopsched::platform::PlatformSpec;
use loopsched::runtime::run_loop_onesided;
use loopsched::technique::{LoopSpec, Technique, TechniqueConfig};
use loopsched::workload::{MandelbrotKernel, MandelbrotParams};

fn main() {
    let workers: usize =
        std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    let params = MandelbrotParams { width: 256, ..MandelbrotParams::default() };
    let loop_spec = LoopSpec::new(params.pixel_count(), workers).expect("valid loop");
    let platform = PlatformSpec::homogeneous(workers);

    println!(
        "{}x{} quartic escape buffer over {workers} workers\n",
        params.width, params.width
    );
    for kind in [Technique::Ss, Technique::Gss, Technique::Tss, Technique::Fac2] {
        let config = TechniqueConfig::plain(kind);
        let kernel = MandelbrotKernel::new(params).expect("kernel");
        let result =
            run_loop_onesided(&config, loop_spec, &kernel, &platform).expect("run");
        let inside =
            kernel.pixel_values().iter().filter(|&&k| k == params.max_iterations).count();
        println!(
            "{kind:>6}: {} chunks (+{} empty fetches), T_p^loop = {:.2} ms, \
             busiest/laziest PE = {}/{} iterations, {inside} pixels inside",
            result.trace.len(),
            result.wasted_steps,
            result.t_parallel_loop as f64 / 1e6,
            result.per_pe_iterations.iter().max().unwrap(),
            result.per_pe_iterations.iter().min().unwrap(),
        );
        // The multiset of chunk sizes follows the index-only formulas even
        // though the assignment order is racy.
        let mut sizes: Vec<u64> = result.trace.iter().map(|c| c.size).collect();
        sizes.sort_unstable();
        sizes.reverse();
        let head: Vec<String> = sizes.iter().take(8).map(|s| s.to_string()).collect();
        println!("        largest chunks: [{}, ...]", head.join(", "));
    }
}
