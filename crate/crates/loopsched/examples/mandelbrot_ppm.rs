//! Renders the quartic escape-time set to a PPM image, scheduled by the
//! one-sided runtime: points inside come out black, escaped points blue by
//! how quickly they escaped.
//!
//!     cargo run --release --example mandelbrot_ppm [width] [out.ppm]

use std::path::PathBuf;

use loopsched::platform::PlatformSpec;
use loopsched::runtime::run_loop_onesided;
use loopsched::technique::{LoopSpec, Technique, TechniqueConfig};
use loopsched::workload::{MandelbrotKernel, MandelbrotParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let width: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(512);
    let out: PathBuf =
        args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("mandelbrot.ppm"));
    let params = MandelbrotParams { width, max_iterations: 200, ..MandelbrotParams::default() };
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4);
    let kernel = MandelbrotKernel::new(params).expect("kernel");
    let loop_spec = LoopSpec::new(params.pixel_count(), workers).expect("loop");

    let result = run_loop_onesided(
        &TechniqueConfig::plain(Technique::Fac2),
        loop_spec,
        &kernel,
        &PlatformSpec::homogeneous(workers),
    )
    .expect("run");
    kernel.write_ppm(&out).expect("write image");
    println!(
        "{width}x{width} pixels in {:.1} ms on {workers} workers ({} chunks) -> {}",
        result.t_parallel_loop as f64 / 1e6,
        result.trace.len(),
        out.display()
    );
}
