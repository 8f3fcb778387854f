//! Sweeps the coordinator over every PE of a heterogeneous platform and
//! simulates the one-sided model: since the coordinator only hosts two
//! counters, moving it changes the time only through message-hop terms.
//!
//!     cargo run --release --example placement_insensitivity

use loopsched::cost::CostModel;
use loopsched::platform::preset;
use loopsched::sim::simulate_onesided;
use loopsched::technique::{LoopSpec, Technique, TechniqueConfig};

fn main() {
    let config = TechniqueConfig::plain(Technique::Ss);
    let cost = CostModel::constant(1e-4);
    let base = preset("knl-xeon-2:1").expect("preset");
    let l = LoopSpec::new(4000, base.pe_count).expect("loop");

    let mut times = Vec::new();
    for coordinator in 0..base.pe_count {
        let platform = base.clone().with_coordinator(coordinator);
        let r = simulate_onesided(&config, l, &cost, &platform, 42).expect("sim");
        times.push((coordinator, platform.speeds[coordinator], r.t_parallel_loop));
    }
    println!("one-sided ss, counters hosted on each PE in turn (seed 42):\n");
    for (pe, speed, t) in &times {
        println!("  coordinator PE {pe:>2} (speed {speed:.3}): T_p^loop = {:.6} s", t);
    }
    let min = times.iter().map(|t| t.2).fold(f64::INFINITY, f64::min);
    let max = times.iter().map(|t| t.2).fold(0.0, f64::max);
    let steps = 4000.0 + base.pe_count as f64;
    println!(
        "\nspread {:.3} us against a locality budget of steps x 2 x latency = {:.3} us",
        (max - min) * 1e6,
        steps * 2.0 * base.comm_latency * 1e6
    );
}
