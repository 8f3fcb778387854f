//! Compares the two heterogeneous presets at equal PE counts: shifting the
//! mix from slow-dominated (2:1) to fast-dominated (1:2) raises the total
//! processing capacity, and the self-scheduled one-sided times follow it.
//!
//!     cargo run --release --example preset_ratios

use loopsched::cost::CostModel;
use loopsched::experiment::median;
use loopsched::platform::preset;
use loopsched::sim::simulate_onesided;
use loopsched::technique::{LoopSpec, Technique, TechniqueConfig};

fn main() {
    let n = 8000u64;
    let cost = CostModel::constant(1e-4);
    println!("one-sided medians over 10 seeds, N={n}:\n");
    println!("{:>8} {:>14} {:>14} {:>9}", "", "knl-xeon-2:1", "knl-xeon-1:2", "speedup");
    for kind in [Technique::Ss, Technique::Gss, Technique::Tss, Technique::Fac2] {
        let config = TechniqueConfig::plain(kind);
        let mut medians = Vec::new();
        for name in ["knl-xeon-2:1", "knl-xeon-1:2"] {
            let platform = preset(name).expect("preset");
            let l = LoopSpec::new(n, platform.pe_count).expect("loop");
            let times: Vec<f64> = (0..10u64)
                .map(|seed| {
                    simulate_onesided(&config, l, &cost, &platform, seed)
                        .expect("sim")
                        .t_parallel_loop
                })
                .collect();
            medians.push(median(&times));
        }
        println!(
            "{:>8} {:>12.2}ms {:>12.2}ms {:>8.2}x",
            kind.name(),
            medians[0] * 1e3,
            medians[1] * 1e3,
            medians[0] / medians[1]
        );
    }
    let (a, b) = (preset("knl-xeon-2:1").unwrap(), preset("knl-xeon-1:2").unwrap());
    println!(
        "\ntotal capacity: {:.2} vs {:.2} speed units over {} PEs each",
        a.total_speed(),
        b.total_speed(),
        a.pe_count
    );
}
