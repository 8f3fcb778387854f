//! Prints the chunk-size sequence of every technique, comparing the
//! stateful recursive formulas against the index-only transformed ones.
//!
//!     cargo run --example chunk_sequences [N] [P]

use loopsched::technique::{
    generate_schedule, schedule_stats, LoopSpec, Mode, Technique, TechniqueConfig,
};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1000);
    let p: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    let loop_spec = LoopSpec::new(n, p).expect("valid loop");
    println!("chunk sequences for N={n} iterations over P={p} PEs\n");

    for kind in Technique::ALL {
        let config = match kind {
            Technique::Wf => {
                // A mildly skewed weight vector that still sums to P.
                let mut weights: Vec<f64> =
                    (0..p).map(|j| 0.6 + 0.8 * j as f64 / (p.max(2) - 1) as f64).collect();
                let sum: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w *= p as f64 / sum);
                TechniqueConfig::weighted(weights)
            }
            _ => TechniqueConfig::plain(kind),
        };
        println!("== {kind} ==");
        for mode in [Mode::Recursive, Mode::Transformed] {
            let schedule = generate_schedule(&config, loop_spec, mode, |step| step as usize % p)
                .expect("schedule generation");
            let stats = schedule_stats(&schedule);
            let head: Vec<String> =
                stats.chunk_size_profile.iter().take(12).map(|s| s.to_string()).collect();
            let ellipsis = if stats.num_steps > 12 { ", ..." } else { "" };
            println!(
                "  {mode:?}: {} steps, chunks {}..{}, sizes [{}{ellipsis}]",
                stats.num_steps,
                stats.min_chunk,
                stats.max_chunk,
                head.join(", "),
            );
        }
        println!();
    }
    println!(
        "note: the trapezoid sequences are identical in both modes; guided and \
         factoring may differ after rounding but always cover all {n} iterations."
    );
}
