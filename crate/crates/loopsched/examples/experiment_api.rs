//! Drives the experiment layer programmatically: one config, both execution
//! models, CSV and JSON reports, and a parse-back of the CSV rows.
//!
//!     cargo run --release --example experiment_api

use loopsched::cost::CostModel;
use loopsched::experiment::{
    emit_report, read_report_csv, run_experiment_records, Backend, ExecutionModel,
    ExperimentConfig, OutputFormat, WorkloadSpec,
};
use loopsched::platform::Placement;
use loopsched::technique::Technique;

fn main() {
    let out_dir = std::env::temp_dir().join("loopsched-experiment-api");
    std::fs::create_dir_all(&out_dir).expect("temp dir");

    let base = ExperimentConfig {
        experiment_id: "demo".into(),
        technique: Technique::Gss,
        weights: None,
        n: Some(8000),
        backend: Backend::Simulate,
        model: ExecutionModel::Onesided,
        preset: Some("knl-xeon-2:1".into()),
        pes: None,
        speeds: None,
        placement: Some(Placement::Slowest),
        comm_latency: None,
        lock_overhead: None,
        serve_overhead: None,
        tie_break: None,
        serve_granularity: 1,
        workload: WorkloadSpec::Synthetic {
            cost: CostModel::SyntheticRandom { mean: 1e-4, stddev: 2e-5 },
        },
        repetitions: Some(10),
        seed: 1,
        out: out_dir.join("unused.csv"),
        format: OutputFormat::Csv,
        trace: false,
    };

    let mut results = Vec::new();
    for model in [ExecutionModel::Onesided, ExecutionModel::Twosided] {
        let config = ExperimentConfig {
            experiment_id: format!("demo-{}", model.name()),
            model,
            ..base.clone()
        };
        let result = run_experiment_records(&config).expect("experiment");
        println!(
            "{:<14} median T_p^loop = {:.4} ms over {} reps (steps: {})",
            result.experiment_id,
            result.median_t_parallel_loop * 1e3,
            result.repetitions.len(),
            result.median_num_steps,
        );
        results.push(result);
    }

    let csv_path = out_dir.join("demo.csv");
    let json_path = out_dir.join("demo.json");
    emit_report(&results, OutputFormat::Csv, &csv_path).expect("csv");
    emit_report(&results, OutputFormat::Json, &json_path).expect("json");
    let rows = read_report_csv(&csv_path).expect("parse back");
    println!(
        "\nwrote {} CSV rows ({} summaries) to {} and JSON to {}",
        rows.len(),
        rows.iter().filter(|r| r.repetition == "median").count(),
        csv_path.display(),
        json_path.display()
    );
}
