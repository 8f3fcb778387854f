//! Experiment driver CLI: a thin wrapper over `loopsched::experiment`.
//!
//! Exit codes: 0 success, 2 usage/config error, 1 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use loopsched::cost::CostModel;
use loopsched::error::Error;
use loopsched::experiment::{
    run_experiment, Backend, ExecutionModel, ExperimentConfig, OutputFormat, WorkloadSpec,
};
use loopsched::platform::Placement;
use loopsched::technique::Technique;
use loopsched::workload::MandelbrotParams;

#[derive(Parser, Debug)]
#[command(
    name = "loopsched",
    about = "Run loop self-scheduling experiments on the threaded runtimes or the platform simulator",
    after_help = "Flags mirror the TOML config keys; anything given on the command line overrides the file."
)]
struct Cli {
    /// TOML experiment config to start from.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Identifier written into the report rows.
    #[arg(long)]
    id: Option<String>,

    /// Scheduling technique: static | ss | gss | tss | fac2 | wf.
    #[arg(long)]
    technique: Option<Technique>,

    /// Per-PE weights for wf, comma separated (must sum to the PE count).
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,

    /// Loop length (required for synthetic workloads).
    #[arg(long)]
    n: Option<u64>,

    /// Execution backend: threads | simulate.
    #[arg(long)]
    backend: Option<String>,

    /// Execution model: onesided | twosided | static.
    #[arg(long)]
    model: Option<String>,

    /// Platform preset: knl-xeon-2:1 | knl-xeon-1:2.
    #[arg(long)]
    preset: Option<String>,

    /// PE count for a custom homogeneous platform.
    #[arg(long)]
    pes: Option<usize>,

    /// Per-PE relative speeds for a custom platform, comma separated.
    #[arg(long, value_delimiter = ',')]
    speeds: Option<Vec<f64>>,

    /// Coordinator/master placement: slowest | fastest | <pe index>.
    #[arg(long)]
    placement: Option<String>,

    /// Seconds per message hop.
    #[arg(long)]
    comm_latency: Option<f64>,

    /// Seconds per shared-counter read-modify-write.
    #[arg(long)]
    lock_overhead: Option<f64>,

    /// Seconds of master time per served request.
    #[arg(long)]
    serve_overhead: Option<f64>,

    /// Iterations the master runs between request-queue polls.
    #[arg(long)]
    serve_granularity: Option<u64>,

    /// Workload: synthetic | mandelbrot | spinimage.
    #[arg(long)]
    workload: Option<String>,

    /// Mean iteration cost in seconds (synthetic workload).
    #[arg(long)]
    cost_mean: Option<f64>,

    /// Iteration cost standard deviation; 0 gives constant costs.
    #[arg(long)]
    cost_sigma: Option<f64>,

    /// File with one cost per line, used as an explicit cost trace.
    #[arg(long)]
    cost_trace: Option<PathBuf>,

    /// Seconds per work unit for mandelbrot/spin-image simulate costs.
    #[arg(long)]
    cost_unit: Option<f64>,

    /// Mandelbrot image width (loop length is width squared).
    #[arg(long)]
    width: Option<u32>,

    /// Mandelbrot conversion threshold (max orbit iterations).
    #[arg(long)]
    ct: Option<u32>,

    /// Spin-image cloud size.
    #[arg(long)]
    points: Option<usize>,

    /// Spin images to compute (loop length).
    #[arg(long)]
    images: Option<u64>,

    /// Spin-image histogram width.
    #[arg(long)]
    image_width: Option<u32>,

    /// Spin-image bin size.
    #[arg(long)]
    bin_size: Option<f64>,

    /// Spin-image support angle in radians.
    #[arg(long)]
    support_angle: Option<f64>,

    /// Repetitions (default: 20 simulated, 5 threaded).
    #[arg(long)]
    reps: Option<u32>,

    #[arg(long)]
    seed: Option<u64>,

    /// Report format: csv | json.
    #[arg(long)]
    format: Option<String>,

    /// Report path.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Include full chunk traces in JSON reports.
    #[arg(long)]
    trace: bool,
}

fn parse_enum<T>(what: &str, value: &str, pairs: &[(&str, T)]) -> Result<T, Error>
where
    T: Copy,
{
    pairs
        .iter()
        .find(|(name, _)| *name == value.to_ascii_lowercase())
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let options: Vec<&str> = pairs.iter().map(|(n, _)| *n).collect();
            Error::InvalidConfig(format!("{what} must be one of {options:?}, got `{value}`"))
        })
}

fn build_config(cli: Cli) -> Result<ExperimentConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::from_toml_file(path)?,
        None => {
            // A minimal default; flags fill in the rest.
            ExperimentConfig {
                experiment_id: "experiment".into(),
                technique: cli.technique.unwrap_or(Technique::Ss),
                weights: None,
                n: None,
                backend: Backend::Simulate,
                model: ExecutionModel::Onesided,
                preset: None,
                pes: None,
                speeds: None,
                placement: None,
                comm_latency: None,
                lock_overhead: None,
                serve_overhead: None,
                tie_break: None,
                serve_granularity: 1,
                workload: WorkloadSpec::Synthetic { cost: CostModel::constant(1e-4) },
                repetitions: None,
                seed: 42,
                out: PathBuf::from("results.csv"),
                format: OutputFormat::Csv,
                trace: false,
            }
        }
    };

    if let Some(id) = cli.id.clone() {
        config.experiment_id = id;
    }
    if let Some(technique) = cli.technique {
        config.technique = technique;
    }
    if cli.weights.is_some() {
        config.weights = cli.weights.clone();
    }
    if cli.n.is_some() {
        config.n = cli.n;
    }
    if let Some(backend) = &cli.backend {
        config.backend = parse_enum(
            "backend",
            backend,
            &[("threads", Backend::Threads), ("simulate", Backend::Simulate)],
        )?;
    }
    if let Some(model) = &cli.model {
        config.model = parse_enum(
            "model",
            model,
            &[
                ("onesided", ExecutionModel::Onesided),
                ("twosided", ExecutionModel::Twosided),
                ("static", ExecutionModel::Static),
            ],
        )?;
    }
    if cli.preset.is_some() {
        config.preset = cli.preset.clone();
        config.pes = None;
        config.speeds = None;
    }
    if cli.pes.is_some() {
        config.pes = cli.pes;
        config.preset = None;
    }
    if cli.speeds.is_some() {
        config.speeds = cli.speeds.clone();
        config.preset = None;
    }
    if let Some(placement) = &cli.placement {
        config.placement = Some(placement.parse::<Placement>()?);
    }
    if cli.comm_latency.is_some() {
        config.comm_latency = cli.comm_latency;
    }
    if cli.lock_overhead.is_some() {
        config.lock_overhead = cli.lock_overhead;
    }
    if cli.serve_overhead.is_some() {
        config.serve_overhead = cli.serve_overhead;
    }
    if let Some(granularity) = cli.serve_granularity {
        config.serve_granularity = granularity;
    }
    if let Some(workload) = &cli.workload {
        config.workload = match workload.to_ascii_lowercase().as_str() {
            "synthetic" => WorkloadSpec::Synthetic { cost: CostModel::constant(1e-4) },
            "mandelbrot" => WorkloadSpec::Mandelbrot {
                params: MandelbrotParams::default(),
                cost_unit: 1e-6,
            },
            "spinimage" => WorkloadSpec::SpinImage {
                points: 512,
                images: 256,
                image_width: 5,
                bin_size: 0.01,
                support_angle: 2.0,
                cloud_seed: 7,
                cost_unit: 1e-6,
            },
            other => {
                return Err(Error::InvalidConfig(format!(
                    "workload must be synthetic, mandelbrot, or spinimage, got `{other}`"
                )))
            }
        };
    }
    apply_workload_flags(&mut config, &cli)?;
    if cli.reps.is_some() {
        config.repetitions = cli.reps;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(format) = &cli.format {
        config.format =
            parse_enum("format", format, &[("csv", OutputFormat::Csv), ("json", OutputFormat::Json)])?;
    }
    if let Some(out) = cli.out {
        config.out = out;
    }
    if cli.trace {
        config.trace = true;
    }
    Ok(config)
}

fn apply_workload_flags(config: &mut ExperimentConfig, cli: &Cli) -> Result<(), Error> {
    match &mut config.workload {
        WorkloadSpec::Synthetic { cost } => {
            if let Some(path) = &cli.cost_trace {
                let text = std::fs::read_to_string(path)?;
                let costs = text
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(|l| l.trim().parse::<f64>())
                    .collect::<Result<Vec<f64>, _>>()
                    .map_err(|e| Error::InvalidCost(format!("bad cost trace: {e}")))?;
                *cost = CostModel::Trace { costs };
            } else if cli.cost_mean.is_some() || cli.cost_sigma.is_some() {
                let mean = cli.cost_mean.unwrap_or(1e-4);
                let sigma = cli.cost_sigma.unwrap_or(0.0);
                *cost = if sigma > 0.0 {
                    CostModel::SyntheticRandom { mean, stddev: sigma }
                } else {
                    CostModel::Constant { mean }
                };
            }
        }
        WorkloadSpec::Mandelbrot { params, cost_unit } => {
            if let Some(width) = cli.width {
                params.width = width;
            }
            if let Some(ct) = cli.ct {
                params.max_iterations = ct;
            }
            if let Some(unit) = cli.cost_unit {
                *cost_unit = unit;
            }
        }
        WorkloadSpec::SpinImage {
            points,
            images,
            image_width,
            bin_size,
            support_angle,
            cost_unit,
            ..
        } => {
            if let Some(v) = cli.points {
                *points = v;
            }
            if let Some(v) = cli.images {
                *images = v;
            }
            if let Some(v) = cli.image_width {
                *image_width = v;
            }
            if let Some(v) = cli.bin_size {
                *bin_size = v;
            }
            if let Some(v) = cli.support_angle {
                *support_angle = v;
            }
            if let Some(v) = cli.cost_unit {
                *cost_unit = v;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(cli) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&config) {
        Ok(result) => {
            println!(
                "{}: technique={} model={} backend={} reps={} median T_p^loop = {:.6e} s -> {}",
                result.experiment_id,
                result.technique,
                result.model,
                result.backend,
                result.repetitions.len(),
                result.median_t_parallel_loop,
                config.out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
