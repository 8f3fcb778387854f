//! Config-driven experiment runner: repetitions, aggregation, reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::platform::{preset, Placement, PlatformSpec, TieBreak};
use crate::runtime::{run_loop_onesided, run_loop_static, run_loop_twosided, RunResult};
use crate::sim::{replay_schedule, simulate_onesided, simulate_twosided, SimResult};
use crate::technique::{generate_schedule, LoopSpec, Mode, Technique, TechniqueConfig};
use crate::workload::spin_image::support_counts;
use crate::workload::{
    generate_point_cloud, synthetic_kernel, MandelbrotKernel, MandelbrotParams, SpinImageKernel,
    SpinImageParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Threads,
    #[default]
    Simulate,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Threads => "threads",
            Backend::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionModel {
    #[default]
    Onesided,
    Twosided,
    Static,
}

impl ExecutionModel {
    pub fn name(self) -> &'static str {
        match self {
            ExecutionModel::Onesided => "onesided",
            ExecutionModel::Twosided => "twosided",
            ExecutionModel::Static => "static",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_cost_unit() -> f64 {
    1e-6
}

/// What the loop iterations do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum WorkloadSpec {
    /// Timed iterations drawn from a cost model (busy-spin under the
    /// threads backend).
    Synthetic { cost: CostModel },
    /// Quartic Mandelbrot pixels; under the simulate backend the cost of a
    /// pixel is proportional to its actual escape iteration count.
    Mandelbrot {
        #[serde(default)]
        params: MandelbrotParams,
        #[serde(default = "default_cost_unit")]
        cost_unit: f64,
    },
    /// Spin images over a seeded synthetic point cloud; under the simulate
    /// backend the cost of an image is proportional to its support size.
    SpinImage {
        #[serde(default = "default_points")]
        points: usize,
        #[serde(default = "default_images")]
        images: u64,
        #[serde(default = "default_image_width")]
        image_width: u32,
        #[serde(default = "default_bin_size")]
        bin_size: f64,
        #[serde(default = "default_support_angle")]
        support_angle: f64,
        #[serde(default = "default_cloud_seed")]
        cloud_seed: u64,
        #[serde(default = "default_cost_unit")]
        cost_unit: f64,
    },
}

fn default_points() -> usize {
    512
}
fn default_images() -> u64 {
    256
}
fn default_image_width() -> u32 {
    5
}
fn default_bin_size() -> f64 {
    0.01
}
fn default_support_angle() -> f64 {
    2.0
}
fn default_cloud_seed() -> u64 {
    7
}

fn default_id() -> String {
    "experiment".into()
}

fn default_seed() -> u64 {
    42
}

fn default_out() -> PathBuf {
    PathBuf::from("results.csv")
}

fn default_granularity() -> u64 {
    1
}

/// A full experiment description. Loadable from a TOML file; the CLI flags
/// mirror these keys and override them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_id")]
    pub experiment_id: String,
    pub technique: Technique,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Loop length; required for synthetic workloads, derived otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub model: ExecutionModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speeds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<Placement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comm_latency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock_overhead: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serve_overhead: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_break: Option<TieBreak>,
    #[serde(default = "default_granularity")]
    pub serve_granularity: u64,
    pub workload: WorkloadSpec,
    /// Defaults to 20 for the simulate backend and 5 for threads.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<u32>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub trace: bool,
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }

    pub fn repetitions(&self) -> u32 {
        self.repetitions.unwrap_or(match self.backend {
            Backend::Simulate => 20,
            Backend::Threads => 5,
        })
    }
}

/// One repetition's aggregate measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub repetition: u32,
    /// Seconds (simulated or wall-clock).
    pub t_parallel_loop: f64,
    pub num_steps: u64,
    /// Coefficient of variation of per-PE finish times.
    pub cov_finish_times: f64,
    /// Max over mean of per-PE finish times.
    pub max_over_mean_finish: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub pe: usize,
    pub step: u64,
    pub start: u64,
    pub size: u64,
    pub t_begin: f64,
    pub t_end: f64,
}

/// Aggregated outcome of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment_id: String,
    pub technique: String,
    pub model: String,
    pub backend: String,
    pub preset: String,
    pub master_pe: usize,
    pub repetitions: Vec<RepetitionRecord>,
    pub median_t_parallel_loop: f64,
    pub min_t_parallel_loop: f64,
    pub max_t_parallel_loop: f64,
    pub median_num_steps: f64,
    pub median_cov_finish_times: f64,
    /// Per-PE executed iteration counts from the first repetition.
    pub per_pe_iterations: Vec<u64>,
    /// Full chunk traces per repetition, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<Vec<TraceRow>>>,
}

/// Lower-level handle on everything an `ExperimentConfig` expands into.
pub struct ResolvedExperiment {
    pub technique: TechniqueConfig,
    pub loop_spec: LoopSpec,
    pub platform: PlatformSpec,
    pub workload: WorkloadSpec,
}

pub fn resolve(config: &ExperimentConfig) -> Result<ResolvedExperiment> {
    if config.repetitions() == 0 {
        return Err(Error::InvalidConfig("repetitions must be >= 1".into()));
    }
    let mut platform = match (&config.preset, &config.pes, &config.speeds) {
        (Some(name), None, None) => preset(name)?,
        (Some(_), _, _) => {
            return Err(Error::InvalidConfig(
                "give either a preset or explicit pes/speeds, not both".into(),
            ))
        }
        (None, Some(p), Some(speeds)) => {
            let mut platform = PlatformSpec::homogeneous(*p);
            platform.speeds = speeds.clone();
            platform
        }
        (None, Some(p), None) => PlatformSpec::homogeneous(*p),
        (None, None, Some(speeds)) => {
            let mut platform = PlatformSpec::homogeneous(speeds.len());
            platform.speeds = speeds.clone();
            platform
        }
        (None, None, None) => {
            return Err(Error::InvalidConfig(
                "platform missing: set preset or pes/speeds".into(),
            ))
        }
    };
    if let Some(v) = config.comm_latency {
        platform.comm_latency = v;
    }
    if let Some(v) = config.lock_overhead {
        platform.lock_overhead = v;
    }
    if let Some(v) = config.serve_overhead {
        platform.serve_overhead = v;
    }
    if let Some(v) = config.tie_break {
        platform.tie_break = v;
    }
    platform.coordinator_pe =
        config.placement.unwrap_or(Placement::Index(0)).resolve(&platform)?;
    platform.validate()?;

    let technique = match config.technique {
        Technique::Wf => {
            let weights = config.weights.clone().ok_or_else(|| {
                Error::InvalidTechnique("weighted factoring requires weights".into())
            })?;
            TechniqueConfig::weighted(weights)
        }
        kind => {
            if config.weights.is_some() {
                return Err(Error::InvalidTechnique(
                    "weights are only meaningful for weighted factoring".into(),
                ));
            }
            TechniqueConfig::plain(kind)
        }
    };
    technique.validate(platform.pe_count)?;
    if config.model == ExecutionModel::Static && config.technique != Technique::Static {
        return Err(Error::InvalidConfig(
            "the static execution model implies the static technique".into(),
        ));
    }

    let n = match &config.workload {
        WorkloadSpec::Synthetic { .. } => config.n.ok_or_else(|| {
            Error::InvalidConfig("synthetic workloads need an explicit n".into())
        })?,
        WorkloadSpec::Mandelbrot { params, .. } => {
            params.validate()?;
            let n = params.pixel_count();
            if config.n.is_some_and(|explicit| explicit != n) {
                return Err(Error::InvalidConfig(format!(
                    "n={} conflicts with the {n}-pixel mandelbrot workload",
                    config.n.unwrap()
                )));
            }
            n
        }
        WorkloadSpec::SpinImage { points, images, .. } => {
            if *images == 0 || *images > *points as u64 {
                return Err(Error::InvalidConfig(
                    "spin-image count must be in 1..=points".into(),
                ));
            }
            if config.n.is_some_and(|explicit| explicit != *images) {
                return Err(Error::InvalidConfig(format!(
                    "n={} conflicts with the {images}-image spin-image workload",
                    config.n.unwrap()
                )));
            }
            *images
        }
    };
    let loop_spec = LoopSpec::new(n, platform.pe_count)?;
    Ok(ResolvedExperiment { technique, loop_spec, platform, workload: config.workload.clone() })
}

fn spin_image_params(
    points: usize,
    images: u64,
    image_width: u32,
    bin_size: f64,
    support_angle: f64,
    cloud_seed: u64,
) -> SpinImageParams {
    SpinImageParams {
        image_width,
        bin_size,
        support_angle,
        points: generate_point_cloud(points, cloud_seed),
        image_count: images,
    }
}

/// Cost model seen by the simulate backend for a given workload.
pub fn workload_cost_model(workload: &WorkloadSpec) -> Result<CostModel> {
    match workload {
        WorkloadSpec::Synthetic { cost } => Ok(cost.clone()),
        WorkloadSpec::Mandelbrot { params, cost_unit } => {
            Ok(CostModel::MandelbrotProfile { params: *params, unit: *cost_unit })
        }
        WorkloadSpec::SpinImage {
            points,
            images,
            image_width,
            bin_size,
            support_angle,
            cloud_seed,
            cost_unit,
        } => {
            // Pre-pass: one image's work scales with how many cloud points
            // pass its support-angle test.
            let params = spin_image_params(
                *points,
                *images,
                *image_width,
                *bin_size,
                *support_angle,
                *cloud_seed,
            );
            params.validate()?;
            let costs = (0..*images as usize)
                .map(|i| (support_counts(&params, i).0 as f64 + 1.0) * cost_unit)
                .collect();
            Ok(CostModel::Trace { costs })
        }
    }
}

enum RepOutcome {
    Sim(SimResult),
    Threads(RunResult),
}

impl RepOutcome {
    fn record(&self, repetition: u32) -> RepetitionRecord {
        match self {
            RepOutcome::Sim(r) => RepetitionRecord {
                repetition,
                t_parallel_loop: r.t_parallel_loop,
                num_steps: r.total_steps,
                cov_finish_times: coefficient_of_variation(&r.per_pe_finish),
                max_over_mean_finish: max_over_mean(&r.per_pe_finish),
            },
            RepOutcome::Threads(r) => {
                let finish: Vec<f64> =
                    r.per_pe_finish.iter().map(|&ns| ns as f64 * 1e-9).collect();
                RepetitionRecord {
                    repetition,
                    t_parallel_loop: r.t_parallel_loop as f64 * 1e-9,
                    num_steps: r.trace.len() as u64,
                    cov_finish_times: coefficient_of_variation(&finish),
                    max_over_mean_finish: max_over_mean(&finish),
                }
            }
        }
    }

    fn per_pe_iterations(&self) -> Vec<u64> {
        match self {
            RepOutcome::Sim(r) => r.per_pe_iterations.clone(),
            RepOutcome::Threads(r) => r.per_pe_iterations.clone(),
        }
    }

    fn trace_rows(&self) -> Vec<TraceRow> {
        match self {
            RepOutcome::Sim(r) => r
                .trace
                .iter()
                .map(|t| TraceRow {
                    pe: t.pe,
                    step: t.step,
                    start: t.start,
                    size: t.size,
                    t_begin: t.t_begin,
                    t_end: t.t_end,
                })
                .collect(),
            RepOutcome::Threads(r) => r
                .trace
                .iter()
                .map(|t| TraceRow {
                    pe: t.pe,
                    step: t.step,
                    start: t.start,
                    size: t.size,
                    t_begin: t.t_begin as f64 * 1e-9,
                    t_end: t.t_end as f64 * 1e-9,
                })
                .collect(),
        }
    }
}

fn run_repetition(
    config: &ExperimentConfig,
    resolved: &ResolvedExperiment,
    seed: u64,
) -> Result<RepOutcome> {
    let ResolvedExperiment { technique, loop_spec, platform, workload } = resolved;
    match config.backend {
        Backend::Simulate => {
            let cost = workload_cost_model(workload)?;
            let sim = match config.model {
                ExecutionModel::Onesided => {
                    simulate_onesided(technique, *loop_spec, &cost, platform, seed)?
                }
                ExecutionModel::Twosided => simulate_twosided(
                    technique,
                    *loop_spec,
                    &cost,
                    platform,
                    config.serve_granularity,
                    seed,
                )?,
                ExecutionModel::Static => {
                    let schedule = generate_schedule(
                        technique,
                        *loop_spec,
                        Mode::Transformed,
                        |step| step as usize % loop_spec.p,
                    )?;
                    replay_schedule(&schedule, &cost, platform, seed)?
                }
            };
            Ok(RepOutcome::Sim(sim))
        }
        Backend::Threads => {
            let run = match workload {
                WorkloadSpec::Synthetic { cost } => {
                    let kernel = synthetic_kernel(cost, loop_spec.n, seed)?;
                    dispatch_threads(config, technique, *loop_spec, &kernel, platform)?
                }
                WorkloadSpec::Mandelbrot { params, .. } => {
                    let kernel = MandelbrotKernel::new(*params)?;
                    dispatch_threads(config, technique, *loop_spec, &kernel, platform)?
                }
                WorkloadSpec::SpinImage {
                    points,
                    images,
                    image_width,
                    bin_size,
                    support_angle,
                    cloud_seed,
                    ..
                } => {
                    let params = spin_image_params(
                        *points,
                        *images,
                        *image_width,
                        *bin_size,
                        *support_angle,
                        *cloud_seed,
                    );
                    let kernel = SpinImageKernel::new(params)?;
                    dispatch_threads(config, technique, *loop_spec, &kernel, platform)?
                }
            };
            Ok(RepOutcome::Threads(run))
        }
    }
}

fn dispatch_threads(
    config: &ExperimentConfig,
    technique: &TechniqueConfig,
    loop_spec: LoopSpec,
    kernel: &(impl crate::workload::WorkloadKernel + ?Sized),
    platform: &PlatformSpec,
) -> Result<RunResult> {
    match config.model {
        ExecutionModel::Onesided => run_loop_onesided(technique, loop_spec, kernel, platform),
        ExecutionModel::Twosided => {
            run_loop_twosided(technique, loop_spec, kernel, platform, config.serve_granularity)
        }
        ExecutionModel::Static => run_loop_static(loop_spec, kernel, platform),
    }
}

/// Runs all repetitions and aggregates them, without touching the filesystem.
pub fn run_experiment_records(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let resolved = resolve(config)?;
    let reps = config.repetitions();
    let mut records = Vec::with_capacity(reps as usize);
    let mut per_pe_iterations = Vec::new();
    let mut traces = config.trace.then(Vec::new);
    for rep in 0..reps {
        let outcome = run_repetition(config, &resolved, config.seed + rep as u64)?;
        records.push(outcome.record(rep));
        if rep == 0 {
            per_pe_iterations = outcome.per_pe_iterations();
        }
        if let Some(traces) = traces.as_mut() {
            traces.push(outcome.trace_rows());
        }
    }
    let times: Vec<f64> = records.iter().map(|r| r.t_parallel_loop).collect();
    let steps: Vec<f64> = records.iter().map(|r| r.num_steps as f64).collect();
    let covs: Vec<f64> = records.iter().map(|r| r.cov_finish_times).collect();
    Ok(ExperimentResult {
        experiment_id: config.experiment_id.clone(),
        technique: config.technique.name().into(),
        model: config.model.name().into(),
        backend: config.backend.name().into(),
        preset: config.preset.clone().unwrap_or_else(|| "custom".into()),
        master_pe: resolved.platform.coordinator_pe,
        median_t_parallel_loop: median(&times),
        min_t_parallel_loop: times.iter().copied().fold(f64::INFINITY, f64::min),
        max_t_parallel_loop: times.iter().copied().fold(0.0, f64::max),
        median_num_steps: median(&steps),
        median_cov_finish_times: median(&covs),
        repetitions: records,
        per_pe_iterations,
        traces,
    })
}

/// Runs the experiment and writes its report to `config.out`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let result = run_experiment_records(config)?;
    emit_report(std::slice::from_ref(&result), config.format, &config.out)?;
    Ok(result)
}

pub const CSV_HEADER: [&str; 10] = [
    "experiment_id",
    "technique",
    "model",
    "backend",
    "preset",
    "master_pe",
    "repetition",
    "t_parallel_loop",
    "num_steps",
    "cov_finish_times",
];

/// Writes one row per repetition plus a `median` summary row per experiment.
pub fn emit_report(results: &[ExperimentResult], format: OutputFormat, path: &Path) -> Result<()> {
    if results.is_empty() {
        return Err(Error::InvalidConfig("refusing to write an empty report".into()));
    }
    match format {
        OutputFormat::Json => {
            let file = BufWriter::new(File::create(path)?);
            let mut file = file;
            serde_json::to_writer_pretty(&mut file, results)?;
            file.write_all(b"\n")?;
            file.flush()?;
        }
        OutputFormat::Csv => {
            let mut writer = csv::Writer::from_path(path)?;
            writer.write_record(CSV_HEADER)?;
            for result in results {
                let fixed = [
                    result.experiment_id.as_str(),
                    result.technique.as_str(),
                    result.model.as_str(),
                    result.backend.as_str(),
                    result.preset.as_str(),
                ];
                let master = result.master_pe.to_string();
                for rep in &result.repetitions {
                    let mut row: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
                    row.push(master.clone());
                    row.push(rep.repetition.to_string());
                    row.push(format_f64(rep.t_parallel_loop));
                    row.push(rep.num_steps.to_string());
                    row.push(format_f64(rep.cov_finish_times));
                    writer.write_record(&row)?;
                }
                let mut row: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
                row.push(master.clone());
                row.push("median".into());
                row.push(format_f64(result.median_t_parallel_loop));
                row.push(format_f64(result.median_num_steps));
                row.push(format_f64(result.median_cov_finish_times));
                writer.write_record(&row)?;
            }
            writer.flush()?;
        }
    }
    Ok(())
}

/// One parsed CSV report row (repetition rows and summary rows alike).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment_id: String,
    pub technique: String,
    pub model: String,
    pub backend: String,
    pub preset: String,
    pub master_pe: usize,
    pub repetition: String,
    pub t_parallel_loop: f64,
    pub num_steps: f64,
    pub cov_finish_times: f64,
}

/// Reads back a CSV report produced by [`emit_report`].
pub fn read_report_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

fn format_f64(value: f64) -> String {
    // Shortest representation that round-trips; stable across runs.
    format!("{value}")
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

fn coefficient_of_variation(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean == 0.0 {
        return 0.0;
    }
    let variance =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    variance.sqrt() / mean
}

fn max_over_mean(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean == 0.0 {
        return 0.0;
    }
    values.iter().copied().fold(0.0, f64::max) / mean
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            experiment_id: "unit".into(),
            technique: Technique::Ss,
            weights: None,
            n: Some(200),
            backend: Backend::Simulate,
            model: ExecutionModel::Onesided,
            preset: None,
            pes: Some(4),
            speeds: None,
            placement: None,
            comm_latency: None,
            lock_overhead: None,
            serve_overhead: None,
            tie_break: None,
            serve_granularity: 1,
            workload: WorkloadSpec::Synthetic { cost: CostModel::constant(1e-4) },
            repetitions: Some(3),
            seed: 1,
            out: PathBuf::from("unused.csv"),
            format: OutputFormat::Csv,
            trace: false,
        }
    }

    #[test]
    fn csv_report_has_one_row_per_rep_plus_summary() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config();
        config.out = dir.path().join("report.csv");
        run_experiment(&config).unwrap();
        let rows = read_report_csv(&config.out).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[3].repetition, "median");
        assert!(rows[..3].iter().all(|r| r.technique == "ss" && r.backend == "simulate"));
    }

    #[test]
    fn json_report_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config();
        config.format = OutputFormat::Json;
        config.out = dir.path().join("report.json");
        config.trace = true;
        let result = run_experiment(&config).unwrap();
        let text = std::fs::read_to_string(&config.out).unwrap();
        let parsed: Vec<ExperimentResult> = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, vec![result]);
    }

    #[test]
    fn empty_report_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nope.csv");
        assert!(emit_report(&[], OutputFormat::Csv, &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn wf_without_weights_is_a_usage_error() {
        let mut config = base_config();
        config.technique = Technique::Wf;
        let err = run_experiment_records(&config).unwrap_err();
        assert!(err.is_usage(), "{err}");
    }

    #[test]
    fn simulator_outputs_are_reproducible_byte_for_byte() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config();
        config.workload = WorkloadSpec::Synthetic {
            cost: CostModel::SyntheticRandom { mean: 1e-4, stddev: 3e-5 },
        };
        config.preset = Some("knl-xeon-2:1".into());
        config.pes = None;
        config.out = dir.path().join("a.csv");
        run_experiment(&config).unwrap();
        let a = std::fs::read(&config.out).unwrap();
        config.out = dir.path().join("b.csv");
        run_experiment(&config).unwrap();
        let b = std::fs::read(&config.out).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn threads_backend_runs_all_models() {
        let dir = tempfile::tempdir().unwrap();
        for (model, technique) in [
            (ExecutionModel::Onesided, Technique::Gss),
            (ExecutionModel::Twosided, Technique::Ss),
            (ExecutionModel::Static, Technique::Static),
        ] {
            let mut config = base_config();
            config.backend = Backend::Threads;
            config.model = model;
            config.technique = technique;
            config.n = Some(64);
            config.repetitions = Some(1);
            config.workload =
                WorkloadSpec::Synthetic { cost: CostModel::constant(1e-6) };
            config.out = dir.path().join(format!("{}.csv", model.name()));
            let result = run_experiment(&config).unwrap();
            assert_eq!(result.per_pe_iterations.iter().sum::<u64>(), 64);
        }
    }

    #[test]
    fn toml_config_round_trip() {
        let toml_text = r#"
            experiment_id = "demo"
            technique = "gss"
            n = 1000
            backend = "simulate"
            model = "twosided"
            preset = "knl-xeon-2:1"
            placement = "slowest"
            seed = 9
            out = "demo.csv"

            [workload]
            name = "synthetic"
            [workload.cost]
            kind = "constant"
            mean = 1e-4
        "#;
        let config: ExperimentConfig = toml::from_str(toml_text).unwrap();
        assert_eq!(config.technique, Technique::Gss);
        assert_eq!(config.placement, Some(Placement::Slowest));
        assert!(matches!(config.workload, WorkloadSpec::Synthetic { .. }));
        let result = run_experiment_records(&ExperimentConfig {
            out: PathBuf::from("unused"),
            repetitions: Some(2),
            ..config
        })
        .unwrap();
        assert_eq!(result.master_pe, 0);
        assert_eq!(result.repetitions.len(), 2);
    }

    #[test]
    fn static_model_requires_static_technique() {
        let mut config = base_config();
        config.model = ExecutionModel::Static;
        config.technique = Technique::Gss;
        assert!(run_experiment_records(&config).unwrap_err().is_usage());
    }
}
