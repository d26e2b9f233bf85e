//! The `sise` command line: argument definitions and the four subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::data::{
    estimate_time_frame, frame_from_intervals, summarize_observations, validate_records, CensoredInterval,
    CensoredSample, TimeFrame,
};
use crate::error::SiseError;
use crate::inference::{bootstrap_bands, impute_event_time, BootstrapOptions};
use crate::io::{format_float, read_csv, write_curve, CsvInput, FitFile, IoError, StepFitJson};
use crate::npmle::{grid_to_survival, step_to_grid, GriddedDensity, DEFAULT_STEP};
use crate::par::Execution;
use crate::pipeline::FitPipeline;
use crate::simbench::{run_scenario, run_split, s1_sweep, write_long_csv, Preset, ScenarioConfig, SplitInput};
use crate::smoothing::PenaltyKind;

#[derive(Debug, Parser)]
#[command(name = "sise", version, about = "Smoothed interval-censored survival estimation")]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true, env = "SISE_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit raw and smoothed estimates to an observations or intervals CSV.
    Fit(FitArgs),
    /// Run a simulation scenario from a config file or a preset.
    Simulate(SimulateArgs),
    /// Impute event times of censored intervals from a fitted density.
    Impute(ImputeArgs),
    /// Bootstrap confidence bands for the survival curve.
    Bootstrap(BootstrapArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FitFlags {
    /// Penalty for the smoothing criterion.
    #[arg(long, default_value = "ne", value_parser = ["n", "nm", "ne"])]
    pub penalty: String,
    /// Grid step.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub delta_t: f64,
    /// Upper bound on the bandwidth (default: frame right end times the grid step).
    #[arg(long)]
    pub max_bandwidth: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluations spent in the global bandwidth search.
    #[arg(long, default_value_t = 100)]
    pub global_budget: usize,
}

impl FitFlags {
    fn pipeline(&self) -> Result<FitPipeline, CliError> {
        if !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            return Err(CliError::Usage(format!("--delta-t must be positive, got {}", self.delta_t)));
        }
        if let Some(d) = self.max_bandwidth {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(CliError::Usage(format!("--max-bandwidth must be non-negative, got {d}")));
            }
        }
        Ok(FitPipeline {
            step: self.delta_t,
            penalty: self.penalty.parse::<PenaltyKind>().map_err(CliError::Usage)?,
            max_bandwidth: self.max_bandwidth,
            global_budget: self.global_budget,
            seed: self.seed,
            ..FitPipeline::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub flags: FitFlags,
    #[arg(long, short, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario config JSON.
    #[arg(required_unless_present_any = ["preset", "sweep"])]
    pub config: Option<PathBuf>,
    /// Built-in scenario: s1-desk, s2, s3, or split (needs --input).
    #[arg(long, conflicts_with = "config", value_parser = ["s1-desk", "s2", "s3", "split"])]
    pub preset: Option<String>,
    /// Observations or intervals CSV for the split preset.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `id,onset` CSV of reported event times for the split preset.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Run all 108 cells of the S1 grid.
    #[arg(long, conflicts_with_all = ["config", "preset"])]
    pub sweep: bool,
    /// Override the number of replicates (or splits).
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Only write the resolved config.
    #[arg(long)]
    pub config_only: bool,
    #[arg(long, short, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImputeArgs {
    /// Fit JSON written by `sise fit`.
    pub fit: PathBuf,
    /// Intervals (or observations) CSV.
    pub intervals: PathBuf,
    /// Grid step used when the fit file holds a raw step fit.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub delta_t: f64,
    #[arg(long, short, default_value = "imputed.csv")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    pub input: PathBuf,
    /// Number of bootstrap resamples.
    #[arg(short = 'B', long = "replicates", default_value_t = 200)]
    pub replicates: usize,
    /// Reuse the full-sample bandwidth instead of re-optimizing per resample.
    #[arg(long)]
    pub reuse_bandwidth: bool,
    #[command(flatten)]
    pub flags: FitFlags,
    #[arg(long, short, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: IoError },
    #[error("{path}: {source}")]
    InvalidData { path: PathBuf, source: SiseError },
    #[error("{0}")]
    Fit(#[from] SiseError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } | CliError::InvalidData { .. } => 2,
            CliError::Fit(SiseError::InvalidConfig { .. } | SiseError::TooFewReplicates(_)) => 2,
            CliError::Fit(_) => 3,
            CliError::Write { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommandResult {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

impl CommandResult {
    fn failed(err: &CliError) -> Self {
        Self {
            exit_code: err.exit_code(),
            artifacts: Vec::new(),
            summary: format!("error: {err}"),
        }
    }
}

/// Files staged in memory and committed together, each through a temporary
/// file in the target directory and an atomic rename.
#[derive(Default)]
struct Artifacts {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    fn json<T: Serialize>(&mut self, path: PathBuf, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
        bytes.push(b'\n');
        self.add(path, bytes);
    }

    fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, bytes) in self.files {
            let wrap = |source| CliError::Write { path: path.clone(), source };
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            fs::create_dir_all(&dir).map_err(wrap)?;
            let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(wrap)?;
            tmp.write_all(&bytes).map_err(wrap)?;
            tmp.as_file().sync_all().map_err(wrap)?;
            staged.push((path, tmp));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (path, tmp) in staged {
            tmp.persist(&path).map_err(|e| CliError::Write {
                path: path.clone(),
                source: e.error,
            })?;
            written.push(path);
        }
        Ok(written)
    }
}

struct LoadedData {
    ids: Vec<String>,
    sample: CensoredSample,
    frame: TimeFrame,
    spans: Option<Vec<(f64, f64)>>,
}

fn read_input(path: &Path) -> Result<CsvInput, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    read_csv(file).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn load_data(path: &Path) -> Result<LoadedData, CliError> {
    let invalid = |source: SiseError| CliError::InvalidData {
        path: path.to_path_buf(),
        source,
    };
    match read_input(path)? {
        CsvInput::Observations(records) => {
            let frame = estimate_time_frame(&records).map_err(invalid)?;
            let series = validate_records(&records).map_err(invalid)?;
            let mut ids = Vec::with_capacity(series.len());
            let mut intervals = Vec::with_capacity(series.len());
            let mut counts = Vec::with_capacity(series.len());
            let mut spans = Vec::with_capacity(series.len());
            for s in series {
                intervals.push(summarize_observations(&s, 0.0, f64::INFINITY).map_err(invalid)?);
                counts.push(s.records.len());
                spans.push((s.records[0].time, s.records[s.records.len() - 1].time));
                ids.push(s.id);
            }
            Ok(LoadedData {
                ids,
                sample: CensoredSample::with_counts(intervals, counts)?,
                frame,
                spans: Some(spans),
            })
        }
        CsvInput::Intervals(rows) => {
            let (ids, intervals): (Vec<String>, Vec<CensoredInterval>) = rows.into_iter().unzip();
            let frame = frame_from_intervals(&intervals).map_err(invalid)?;
            Ok(LoadedData {
                ids,
                sample: CensoredSample::new(intervals),
                frame,
                spans: None,
            })
        }
    }
}

fn curve_csv(g: &GriddedDensity) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_curve(&mut buf, g, &grid_to_survival(g)).map_err(|source| CliError::Input {
        path: PathBuf::from("<curve>"),
        source,
    })?;
    Ok(buf)
}

#[derive(Serialize)]
struct FitSummary<'a> {
    penalty: &'static str,
    bandwidth: f64,
    report: &'a crate::smoothing::FitReport,
    baseline: &'a crate::smoothing::FitReport,
    evaluations: usize,
    sample_size: f64,
    em_converged: bool,
    em_iterations: usize,
    frame: TimeFrame,
}

pub fn cmd_fit(args: &FitArgs) -> Result<CommandResult, CliError> {
    let pipeline = args.flags.pipeline()?;
    let data = load_data(&args.input)?;
    let fit = pipeline.fit(&data.sample.intervals, &data.frame, data.sample.total_observations())?;
    if !fit.raw.converged {
        log::warn!("EM stopped after {} iterations without converging", fit.raw.iterations);
    }
    let out = &args.output;
    let mut files = Artifacts::default();
    files.json(out.join("raw_fit.json"), &StepFitJson::from(&fit.raw));
    files.json(out.join("smoothed_fit.json"), &fit.choice.smoothed);
    files.json(
        out.join("fit_report.json"),
        &FitSummary {
            penalty: pipeline.penalty.label(),
            bandwidth: fit.choice.bandwidth,
            report: &fit.choice.report,
            baseline: &fit.choice.baseline,
            evaluations: fit.choice.evaluations,
            sample_size: fit.penalty.sample_size,
            em_converged: fit.raw.converged,
            em_iterations: fit.raw.iterations,
            frame: data.frame,
        },
    );
    files.add(out.join("curve_raw.csv"), curve_csv(&fit.raw_grid)?);
    files.add(out.join("curve_smoothed.csv"), curve_csv(&fit.choice.smoothed)?);
    let artifacts = files.commit()?;
    Ok(CommandResult {
        exit_code: 0,
        artifacts,
        summary: format!(
            "fitted {} individuals: bandwidth {:.4}, BIC_s {:.4} (raw {:.4})",
            data.sample.intervals.len(),
            fit.choice.bandwidth,
            fit.choice.report.bic_s,
            fit.choice.baseline.bic_s
        ),
    })
}

fn read_reference(path: &Path, ids: &[String]) -> Result<Vec<Option<f64>>, CliError> {
    let err = |line: u64, message: String| CliError::Input {
        path: path.to_path_buf(),
        source: IoError::Parse { line, message },
    };
    let file = fs::File::open(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    let mut rdr = csv::Reader::from_reader(file);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| err(1, e.to_string()))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if header != ["id", "onset"] {
        return Err(err(1, format!("expected header `id,onset`, got `{}`", header.join(","))));
    }
    let mut map = std::collections::HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| err(line, e.to_string()))?;
        let id = rec.get(0).unwrap_or("").trim().to_string();
        let raw = rec.get(1).unwrap_or("").trim();
        let onset = match raw {
            "" | "NA" | "na" => None,
            s => match crate::io::parse_float(s) {
                Some(v) if v.is_finite() && v >= 0.0 => Some(v),
                Some(v) if v.is_infinite() => None,
                _ => return Err(err(line, format!("invalid onset `{s}`"))),
            },
        };
        map.insert(id, onset);
    }
    Ok(ids.iter().map(|id| map.get(id).copied().flatten()).collect())
}

fn simulate_split(args: &SimulateArgs) -> Result<CommandResult, CliError> {
    let input = args
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("--preset split needs --input".into()))?;
    let data = load_data(input)?;
    let reference = args
        .reference
        .as_ref()
        .map(|p| read_reference(p, &data.ids))
        .transpose()?;
    let mut split = match data.spans {
        Some(spans) => SplitInput {
            intervals: data.sample.intervals.clone(),
            observation_counts: data.sample.observation_counts.clone(),
            spans,
            reference_onsets: None,
        },
        None => SplitInput::from_intervals(data.sample.intervals.clone()),
    };
    split.reference_onsets = reference;
    let seed = args.seed.unwrap_or(0);
    let pipeline = FitPipeline {
        seed,
        ..FitPipeline::default()
    };
    let splits = args.replicates.unwrap_or(100);
    let report = run_split(&split, &pipeline, splits, seed, Execution::Parallel)?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    let w = |e: csv::Error| CliError::Write {
        path: args.output.join("split_metrics.csv"),
        source: e.into(),
    };
    csv.write_record(["split", "method", "metric", "value"]).map_err(w)?;
    for s in &report.splits {
        for (method, m) in [("tb_raw", &s.raw), ("tb_smoothed", &s.smoothed)] {
            let rows = [("rise", Some(m.rise)), ("rmse_w", m.rmse_w), ("rmse_o", m.rmse_o), ("bandwidth", Some(m.bandwidth))];
            for (metric, v) in rows {
                if let Some(v) = v {
                    csv.write_record([s.split.to_string().as_str(), method, metric, &format_float(v)]).map_err(w)?;
                }
            }
        }
    }
    let bytes = csv.into_inner().map_err(|e| CliError::Write {
        path: args.output.join("split_metrics.csv"),
        source: std::io::Error::other(e.to_string()),
    })?;
    let mut files = Artifacts::default();
    files.json(args.output.join("split_report.json"), &report);
    files.add(args.output.join("split_metrics.csv"), bytes);
    let artifacts = files.commit()?;
    Ok(CommandResult {
        exit_code: 0,
        artifacts,
        summary: format!(
            "{} splits against {}: median RISE change {}",
            splits,
            report.reference,
            report.median_change_rise.map_or("n/a".into(), |v| format!("{:+.1}%", 100.0 * v))
        ),
    })
}

fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        source: e.into(),
    })
}

fn scenario_files(files: &mut Artifacts, dir: &Path, stem: &str, cfg: &ScenarioConfig) -> Result<String, CliError> {
    let report = run_scenario(cfg, Execution::Parallel)?;
    let mut csv = Vec::new();
    write_long_csv(&mut csv, &report).map_err(|e| CliError::Write {
        path: dir.join(format!("{stem}_metrics.csv")),
        source: e.into(),
    })?;
    files.json(dir.join(format!("{stem}_report.json")), &report);
    files.add(dir.join(format!("{stem}_metrics.csv")), csv);
    let change = report
        .change("tb", "rise")
        .and_then(|c| c.median_change)
        .map_or("n/a".to_string(), |v| format!("{:+.1}%", 100.0 * v));
    let mut summary = format!("{} replicates, median ARISE change (smoothed TB vs raw) {change}", cfg.replicates);
    if let Some(c) = report.coverage {
        summary.push_str(&format!(", coverage raw {:.3} smoothed {:.3}", c.mean_raw, c.mean_smoothed));
    }
    Ok(summary)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<CommandResult, CliError> {
    if args.preset.as_deref() == Some("split") {
        return simulate_split(args);
    }
    let adjust = |mut cfg: ScenarioConfig| {
        if let Some(m) = args.replicates {
            cfg.replicates = m;
        }
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        cfg
    };
    let mut files = Artifacts::default();
    if args.sweep {
        let cells: Vec<ScenarioConfig> = s1_sweep(args.replicates.unwrap_or(100)).into_iter().map(adjust).collect();
        for (i, cfg) in cells.iter().enumerate() {
            cfg.validate()?;
            files.json(args.output.join(format!("cell_{i:03}_config.json")), cfg);
        }
        if !args.config_only {
            for (i, cfg) in cells.iter().enumerate() {
                log::info!("sweep cell {}/{}", i + 1, cells.len());
                scenario_files(&mut files, &args.output, &format!("cell_{i:03}"), cfg)?;
            }
        }
        let artifacts = files.commit()?;
        return Ok(CommandResult {
            exit_code: 0,
            artifacts,
            summary: format!("S1 sweep over {} cells", cells.len()),
        });
    }
    let cfg = match (&args.config, &args.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => name.parse::<Preset>().map_err(CliError::Usage)?.config(),
        (None, None) => return Err(CliError::Usage("give a config file, --preset or --sweep".into())),
    };
    let cfg = adjust(cfg);
    cfg.validate()?;
    files.json(args.output.join("scenario_config.json"), &cfg);
    let summary = if args.config_only {
        "wrote scenario config".to_string()
    } else {
        scenario_files(&mut files, &args.output, "scenario", &cfg)?
    };
    let artifacts = files.commit()?;
    Ok(CommandResult {
        exit_code: 0,
        artifacts,
        summary,
    })
}

pub fn cmd_impute(args: &ImputeArgs) -> Result<CommandResult, CliError> {
    let text = fs::read_to_string(&args.fit).map_err(|e| CliError::Input {
        path: args.fit.clone(),
        source: e.into(),
    })?;
    let fit: FitFile = serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: args.fit.clone(),
        source: e.into(),
    })?;
    let grid = match fit {
        FitFile::Gridded(g) => GriddedDensity::new(g.grid_start, g.step, g.values, g.bandwidth)?,
        FitFile::Step(s) => {
            let frame = s.frame;
            step_to_grid(&s.into_estimate(), &frame, args.delta_t)?
        }
    };
    let data = load_data(&args.intervals)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let werr = |e: csv::Error| CliError::Write {
        path: args.output.clone(),
        source: e.into(),
    };
    wtr.write_record(["id", "left", "right", "imputed"]).map_err(werr)?;
    for (id, iv) in data.ids.iter().zip(&data.sample.intervals) {
        let x = if iv.is_exact() {
            iv.left
        } else {
            if iv.left >= grid.grid_end() || iv.right <= grid.grid_start {
                return Err(SiseError::EmptyInterval {
                    left: iv.left,
                    right: iv.right,
                }
                .into());
            }
            impute_event_time(iv, &grid, None)?
        };
        wtr.write_record([id.as_str(), &format_float(iv.left), &format_float(iv.right), &format_float(x)])
            .map_err(werr)?;
    }
    let bytes = wtr.into_inner().map_err(|e| CliError::Write {
        path: args.output.clone(),
        source: std::io::Error::other(e.to_string()),
    })?;
    let mut files = Artifacts::default();
    files.add(args.output.clone(), bytes);
    let artifacts = files.commit()?;
    Ok(CommandResult {
        exit_code: 0,
        artifacts,
        summary: format!("imputed {} rows", data.ids.len()),
    })
}

#[derive(Serialize)]
struct BootstrapSummary {
    replicates: usize,
    used: usize,
    excluded: usize,
    seed: u64,
    reuse_bandwidth: bool,
    bandwidths: Vec<f64>,
    frame: TimeFrame,
}

pub fn cmd_bootstrap(args: &BootstrapArgs) -> Result<CommandResult, CliError> {
    if args.replicates < 2 {
        return Err(CliError::Usage(format!("-B must be at least 2, got {}", args.replicates)));
    }
    let pipeline = args.flags.pipeline()?;
    let data = load_data(&args.input)?;
    let fixed = if args.reuse_bandwidth {
        Some(
            pipeline
                .fit(&data.sample.intervals, &data.frame, data.sample.total_observations())?
                .choice
                .bandwidth,
        )
    } else {
        None
    };
    let opts = BootstrapOptions {
        replicates: args.replicates,
        seed: args.flags.seed,
        fixed_bandwidth: fixed,
        execution: Execution::Parallel,
    };
    let bands = bootstrap_bands(&data.sample, &data.frame, &pipeline, &opts)?;
    if bands.excluded * 10 > bands.requested {
        return Err(SiseError::TooManyFailedReplicates {
            excluded: bands.excluded,
            requested: bands.requested,
        }
        .into());
    }
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let path = args.output.join("bands.csv");
    let werr = |e: csv::Error| CliError::Write {
        path: path.clone(),
        source: e.into(),
    };
    wtr.write_record(["tau", "raw_lo", "raw_hi", "smooth_lo", "smooth_hi"]).map_err(werr)?;
    for j in 0..bands.raw.tau.len() {
        wtr.write_record([
            format_float(bands.raw.tau[j]),
            format_float(bands.raw.lower[j]),
            format_float(bands.raw.upper[j]),
            format_float(bands.smoothed.lower[j]),
            format_float(bands.smoothed.upper[j]),
        ])
        .map_err(werr)?;
    }
    let bytes = wtr.into_inner().map_err(|e| CliError::Write {
        path: path.clone(),
        source: std::io::Error::other(e.to_string()),
    })?;
    let mut files = Artifacts::default();
    files.add(path.clone(), bytes);
    files.json(
        args.output.join("bootstrap_summary.json"),
        &BootstrapSummary {
            replicates: bands.requested,
            used: bands.raw.replicates,
            excluded: bands.excluded,
            seed: args.flags.seed,
            reuse_bandwidth: args.reuse_bandwidth,
            bandwidths: bands.bandwidths.clone(),
            frame: data.frame,
        },
    );
    let artifacts = files.commit()?;
    Ok(CommandResult {
        exit_code: 0,
        artifacts,
        summary: format!("{} bootstrap replicates, {} excluded", bands.requested, bands.excluded),
    })
}

/// Dispatch a parsed command line.
pub fn run(cli: &Cli) -> CommandResult {
    if let Some(n) = cli.threads {
        if n == 0 {
            return CommandResult::failed(&CliError::Usage("--threads must be positive".into()));
        }
        crate::par::set_threads(n);
    }
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Impute(a) => cmd_impute(a),
        Command::Bootstrap(a) => cmd_bootstrap(a),
    };
    result.unwrap_or_else(|e| CommandResult::failed(&e))
}
