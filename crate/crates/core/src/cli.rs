//! Command-line front end: one analysis per invocation, CSV out.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use crate::error_model::{PatternKind, RiskPlacement};
use crate::experiments::{
    self, Analysis, ExperimentConfig, ExperimentError, MetricsCsvWriter, ProbabilityCsvWriter,
    Summarizer, WastedCapacityCsvWriter,
};
use crate::par::Execution;
use crate::profilers::ProfilerKind;

#[derive(Debug, Parser)]
#[command(
    name = "ecc-profiler",
    version,
    about = "Simulate error profiling of memories with single-error-correcting on-die ECC"
)]
struct Args {
    /// probabilities, evaluations or wasted-capacity
    #[arg(long, value_parser = parse_from_str::<Analysis>)]
    analysis: Analysis,

    /// Dataword length: 4, 8, 16, 32, 64 or 128
    #[arg(long, default_value_t = 64)]
    k: usize,

    /// Number of ECC codes
    #[arg(long)]
    codes: Option<usize>,

    /// ECC words per code
    #[arg(long)]
    words: Option<usize>,

    /// Seed of the first code; code i uses seed + i
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Profiling rounds per word
    #[arg(long)]
    rounds: Option<usize>,

    /// Per-bit error probabilities, comma-separated
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,

    /// At-risk bits per word, comma-separated
    #[arg(long, value_delimiter = ',')]
    errors: Option<Vec<usize>>,

    /// Data patterns: random, charged, checkered
    #[arg(long, value_delimiter = ',', value_parser = parse_from_str::<PatternKind>)]
    patterns: Option<Vec<PatternKind>>,

    /// Profilers: naive, beep, harp-u, harp-a, harp-a+beep
    #[arg(long, value_delimiter = ',', value_parser = parse_from_str::<ProfilerKind>)]
    profilers: Option<Vec<ProfilerKind>>,

    /// Worker threads (default: available parallelism)
    #[arg(long)]
    jobs: Option<usize>,

    /// Output CSV path, or '-' for standard output
    #[arg(long, default_value = "-")]
    out: String,

    /// Where at-risk bits may land: all-positions or data-only
    #[arg(long, value_parser = parse_placement)]
    placement: Option<RiskPlacement>,

    /// Errors per word the secondary ECC corrects
    #[arg(long)]
    secondary_capability: Option<usize>,

    /// Monte-Carlo trials per word (probabilities analysis)
    #[arg(long)]
    trials: Option<usize>,

    /// Largest subset HARP-A checks for miscorrections
    #[arg(long)]
    harp_a_bound: Option<usize>,

    /// Also write summary tables to this path (evaluations analysis)
    #[arg(long)]
    summary: Option<PathBuf>,

    /// Percentile reported in the summary tables
    #[arg(long, default_value_t = 0.99)]
    percentile: f64,
}

fn parse_from_str<T>(s: &str) -> Result<T, String>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

fn parse_placement(s: &str) -> Result<RiskPlacement, String> {
    match s {
        "all-positions" => Ok(RiskPlacement::AllPositions),
        "data-only" => Ok(RiskPlacement::DataOnly),
        other => Err(format!(
            "unknown placement {other:?} (expected all-positions or data-only)"
        )),
    }
}

impl Args {
    fn config(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig::for_analysis(self.analysis);
        c.k = self.k;
        c.base_seed = self.seed;
        if let Some(v) = self.codes {
            c.num_codes = v;
        }
        if let Some(v) = self.words {
            c.num_words_per_code = v;
        }
        if let Some(v) = self.rounds {
            c.rounds = v;
        }
        if let Some(v) = &self.probs {
            c.probabilities = v.clone();
        }
        if let Some(v) = &self.errors {
            c.error_counts = v.clone();
        }
        if let Some(v) = &self.patterns {
            c.patterns = v.clone();
        }
        if let Some(v) = &self.profilers {
            c.profilers = v.clone();
        }
        if let Some(v) = self.placement {
            c.placement = v;
        }
        if let Some(v) = self.secondary_capability {
            c.secondary_capability = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.harp_a_bound {
            c.harp_a_bound = v;
        }
        c
    }

    fn execution(&self) -> Execution {
        match self.jobs {
            Some(1) => Execution::Sequential,
            jobs => Execution::Parallel { jobs },
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{path}: {source}")]
    Output { path: String, source: io::Error },
    #[error("--jobs must be positive")]
    ZeroJobs,
    #[error("--summary requires --analysis evaluations")]
    SummaryNeedsEvaluations,
}

/// Runs the tool on `argv` (program name first), writing CSV to `stdout`
/// when `--out -` and messages to `stderr`. Returns the exit status.
pub fn parse_and_run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    2
                }
            };
        }
    };
    match run(&args, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if matches!(
                &e,
                CliError::Experiment(ExperimentError::Config(_)) | CliError::ZeroJobs
            ) {
                let _ = writeln!(stderr, "\nFor more information, try '--help'.");
            }
            1
        }
    }
}

fn run(args: &Args, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let config = args.config();
    config.validate().map_err(ExperimentError::from)?;
    if args.jobs == Some(0) {
        return Err(CliError::ZeroJobs);
    }
    if args.summary.is_some() && config.analysis != Analysis::Evaluations {
        return Err(CliError::SummaryNeedsEvaluations);
    }
    if config.analysis == Analysis::Evaluations {
        // Checked up front so a bad percentile does not cost a full run.
        Summarizer::new(config.rounds)
            .finish(args.percentile)
            .map_err(ExperimentError::from)?;
    }

    let started = Instant::now();
    if config.analysis != Analysis::WastedCapacity {
        let _ = writeln!(
            stderr,
            "{}: k={} codes={} words={} seed={}",
            config.analysis,
            config.k,
            config.num_codes,
            config.num_words_per_code,
            config.base_seed
        );
    }

    let summary = write_output(&args.out, stdout, |out| produce(args, &config, out))?;

    if let (Some(path), Some(summary)) = (&args.summary, summary) {
        let display = path.display().to_string();
        write_output(&display, stdout, |out| {
            summary.write_csv(out).map_err(CliError::from_io)
        })?;
    }
    if config.analysis != Analysis::WastedCapacity {
        let _ = writeln!(stderr, "done in {:.1}s", started.elapsed().as_secs_f64());
    }
    Ok(())
}

impl CliError {
    fn from_io(e: io::Error) -> Self {
        CliError::Experiment(ExperimentError::Io(e))
    }
}

fn produce(
    args: &Args,
    config: &ExperimentConfig,
    out: &mut dyn Write,
) -> Result<Option<experiments::Summary>, CliError> {
    let execution = args.execution();
    match config.analysis {
        Analysis::WastedCapacity => {
            let mut w = WastedCapacityCsvWriter::new(out).map_err(CliError::from_io)?;
            for (g, ber, wasted) in experiments::wasted_capacity_table() {
                w.write(g, ber, wasted).map_err(CliError::from_io)?;
            }
            w.finish().map_err(CliError::from_io)?;
            Ok(None)
        }
        Analysis::Probabilities => {
            let mut w = ProbabilityCsvWriter::new(out, config).map_err(CliError::from_io)?;
            experiments::run_probabilities(config, execution, |r| Ok(w.write(r)?))?;
            w.finish().map_err(CliError::from_io)?;
            Ok(None)
        }
        Analysis::Evaluations => {
            let mut w = MetricsCsvWriter::new(out, config).map_err(CliError::from_io)?;
            let mut summarizer = args
                .summary
                .as_ref()
                .map(|_| Summarizer::new(config.rounds));
            experiments::run_evaluations(config, execution, |r| {
                if let Some(s) = summarizer.as_mut() {
                    s.push(r);
                }
                Ok(w.write(r)?)
            })?;
            w.finish().map_err(CliError::from_io)?;
            Ok(match summarizer {
                Some(s) => Some(s.finish(args.percentile).map_err(ExperimentError::from)?),
                None => None,
            })
        }
    }
}

/// Runs `body` against standard output or against a temporary sibling of
/// `path` that replaces `path` only once `body` succeeds.
fn write_output<R>(
    path: &str,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<R, CliError>,
) -> Result<R, CliError> {
    let output_error = |source| CliError::Output {
        path: path.to_string(),
        source,
    };
    if path == "-" {
        let mut out = BufWriter::new(stdout);
        let result = body(&mut out)?;
        out.flush().map_err(output_error)?;
        return Ok(result);
    }

    let target = Path::new(path);
    let file_name = target.file_name().ok_or_else(|| {
        output_error(io::Error::new(
            io::ErrorKind::InvalidInput,
            "not a file path",
        ))
    })?;
    let mut partial_name = OsString::from(".");
    partial_name.push(file_name);
    partial_name.push(".partial");
    let partial = target.with_file_name(partial_name);

    let file = fs::File::create(&partial).map_err(output_error)?;
    let mut out = BufWriter::new(file);
    let result = body(&mut out).and_then(|r| {
        out.flush().map_err(output_error)?;
        Ok(r)
    });
    drop(out);
    match result {
        Ok(r) => {
            fs::rename(&partial, target).map_err(output_error)?;
            Ok(r)
        }
        Err(e) => {
            let _ = fs::remove_file(&partial);
            Err(e)
        }
    }
}
