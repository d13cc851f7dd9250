//! Command-line driver for curve evolution runs.
//!
//! One invocation runs one simulation — from a TOML file (`--config`) or a
//! named built-in experiment (`--preset`) — and writes `series.csv`,
//! `summary.csv`, and optionally SVG renderings into the output directory.
//! `--batch <dir>` instead runs every `*.toml` in a directory in parallel,
//! each into its own subdirectory.
//!
//! Exit codes: 0 when the run terminated through its stop rule, 1 for
//! configuration or I/O problems, 2 when the evolution itself failed (the
//! partial trace is still written). Failures print a machine-readable
//! `error_class=<Class>` line on stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use curveflow::{
    load_config, preset, render_curve_svg, render_svg, run_simulation, write_snapshots,
    ConfigError, SimulationConfig, SimulationError, SimulationOutput, StepError, StopReason,
    WrittenFiles, PRESET_NAMES,
};

/// Environment variable consulted for the output directory when neither the
/// command line nor the configuration names one.
const OUTPUT_ENV: &str = "CURVEFLOW_OUTPUT";
const DEFAULT_OUTPUT_DIR: &str = "curveflow-out";

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "curveflow",
    version,
    about = "Evolve a closed plane curve by curvature and external forcing",
    after_help = "Output directory precedence: --output-dir, then the \
                  configuration's output_dir, then $CURVEFLOW_OUTPUT, then \
                  ./curveflow-out. Batch runs write one subdirectory per \
                  configuration file under that directory."
)]
struct Cli {
    /// Path to a TOML run configuration.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["preset", "batch"])]
    config: Option<PathBuf>,

    /// Name of a built-in experiment; see --list-presets.
    #[arg(long, value_name = "NAME", conflicts_with = "batch")]
    preset: Option<String>,

    /// Print the built-in experiment names and exit.
    #[arg(long)]
    list_presets: bool,

    /// Run every *.toml configuration in this directory, in parallel.
    #[arg(long, value_name = "DIR")]
    batch: Option<PathBuf>,

    /// Directory for CSV/SVG artifacts.
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Retain every n-th time level in series.csv.
    #[arg(long, value_name = "N")]
    snapshot_every: Option<u64>,

    /// Also render run.svg (and final_rescaled.svg when one exists).
    #[arg(long)]
    emit_svg: bool,

    /// Override the number of grid points.
    #[arg(long = "N", value_name = "POINTS")]
    n: Option<usize>,

    /// Override the time step.
    #[arg(long, value_name = "TAU")]
    tau: Option<f64>,

    /// Override the curvature-adjustment strength of the redistribution.
    #[arg(long, value_name = "EPS")]
    epsilon: Option<f64>,

    /// Override the constant redistribution relaxation rate.
    #[arg(long, value_name = "K1")]
    kappa1: Option<f64>,

    /// Override the velocity-coupled redistribution relaxation rate.
    #[arg(long, value_name = "K2")]
    kappa2: Option<f64>,

    /// Override the curvature regularization of the affine flow.
    #[arg(long, value_name = "DELTA")]
    delta: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.list_presets {
        for name in PRESET_NAMES {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }

    if let Some(batch_dir) = cli.batch.clone() {
        return run_batch(&cli, &batch_dir);
    }

    let config = match load_single_config(&cli) {
        Ok(config) => config,
        Err(err) => return fail_config(&err),
    };
    let out_dir = resolve_output_dir(&cli, config.output_dir.as_deref());
    match execute(&config, &out_dir) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error_class={}", failure.class);
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

/// Loads the configuration for a non-batch invocation and applies the
/// command-line overrides.
fn load_single_config(cli: &Cli) -> Result<SimulationConfig, ConfigError> {
    let mut config = match (&cli.config, &cli.preset) {
        (Some(path), None) => load_config(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => {
            return Err(ConfigError::Validation(
                "pass either --config <file> or --preset <name> (or --batch <dir>)".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --config with --preset"),
    };
    apply_overrides(cli, &mut config)?;
    Ok(config)
}

/// Writes the command-line overrides into `config` and re-validates, since an
/// override can break an otherwise valid configuration.
fn apply_overrides(cli: &Cli, config: &mut SimulationConfig) -> Result<(), ConfigError> {
    if let Some(n) = cli.n {
        config.n = n;
    }
    if let Some(tau) = cli.tau {
        config.tau = tau;
    }
    if let Some(epsilon) = cli.epsilon {
        config.epsilon = epsilon;
    }
    if let Some(kappa1) = cli.kappa1 {
        config.kappa1 = kappa1;
    }
    if let Some(kappa2) = cli.kappa2 {
        config.kappa2 = kappa2;
    }
    if let Some(delta) = cli.delta {
        config.delta = delta;
    }
    if let Some(stride) = cli.snapshot_every {
        config.snapshot_every = stride;
    }
    if cli.emit_svg {
        config.emit_svg = true;
    }
    config.validate()
}

/// Flag, then configuration, then environment, then the fixed default.
fn resolve_output_dir(cli: &Cli, from_config: Option<&Path>) -> PathBuf {
    if let Some(dir) = &cli.output_dir {
        return dir.clone();
    }
    if let Some(dir) = from_config {
        return dir.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(OUTPUT_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(DEFAULT_OUTPUT_DIR)
}

struct Failure {
    code: u8,
    class: &'static str,
    message: String,
}

fn fail_config(err: &ConfigError) -> ExitCode {
    eprintln!("error_class={}", config_error_class(err));
    eprintln!("error: {err}");
    ExitCode::from(EXIT_CONFIG)
}

fn config_error_class(err: &ConfigError) -> &'static str {
    match err {
        ConfigError::Io { .. } => "IoError",
        ConfigError::Parse(_) => "ParseError",
        ConfigError::Validation(_) => "ValidationError",
        ConfigError::UnknownPreset { .. } => "UnknownPreset",
    }
}

fn simulation_error_class(err: &SimulationError) -> &'static str {
    match err {
        SimulationError::StepRejected { source, .. } => match source {
            StepError::MeshCollapse { .. } => "MeshCollapse",
            StepError::Solver(_) => "SingularSystem",
            StepError::Geometry(_) => "GeometryError",
        },
        SimulationError::MaxStepsExceeded { .. } => "MaxStepsExceeded",
        SimulationError::MaxTimeExceeded { .. } => "MaxTimeExceeded",
    }
}

/// Runs one validated configuration and writes its artifacts. On a runtime
/// failure the partial trace is still written before reporting the error.
fn execute(config: &SimulationConfig, out_dir: &Path) -> Result<String, Failure> {
    let build = |err: ConfigError| Failure {
        code: EXIT_CONFIG,
        class: config_error_class(&err),
        message: err.to_string(),
    };
    let initial = config.build_initial_curve().map_err(build)?;
    let model = config.build_model().map_err(build)?;
    let params = config.build_params().map_err(build)?;
    let stop = config.stop_rule();

    match run_simulation(
        &initial,
        &model,
        &params,
        config.tau,
        &stop,
        config.snapshot_every,
    ) {
        Ok(output) => {
            let files = emit_artifacts(&output, out_dir, config.emit_svg)?;
            Ok(render_report(&output, &files))
        }
        Err(err) => {
            let class = simulation_error_class(&err);
            let message = err.to_string();
            // Keep the runtime error primary even if writing the partial
            // trace fails as well.
            let _ = emit_artifacts(err.partial_output(), out_dir, config.emit_svg);
            Err(Failure {
                code: EXIT_RUNTIME,
                class,
                message,
            })
        }
    }
}

/// CSV always; SVG when requested and there is at least one snapshot.
fn emit_artifacts(
    output: &SimulationOutput,
    out_dir: &Path,
    emit_svg: bool,
) -> Result<WrittenFiles, Failure> {
    let io_failure = |err: curveflow::OutputError| Failure {
        code: EXIT_CONFIG,
        class: "IoError",
        message: err.to_string(),
    };
    let files = write_snapshots(output, out_dir).map_err(io_failure)?;
    if emit_svg && !output.snapshots.is_empty() {
        render_svg(&output.snapshots, &out_dir.join("run.svg")).map_err(io_failure)?;
        if let Some(rescaled) = &output.final_rescaled {
            render_curve_svg(rescaled, &out_dir.join("final_rescaled.svg")).map_err(io_failure)?;
        }
    }
    Ok(files)
}

fn render_report(output: &SimulationOutput, files: &WrittenFiles) -> String {
    let summary = &output.summary;
    let mut report = String::new();
    report.push_str(&format!("steps: {}\n", summary.steps));
    report.push_str(&format!("final_time: {:.6e}\n", summary.final_time));
    let stop_line = match summary.stop_reason {
        Some(StopReason::AreaThreshold { area_ratio }) => {
            format!("shrink_to_point (area ratio {area_ratio:.3e})")
        }
        Some(StopReason::SteadyState {
            area_rel_change,
            length_rel_change,
        }) => format!(
            "steady_state (rel changes {area_rel_change:.3e} area, {length_rel_change:.3e} length)"
        ),
        None => "none".to_string(),
    };
    report.push_str(&format!("stop: {stop_line}\n"));
    report.push_str(&format!(
        "area: {:.6e} -> {:.6e}\n",
        summary.initial_area, summary.final_area
    ));
    report.push_str(&format!("series: {}\n", files.series.display()));
    report.push_str(&format!("summary: {}\n", files.summary.display()));
    if let Some(path) = &files.final_rescaled {
        report.push_str(&format!("final_rescaled: {}\n", path.display()));
    }
    report
}

struct BatchOutcome {
    stem: String,
    code: u8,
    class: Option<&'static str>,
    line: String,
}

/// Runs every `*.toml` in `dir` concurrently, each writing into
/// `<output root>/<file stem>/`. The exit code is the most severe of the
/// per-run codes.
fn run_batch(cli: &Cli, dir: &Path) -> ExitCode {
    let mut entries: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(iter) => iter
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|path| path.extension().is_some_and(|ext| ext == "toml"))
            .collect(),
        Err(err) => {
            return fail_config(&ConfigError::Io {
                path: dir.to_path_buf(),
                source: err,
            })
        }
    };
    entries.sort();
    if entries.is_empty() {
        return fail_config(&ConfigError::Validation(format!(
            "no .toml configurations found in {}",
            dir.display()
        )));
    }

    // Per-run subdirectories are always derived from the file names so that
    // concurrent runs can never write into the same place, regardless of any
    // output_dir values inside the files.
    let root = resolve_output_dir(cli, None);
    let outcomes: Vec<BatchOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = entries
            .iter()
            .map(|path| {
                let root = &root;
                scope.spawn(move || run_batch_entry(cli, path, root))
            })
            .collect();
        handles
            .into_iter()
            .map(|handle| handle.join().expect("batch worker panicked"))
            .collect()
    });

    let mut worst = 0u8;
    for outcome in &outcomes {
        println!("{}: {}", outcome.stem, outcome.line);
        if let Some(class) = outcome.class {
            eprintln!("error_class={} (run {})", class, outcome.stem);
        }
        worst = worst.max(outcome.code);
    }
    ExitCode::from(worst)
}

fn run_batch_entry(cli: &Cli, path: &Path, root: &Path) -> BatchOutcome {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    let mut config = match load_config(path) {
        Ok(config) => config,
        Err(err) => {
            return BatchOutcome {
                stem,
                code: EXIT_CONFIG,
                class: Some(config_error_class(&err)),
                line: format!("error: {err}"),
            }
        }
    };
    if let Err(err) = apply_overrides(cli, &mut config) {
        return BatchOutcome {
            stem,
            code: EXIT_CONFIG,
            class: Some(config_error_class(&err)),
            line: format!("error: {err}"),
        };
    }
    let out_dir = root.join(&stem);
    match execute(&config, &out_dir) {
        Ok(report) => BatchOutcome {
            stem,
            code: 0,
            class: None,
            line: report.trim_end().replace('\n', "; "),
        },
        Err(failure) => BatchOutcome {
            stem,
            code: failure.code,
            class: Some(failure.class),
            line: format!("error: {}", failure.message),
        },
    }
}
