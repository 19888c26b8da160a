use std::fs::File;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Parser, Subcommand};
use gctrl_core::metrics::metrics;
use gctrl_core::trajectory::{Trajectory, TrajectoryKind};

use gctrl::config::{self, ControllerKind, FileConfig};
use gctrl::csvio::{self, MetricsRecord};
use gctrl::error::{AppError, Result};
use gctrl::runner::{self, RunOutcome, CONFIG_FILE};

/// Altitude hold of a simulated hexacopter: evolving fuzzy sliding-mode
/// controller against a PID baseline.
#[derive(Parser)]
#[command(name = "gctrl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run and write its CSV files.
    Run {
        /// Flat key = value config file.
        #[arg(long, env = "GCTRL_CONFIG")]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run several controllers on the configured reference and tabulate the metrics.
    Compare {
        #[arg(long, env = "GCTRL_CONFIG")]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "pid,g")]
        controllers: Vec<ControllerKind>,
        /// Ignore the configured reference and run constant 1 m, step to 2 m,
        /// sine and triangle (2 m, 0.1 Hz).
        #[arg(long)]
        suite: bool,
        /// With --suite, use the sawtooth in place of the triangle.
        #[arg(long, requires = "suite")]
        sawtooth: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Recompute metrics from a logged run.
    Metrics {
        #[arg(long)]
        log: PathBuf,
        /// Config that produced the log; defaults to the config.cfg written next to it.
        #[arg(long, env = "GCTRL_CONFIG")]
        config: Option<PathBuf>,
        /// Print CSV instead of a table.
        #[arg(long)]
        csv: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run(&config, &out),
        Command::Compare { config, controllers, suite, sawtooth, out } => {
            compare(&config, &controllers, suite, sawtooth, &out)
        }
        Command::Metrics { log, config, csv } => recompute(&log, config.as_deref(), csv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gctrl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Turns the first run failure into the process error, after everything was written.
fn first_failure(outcomes: &[RunOutcome]) -> Result<()> {
    match outcomes.iter().find_map(|o| o.log.failure.clone()) {
        Some(e) => Err(AppError::Numerical(e)),
        None => Ok(()),
    }
}

fn run(config_path: &Path, out: &Path) -> Result<()> {
    let file_cfg = config::load(config_path)?;
    let outcome = runner::execute(&file_cfg.run_config())?;
    runner::write_outputs(out, &outcome, &file_cfg)?;
    let rows: Vec<MetricsRecord> = outcome.record().into_iter().collect();
    print!("{}", runner::render_table(&rows));
    if outcome.log.gimbal_warnings > 0 {
        eprintln!("gctrl: pitch passed 80 degrees on {} steps", outcome.log.gimbal_warnings);
    }
    println!("wrote {}", out.display());
    first_failure(std::slice::from_ref(&outcome))
}

fn suite(sawtooth: bool, step_time: f64) -> Vec<Trajectory> {
    let last = if sawtooth { TrajectoryKind::Sawtooth } else { TrajectoryKind::Triangle };
    vec![
        Trajectory::constant(1.0),
        Trajectory::step(2.0, step_time),
        Trajectory::periodic(TrajectoryKind::Sine, 2.0, 0.1),
        Trajectory::periodic(last, 2.0, 0.1),
    ]
}

fn compare(
    config_path: &Path,
    controllers: &[ControllerKind],
    use_suite: bool,
    sawtooth: bool,
    out: &Path,
) -> Result<()> {
    let file_cfg = config::load(config_path)?;
    let trajectories =
        if use_suite { suite(sawtooth, file_cfg.trajectory.step_time) } else { vec![file_cfg.trajectory] };
    let groups: Vec<Vec<_>> = trajectories
        .iter()
        .map(|traj| {
            controllers
                .iter()
                .map(|&k| gctrl_core::sim::RunConfig { trajectory: *traj, ..file_cfg.run_config_for(k) })
                .collect()
        })
        .collect();
    let results: Vec<Result<Vec<RunOutcome>>> = thread::scope(|s| {
        let handles: Vec<_> = groups.iter().map(|g| s.spawn(move || runner::compare(g))).collect();
        handles.into_iter().map(|h| h.join().expect("comparison thread panicked")).collect()
    });
    let mut outcomes = Vec::new();
    for r in results {
        outcomes.extend(r?);
    }
    for o in &outcomes {
        let dir = out.join(format!("{}_{}", o.config.trajectory.kind.as_str(), o.config.controller.name()));
        runner::write_outputs(&dir, o, &file_cfg)?;
    }
    let rows: Vec<MetricsRecord> = outcomes.iter().filter_map(RunOutcome::record).collect();
    let path = out.join("compare.csv");
    let file = File::create(&path).map_err(|e| AppError::io(&path, e))?;
    csvio::write_metrics(file, &rows).map_err(|e| AppError::csv(&path, e))?;
    print!("{}", runner::render_table(&rows));
    println!("wrote {}", out.display());
    first_failure(&outcomes)
}

fn recompute(log_path: &Path, config_path: Option<&Path>, as_csv: bool) -> Result<()> {
    let sidecar;
    let config_path = match config_path {
        Some(p) => p,
        None => {
            sidecar = log_path.parent().unwrap_or(Path::new(".")).join(CONFIG_FILE);
            if !sidecar.exists() {
                return Err(AppError::Config(format!("no --config given and no {} next to the log", CONFIG_FILE)));
            }
            &sidecar
        }
    };
    let file_cfg: FileConfig = config::load(config_path)?;
    let file = File::open(log_path).map_err(|e| AppError::io(log_path, e))?;
    let rows =
        csvio::read_log(BufReader::new(file)).map_err(|e| AppError::Read { path: log_path.into(), source: e })?;
    if rows.is_empty() {
        return Err(AppError::Config(format!("{}: log has no rows", log_path.display())));
    }
    let m = metrics(&rows, &file_cfg.trajectory)?;
    let record = MetricsRecord {
        trajectory: file_cfg.trajectory.kind.as_str().to_string(),
        controller: file_cfg.controller.as_str().to_string(),
        status: "ok".to_string(),
        metrics: m,
    };
    if as_csv {
        csvio::write_metrics(io::stdout().lock(), &[record]).map_err(|e| AppError::csv("<stdout>", e))?;
    } else {
        print!("{}", runner::render_table(&[record]));
    }
    Ok(())
}
