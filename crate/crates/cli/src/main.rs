use std::path::PathBuf;
use std::process::ExitCode;

use circlesym_cli::{run, scenarios, CliError, Mode, Scenario, EXIT_USAGE};
use clap::error::ErrorKind;
use clap::Parser;

/// Constructs and certifies circle-invariant symplectic forms over the flat
/// 3-torus.
#[derive(Debug, Parser)]
#[command(name = "circlesym", version, after_help = AFTER_HELP)]
struct Args {
    /// Scenario config (JSON).
    #[arg(long, value_name = "PATH", conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario by name.
    #[arg(long, value_name = "NAME")]
    scenario: Option<String>,
    /// Override the config's mode.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Override the output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for the parallel kernels.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Also write CSV files for plotting.
    #[arg(long)]
    csv: bool,
    /// List built-in scenarios and exit.
    #[arg(long)]
    list: bool,
}

const AFTER_HELP: &str = "exit codes:
  0   pass
  1   a check failed
  2   refused (class outside the cone, unsupported manifold)
  64  bad flags
  65  malformed or invalid config
  66  missing input file
  74  I/O error";

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    match execute(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: Args) -> Result<i32, CliError> {
    if args.list {
        for name in scenarios::names() {
            println!("{name}");
        }
        return Ok(0);
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let mut scenario = match (&args.config, &args.scenario) {
        (Some(path), _) => Scenario::from_path(path)?,
        (None, Some(name)) => Scenario::builtin(name)?,
        (None, None) => return Err(CliError::Usage("one of --config or --scenario is required".into())),
    };
    if let Some(mode) = args.mode {
        scenario.config.mode = mode;
        scenario.config.validate().map_err(|message| CliError::Config { origin: scenario.source_name(), message })?;
    }
    if let Some(out) = args.out {
        scenario.config.io.output_dir = out;
    }
    if args.csv {
        scenario.config.io.csv = true;
    }
    let report = run(&scenario)?;
    println!("{}", report.summary);
    for path in &report.artifacts {
        println!("  wrote {}", path.display());
    }
    Ok(report.status.exit_code())
}
