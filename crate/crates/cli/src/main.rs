use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ptlgi_cli::{run, CliError, Command, RunConfig, Settings};

/// Leggett-Garg simulations for a dissipative PT-symmetric qubit.
///
/// Settings come from an optional `key = value` file, then from the flags
/// below; flags win. Output is CSV with `#` metadata lines.
#[derive(Parser)]
#[command(name = "ptlgi", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Sub {
    /// K_n against J*tau for one or more dissipation slices, with the closed form.
    KCurve,
    /// K_n over a gamma/J x J*tau grid, long format.
    Surface,
    /// Sup and inf over J*tau of K_n for each gamma/J.
    Bounds,
    /// Search target-state angles (theta, phi) for the extremal K_n.
    Optimize,
    /// Compare master-equation reductions with the qubit propagator.
    LindbladCheck,
    /// Finite-shot estimates of the correlators and K_n.
    Shots,
    /// Bloch trajectory of the conditioned state.
    Bloch,
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::KCurve => Command::KCurve,
            Sub::Surface => Command::Surface,
            Sub::Bounds => Command::Bounds,
            Sub::Optimize => Command::Optimize,
            Sub::LindbladCheck => Command::LindbladCheck,
            Sub::Shots => Command::Shots,
            Sub::Bloch => Command::Bloch,
        }
    }
}

#[derive(Args)]
struct Opts {
    /// Config file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Any config key, e.g. `--set tau_points=50`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output file; stdout when absent.
    #[arg(short, long, global = true)]
    output: Option<String>,

    /// Dissipation as gamma/J.
    #[arg(long, global = true)]
    gamma_ratio: Option<String>,

    /// Comma-separated list of gamma/J.
    #[arg(long, global = true)]
    gamma_ratios: Option<String>,

    /// Dissipation as 2pi x kHz.
    #[arg(long, global = true)]
    gamma_khz: Option<String>,

    /// Coupling as 2pi x kHz (used with --gamma-khz).
    #[arg(long, global = true)]
    j_khz: Option<String>,

    /// LGI order n.
    #[arg(short = 'n', long = "order", global = true)]
    order: Option<String>,

    #[arg(long, global = true)]
    tau_min: Option<String>,

    #[arg(long, global = true)]
    tau_max: Option<String>,

    #[arg(long, global = true)]
    tau_points: Option<String>,

    /// Fixed J*tau for optimize (default: extremize over tau).
    #[arg(long, global = true)]
    tau: Option<String>,

    /// Points per axis of the theta x phi grid.
    #[arg(long, global = true)]
    grid: Option<String>,

    /// max or min.
    #[arg(long, global = true)]
    objective: Option<String>,

    #[arg(long, global = true)]
    shots: Option<String>,

    #[arg(long, global = true)]
    rounds: Option<String>,

    #[arg(long, global = true)]
    seed: Option<String>,

    /// Dimensionless duration J*T.
    #[arg(long, global = true)]
    horizon: Option<String>,

    /// RK4 step J*dt.
    #[arg(long, global = true)]
    dt: Option<String>,

    #[arg(long, global = true)]
    samples: Option<String>,

    /// Initial state: plus, minus, zero or one.
    #[arg(long, global = true)]
    state: Option<String>,
}

impl Opts {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::new(),
        };
        let mut flags = Settings::new();
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            flags.set(k.trim(), v.trim())?;
        }
        let named = [
            ("output", &self.output),
            ("gamma_ratio", &self.gamma_ratio),
            ("gamma_ratios", &self.gamma_ratios),
            ("gamma_khz", &self.gamma_khz),
            ("j_khz", &self.j_khz),
            ("n", &self.order),
            ("tau_min", &self.tau_min),
            ("tau_max", &self.tau_max),
            ("tau_points", &self.tau_points),
            ("tau", &self.tau),
            ("grid", &self.grid),
            ("objective", &self.objective),
            ("shots", &self.shots),
            ("rounds", &self.rounds),
            ("seed", &self.seed),
            ("horizon", &self.horizon),
            ("dt", &self.dt),
            ("samples", &self.samples),
            ("state", &self.state),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                flags.set(key, v.as_str())?;
            }
        }
        s.merge(flags);
        Ok(s)
    }
}

fn execute(cli: &Cli) -> Result<Vec<String>, CliError> {
    let cfg = RunConfig::resolve(cli.command.command(), &cli.opts.settings()?)?;
    let out = run(&cfg)?;
    match &cfg.output {
        Some(path) => {
            let io_err = |source| CliError::Io {
                path: path.display().to_string(),
                source,
            };
            let file = File::create(path).map_err(io_err)?;
            let mut w = BufWriter::new(file);
            out.table.write(&mut w).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
        None => {
            let stdout = io::stdout();
            let io_err = |source| CliError::Io {
                path: "<stdout>".to_string(),
                source,
            };
            out.table.write(stdout.lock()).map_err(io_err)?;
        }
    }
    Ok(out.violations)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(v) if v.is_empty() => ExitCode::SUCCESS,
        Ok(v) => {
            for line in v {
                eprintln!("tolerance violated: {line}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
