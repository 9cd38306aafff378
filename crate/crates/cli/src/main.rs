use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tnorder::{FrequencySchedule, QuadratureControls, Units};
use tnorder_cli::{causality_report, figure1_rows, render_csv, render_svg, selftest, CliError, EvalMethod, RunConfig};

/// Time-normal averages of a parametrically switched oscillator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equal-time exact and Kelley-Kleiner averages of p² as CSV
    Figure1(Options),
    /// Pass/fail report on causality of both definitions
    CausalityReport(Options),
    /// Residuals of the projector, special-function and field suites
    Selftest(Options),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Semianalytic,
    Quadrature,
}

#[derive(Args)]
struct Options {
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, default_value_t = -4.0 * PI, allow_negative_numbers = true)]
    t_min: f64,
    #[arg(long, default_value_t = 16.0 * PI, allow_negative_numbers = true)]
    t_max: f64,
    #[arg(long, default_value_t = PI / 20.0)]
    dt: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Semianalytic)]
    method: MethodArg,
    /// Accepted spread of the extrapolated quadrature cutoffs
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Taper window, in longest periods of the integrand
    #[arg(long, default_value_t = 32.0)]
    window_periods: f64,
    #[arg(long, default_value_t = 20_000)]
    max_subdivisions: usize,
    /// "start end omega" per line; defaults to the halved-frequency pulse
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// CSV destination (stdout if absent)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Optional SVG plot of the three curves
    #[arg(long)]
    svg: Option<PathBuf>,
}

impl Options {
    fn config(&self) -> Result<RunConfig, CliError> {
        let units = Units::new(self.hbar, self.mass, self.omega0)?;
        let (schedule, builtin_schedule) = match &self.schedule {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                (text.parse::<FrequencySchedule>()?, false)
            }
            None => (FrequencySchedule::halved_pulse(&units), true),
        };
        let cfg = RunConfig {
            units,
            t_min: self.t_min,
            t_max: self.t_max,
            dt: self.dt,
            method: match self.method {
                MethodArg::Semianalytic => EvalMethod::SemiAnalytic,
                MethodArg::Quadrature => EvalMethod::Quadrature,
            },
            controls: QuadratureControls {
                window_periods: self.window_periods,
                tolerance: self.tolerance,
                max_subdivisions: self.max_subdivisions,
            },
            schedule,
            builtin_schedule,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Figure1(opts) => {
            let cfg = opts.config()?;
            let rows = figure1_rows(&cfg)?;
            let csv = render_csv(&rows);
            match &opts.output {
                Some(path) => write_file(path, &csv)?,
                None => print!("{csv}"),
            }
            if let Some(path) = &opts.svg {
                write_file(path, &render_svg(&rows))?;
            }
            Ok(())
        }
        Command::CausalityReport(opts) => report(causality_report(&opts.config()?)?),
        Command::Selftest(opts) => report(selftest(&opts.config()?)?),
    }
}

fn report(r: tnorder_cli::Report) -> Result<(), CliError> {
    print!("{}", r.render());
    if r.passed() {
        Ok(())
    } else {
        Err(CliError::CheckFailed("see report above".into()))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tnorder: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
