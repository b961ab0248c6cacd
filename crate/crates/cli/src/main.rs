use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Root for outputs when `--out` is not given.
pub const OUT_ENV: &str = "VITALCHIRP_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "vitalchirp",
    version,
    about = "Contact and contactless vital-sign simulation over WDM links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    SingleChannel,
    ThreeVolunteers,
    TwoContact,
    TwoChannel,
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// Output directory. Defaults to $VITALCHIRP_OUT/<command>, or
    /// ./vitalchirp-out/<command> when the variable is unset.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesise a scenario into a dataset bundle.
    Simulate {
        /// Scenario JSON file.
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in scenario instead of a config file.
        #[arg(long, value_enum)]
        preset: Option<PresetName>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the scenario duration, s.
        #[arg(long)]
        duration: Option<f64>,
        /// Turns off receiver and detector noise.
        #[arg(long)]
        noiseless: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Extract rates from a bundle.
    Process {
        /// Bundle directory written by `simulate`.
        bundle: PathBuf,
        /// Process only the first DURATION seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Complex-mean removal before the arctangent.
        #[arg(long)]
        dc_comp: bool,
        /// Ignore ground truth and locate radar targets from the range
        /// profile.
        #[arg(long)]
        no_truth: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Rates and 3-dB widths versus record length.
    Sweep {
        bundle: PathBuf,
        /// Record lengths, s.
        #[arg(long, value_delimiter = ',', default_values_t = [5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0])]
        durations: Vec<f64>,
        #[arg(long)]
        dc_comp: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Design an elliptic band-pass and emit its sections and response.
    FilterDesign {
        /// Pass band as LOW,HIGH in Hz.
        #[arg(long, value_delimiter = ',', required = true)]
        band: Vec<f64>,
        #[arg(long, default_value_t = 50.0)]
        sample_rate: f64,
        #[arg(long, default_value_t = 4)]
        order: usize,
        /// Pass-band ripple, dB.
        #[arg(long, default_value_t = 1.0)]
        ripple: f64,
        /// Minimum stop-band attenuation, dB.
        #[arg(long, default_value_t = 40.0)]
        atten: f64,
        /// Points in the response table.
        #[arg(long, default_value_t = 4096)]
        points: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            preset,
            seed,
            duration,
            noiseless,
            out,
        } => commands::simulate(config, preset, seed, duration, noiseless, &out),
        Command::Process {
            bundle,
            duration,
            dc_comp,
            no_truth,
            out,
        } => commands::process(&bundle, duration, dc_comp, no_truth, &out),
        Command::Sweep {
            bundle,
            durations,
            dc_comp,
            out,
        } => commands::sweep(&bundle, &durations, dc_comp, &out),
        Command::FilterDesign {
            band,
            sample_rate,
            order,
            ripple,
            atten,
            points,
            out,
        } => match band[..] {
            [low, high] => commands::filter_design(low, high, sample_rate, order, ripple, atten, points, &out),
            _ => Err(commands::CliError {
                code: commands::EXIT_VALIDATION,
                lines: vec!["error: --band takes exactly two values, LOW,HIGH".into()],
            }),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            for line in &e.lines {
                eprintln!("{line}");
            }
            ExitCode::from(e.code)
        }
    }
}
