use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod manifest;

use commands::{
    compare::CompareArgs, condition::ConditionArgs, edit::EditArgs, edit::LayerwiseArgs, fit::FitArgs,
    metrics::MetricsCommand, replay::ReplayArgs, sweep::SweepArgs, synth::SynthArgs,
};

/// Environment variable supplying the default seed for every command.
pub const SEED_ENV: &str = "MEMSHIFT_SEED";

/// Latent-space attribute editing: synthesize, label, fit, edit, sweep, evaluate.
#[derive(Debug, Parser)]
#[command(name = "memshift", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a synthetic ground-truth world: latents, scores, world description.
    Synth(SynthArgs),
    /// Label by threshold and fit the separating hyperplane.
    Fit(FitArgs),
    /// Fit the same samples in plain and extended latent space and compare accuracy.
    Compare(CompareArgs),
    /// Move latents along a hyperplane normal.
    Edit(EditArgs),
    /// Project a hyperplane normal off attribute directions.
    Condition(ConditionArgs),
    /// Edit selected layers of extended latents only.
    Layerwise(LayerwiseArgs),
    /// Apply a range of edit coefficients and report score statistics per coefficient.
    Sweep(SweepArgs),
    /// Rank correlations and realness ratios.
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Re-run a command from its manifest.
    Replay(ReplayArgs),
}

/// Exit codes, one per error class.
mod exit {
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const FORMAT: u8 = 4;
    pub const SHAPE: u8 = 5;
    pub const DEGENERATE: u8 = 6;
    pub const NUMERICAL: u8 = 7;
    pub const SCORER: u8 = 8;
    pub const REPLAY_MISMATCH: u8 = 9;
    pub const OTHER: u8 = 1;
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use memshift::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<memshift::Error>() {
            return match e {
                E::InvalidConfig(_) => exit::USAGE,
                E::Io { .. } => exit::IO,
                E::BadMagic(_)
                | E::Truncated { .. }
                | E::UnknownDtype(_)
                | E::InvalidShape(_)
                | E::NonFinite { .. }
                | E::Parse { .. }
                | E::InvalidHyperplane(_) => exit::FORMAT,
                E::DimensionMismatch { .. } | E::LayerOutOfRange { .. } | E::LabelMismatch => exit::SHAPE,
                E::TooFewSamples { .. }
                | E::DegenerateLabeling { .. }
                | E::SingleClass
                | E::AllTied
                | E::EmptyInput(_)
                | E::EmptyAttributes
                | E::InseparableDirection
                | E::ZeroBaseline(_) => exit::DEGENERATE,
                E::Divergence { .. } | E::ZeroWeights | E::AsymmetricCovariance(_) | E::Eigen(_) => exit::NUMERICAL,
            };
        }
        if cause.downcast_ref::<commands::sweep::ScorerError>().is_some() {
            return exit::SCORER;
        }
        if cause.downcast_ref::<commands::replay::ReplayMismatch>().is_some() {
            return exit::REPLAY_MISMATCH;
        }
        if cause.downcast_ref::<commands::UsageError>().is_some() {
            return exit::USAGE;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return exit::IO;
        }
    }
    exit::OTHER
}

/// Parses `args` (without the program name) and runs the command, writing
/// its manifest.
pub fn run(args: Vec<String>) -> anyhow::Result<()> {
    let cli = Cli::try_parse_from(std::iter::once("memshift".to_string()).chain(args.iter().cloned()))?;
    let started = manifest::now_ms();
    let mut run = manifest::Run::default();
    let (name, seed) = match &cli.command {
        Command::Synth(a) => ("synth", commands::synth::run(a, &mut run)?),
        Command::Fit(a) => ("fit", commands::fit::run(a, &mut run)?),
        Command::Compare(a) => ("compare", commands::compare::run(a, &mut run)?),
        Command::Edit(a) => ("edit", commands::edit::run(a, &mut run)?),
        Command::Condition(a) => ("condition", commands::condition::run(a, &mut run)?),
        Command::Layerwise(a) => ("layerwise", commands::edit::run_layerwise(a, &mut run)?),
        Command::Sweep(a) => ("sweep", commands::sweep::run(a, &mut run)?),
        Command::Metrics(m) => (m.name(), commands::metrics::run(m, &mut run)?),
        Command::Replay(a) => return commands::replay::run(a),
    };
    let mut recorded = args;
    if let Some(seed) = seed {
        if !recorded.iter().any(|a| a == "--seed" || a.starts_with("--seed=")) {
            recorded.push("--seed".into());
            recorded.push(seed.to_string());
        }
    }
    run.finish(name, recorded, started)?;
    Ok(())
}

fn main() -> ExitCode {
    match run(std::env::args().skip(1).collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
                return match clap_err.kind() {
                    clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                    _ => ExitCode::from(exit::USAGE),
                };
            }
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
