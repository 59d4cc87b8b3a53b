use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use egonav_cli::{commands, Context, Failure, Format, PipelineConfig};

/// Egocentric navigation retargeting pipeline.
#[derive(Debug, Parser)]
#[command(name = "egonav", version)]
struct Cli {
    /// TOML pipeline configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every seeded stage, overriding the config and synth spec.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic recording and its ground-truth phases.
    Synth {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label every frame as manipulation or navigation.
    Segment {
        #[arg(required = true)]
        recordings: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Retarget the walked path to velocity commands.
    Retarget {
        recording: PathBuf,
        #[arg(long)]
        phases: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Roll out commands and score them against the recording.
    Simulate {
        commands: PathBuf,
        recording: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write metrics and plots for an artifact directory.
    Report {
        artifacts: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump the modulated navigation action chunk observed at frame `t0`.
    Chunk {
        recording: PathBuf,
        #[arg(long)]
        phases: PathBuf,
        #[arg(long)]
        t0: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<String, Failure> {
    let config = PipelineConfig::load(cli.config.as_deref())?;
    let ctx = Context::new(config, cli.format, cli.seed);
    let summary = match &cli.command {
        Command::Synth { spec, out } => commands::cmd_synth(spec, out, &ctx)?,
        Command::Segment { recordings, out } => commands::cmd_segment(recordings, out, &ctx)?,
        Command::Retarget { recording, phases, out } => {
            commands::cmd_retarget(recording, phases.as_deref(), out, &ctx)?
        }
        Command::Simulate { commands: c, recording, out } => commands::cmd_simulate(c, recording, out, &ctx)?,
        Command::Report { artifacts, out } => commands::cmd_report(artifacts, out, &ctx)?,
        Command::Chunk { recording, phases, t0, out } => commands::cmd_chunk(recording, phases, *t0, out, &ctx)?,
    };
    Ok(summary.render(ctx.format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
