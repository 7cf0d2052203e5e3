use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use relaxflow::harness::{run, ExperimentConfig, ExperimentKind};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Simulate,
    Converge,
    Darcy,
    Damped,
    Spectrum,
    Decay,
    Selftest,
}

impl From<Command> for ExperimentKind {
    fn from(c: Command) -> Self {
        match c {
            Command::Simulate => ExperimentKind::Simulate,
            Command::Converge => ExperimentKind::Converge,
            Command::Darcy => ExperimentKind::Darcy,
            Command::Damped => ExperimentKind::Damped,
            Command::Spectrum => ExperimentKind::Spectrum,
            Command::Decay => ExperimentKind::Decay,
            Command::Selftest => ExperimentKind::Selftest,
        }
    }
}

/// Run one experiment and write its record.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(cli: &Cli) -> relaxflow::Result<bool> {
    let mut cfg = ExperimentConfig::from_path(&cli.config)?;
    let kind = ExperimentKind::from(cli.command);
    if cfg.kind != kind {
        return Err(relaxflow::Error::Config(format!(
            "configuration is for `{}` but `{}` was requested",
            cfg.kind.name(),
            kind.name()
        )));
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = Some(out.clone());
    }
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    let record = run(&cfg)?;
    record.write(&dir)?;
    print!("{}", record.report());
    for note in &record.notes {
        println!("note: {note}");
    }
    println!("record written to {}", dir.display());
    Ok(record.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
