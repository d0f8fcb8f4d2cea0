//! Command-line entry point. Exit codes: 0 success, 2 configuration
//! problem, 1 runtime failure.

use clap::Parser;

use lasenn::cli;
use lasenn::config::ExperimentConfig;
use lasenn::Error;

#[derive(Parser)]
#[command(
    name = "lasenn",
    version,
    about = "Latent-space nearest-neighbor augmented classifier experiments",
    after_help = "Subcommands: gen-data, train, export-corpus, build-index, predict,\n\
                  sweep, noise-exp, attack-exp, diagnose, toymodel"
)]
struct Args {
    /// Subcommand to run.
    command: String,

    /// Optional key=value config file; defaults apply for absent keys.
    #[arg(long)]
    config: Option<std::path::PathBuf>,

    /// Override one config key (repeatable); overrides win over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Shorthand for --set out=DIR.
    #[arg(long)]
    out: Option<String>,
}

fn build_config(args: &Args) -> Result<ExperimentConfig, Error> {
    let mut config = ExperimentConfig::default();
    if let Some(path) = &args.config {
        config.apply_file(path)?;
    }
    for assignment in &args.set {
        config.set(assignment)?;
    }
    if let Some(out) = &args.out {
        config.set(&format!("out={out}"))?;
    }
    Ok(config)
}

fn main() {
    let args = Args::parse();
    let config = match build_config(&args) {
        Ok(config) => config,
        Err(error) => {
            eprintln!("config error: {error}");
            std::process::exit(2);
        }
    };
    if let Err(error) = cli::run(&args.command, &config) {
        match error {
            Error::Config(_) => {
                eprintln!("config error: {error}");
                std::process::exit(2);
            }
            other => {
                eprintln!("error: {other}");
                std::process::exit(1);
            }
        }
    }
}
