use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ntk_curves::experiment::{load_config, run, Subcommand};

/// Deep ReLU tangent kernels on pairs of spherical curves.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// geometry, kernel-table, certificate, neumann, dynamics, ntk-compare, clover-sweep or depth-sweep
    subcommand: String,
    /// flat key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// seed for sampled networks (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// key=value override, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = cli
        .subcommand
        .parse::<Subcommand>()
        .and_then(|sub| Ok((sub, load_config(cli.config.as_deref(), &cli.set, cli.seed)?)))
        .and_then(|(sub, cfg)| run(sub, &cfg, &cli.out));
    match result {
        Ok(report) => {
            for f in report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
