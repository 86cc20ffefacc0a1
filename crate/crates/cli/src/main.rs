use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slicesim_cli::{emit_traces, run, validate, ExperimentSpec, Overrides};

#[derive(Parser)]
#[command(
    name = "slicesim",
    version,
    about = "Network slice admission control simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed (and both schemes when comparing) and write the reports.
    Run(SpecArgs),
    /// Check a spec without running it.
    Validate(SpecArgs),
    /// Write each seed's trace and substrate only.
    Trace(SpecArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// Experiment spec (TOML).
    spec: PathBuf,
    /// Run only this seed.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Run only this scheme; turns comparison off.
    #[arg(long, value_parser = ["depsac", "dsara"])]
    mode: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SpecArgs {
    fn load(&self) -> Result<ExperimentSpec, slicesim_cli::CliError> {
        let mut spec = ExperimentSpec::load(&self.spec)?;
        Overrides {
            seed: self.seed_override,
            mode: self.mode.clone(),
            out_dir: self.out.clone(),
        }
        .apply(&mut spec);
        Ok(spec)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Run(a) | Command::Validate(a) | Command::Trace(a) => a,
    };
    let spec = match args.load() {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match cli.command {
        Command::Validate(_) => {
            let problems = validate(&spec);
            for p in &problems {
                eprintln!("{p}");
            }
            if problems.is_empty() {
                println!("ok");
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Command::Trace(_) => match emit_traces(&spec) {
            Ok(sums) => {
                for (seed, sum) in sums {
                    println!("seed={seed} trace_sha256={sum}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Run(_) => match run(&spec) {
            Ok(report) => {
                for r in &report.runs {
                    println!("seed={} mode={} windows={}", r.seed, r.mode, r.records.len());
                }
                match report.failure {
                    None => ExitCode::SUCCESS,
                    Some(e) => {
                        eprintln!("error: {e}");
                        ExitCode::FAILURE
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}
