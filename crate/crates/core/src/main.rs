use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elliptic_lab::harness::{self, Command, ExperimentConfig, Overrides, JOBS_ENV};

#[derive(Parser)]
#[command(name = "elliptic-lab", version, about = "Experiments on correlated random matrices and the elliptic law")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalue scatters and convergence to the elliptic law.
    Esd(Common),
    /// Least singular value tails.
    Lsv(Common),
    /// (s,t,u) system, nu_z densities, log-potentials, variance and truncation.
    Limit(Common),
    /// Small-ball, GAP, decoupling, distance and cofactor experiments.
    Anticonc(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: config `output_dir`, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads (default: $ELLIPTIC_LAB_JOBS, then config, then 1).
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Esd(a) => (Command::Esd, a),
        Cmd::Lsv(a) => (Command::Lsv, a),
        Cmd::Limit(a) => (Command::Limit, a),
        Cmd::Anticonc(a) => (Command::Anticonc, a),
    };
    let env_jobs = std::env::var(JOBS_ENV).ok();
    let overrides = Overrides { seed: args.seed, trials: args.trials, jobs: args.jobs, out: args.out };
    let result = ExperimentConfig::load(&args.config)
        .and_then(|cfg| harness::run(command, &cfg, &overrides, env_jobs.as_deref()));
    match result {
        Ok(m) => {
            for r in &m.runs {
                let mark = if r.passed() { "PASS" } else { "FAIL" };
                println!("{mark} {} ({:.1}s)", r.name, r.wall_seconds);
                if r.status != "ok" {
                    println!("    {}", r.status);
                }
                for a in r.assertions.iter().filter(|a| !a.passed) {
                    println!("    {}: {} {} {} violated", a.name, a.value, a.relation, a.bound);
                }
            }
            println!("{} files, config {}", m.files.len(), &m.config_hash[..12]);
            if m.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("elliptic-lab: {e}");
            ExitCode::from(2)
        }
    }
}
