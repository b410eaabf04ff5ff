use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use nlheat_cli::{
    emit_reports, ensure_output_dir, parse_config_as, property_status, run_command, Command,
    ExperimentConfig, Results, RunError, RunOutput,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Subcommand {
    Solve,
    Net,
    Uniqueness,
    Consistency,
    Check,
}

impl From<Subcommand> for Command {
    fn from(s: Subcommand) -> Self {
        match s {
            Subcommand::Solve => Command::Solve,
            Subcommand::Net => Command::Net,
            Subcommand::Uniqueness => Command::Uniqueness,
            Subcommand::Consistency => Command::Consistency,
            Subcommand::Check => Command::Check,
        }
    }
}

/// Regularised nonlocal heat equation experiments.
#[derive(Debug, Parser)]
#[command(name = "nlheat", version)]
struct Args {
    #[arg(value_enum)]
    command: Subcommand,
    /// TOML configuration; the built-in default is used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` in the configuration.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed, overriding `seed` in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &Args) -> Result<ExperimentConfig, RunError> {
    let command = Command::from(args.command);
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_config_as(&text, Some(command))?
        }
        None => ExperimentConfig::default_for(command),
    };
    if let Some(dir) = &args.output {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn summarise(out: &RunOutput) {
    match &out.results {
        Results::Solve(r) => println!(
            "solved eps = {} in {} steps; energy monotone: {}; a priori bound: {}",
            r.epsilon, r.steps, r.monotonicity.monotone_total, r.apriori.satisfied
        ),
        Results::Net(r) => println!(
            "net over {} epsilons: {:?}, fitted exponent {:?}",
            r.per_eps.len(),
            r.verdict,
            r.moderateness.as_ref().map(|m| m.fitted_exponent)
        ),
        Results::Uniqueness(r) => println!(
            "uniqueness: {:?}, negligible up to q = {:?}",
            r.verdict, r.negligible_up_to_q
        ),
        Results::Consistency(r) => println!(
            "consistency rates: C(L2) {:?}, L2(H1) {:?}, monotone: {}",
            r.rate_cl2, r.rate_l2h1, r.monotone
        ),
        Results::Check(r) => {
            for p in &r.properties {
                println!("{}", p.line());
            }
        }
    }
}

fn execute(args: &Args) -> Result<(), RunError> {
    let cfg = load(args)?;
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(RunError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Usage(e.to_string()))?;
    }
    ensure_output_dir(&cfg.output_dir)?;
    let out = run_command(&cfg)?;
    summarise(&out);
    for path in emit_reports(&out, &cfg.output_dir)? {
        println!("wrote {}", path.display());
    }
    property_status(&out)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
