use clap::{Parser, Subcommand};
use ruelle_lab::experiments::{find, EXPERIMENTS};
use ruelle_lab::{emit_report, run_experiment, ExperimentConfig, Format, LabError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Run transfer-operator experiments from config files.
#[derive(Parser)]
#[command(name = "lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config budget.
        #[arg(long)]
        budget: Option<usize>,
        /// Output directory (default: config `out`, else `out/`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// List available experiments.
    List,
    /// Describe one experiment and its config keys.
    Describe { experiment: String },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = std::env::var("LAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("lab: LAB_THREADS ignored: {e}");
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, LabError> {
    match command {
        Command::List => {
            for e in EXPERIMENTS {
                println!("{:<18} {}", e.name, e.summary);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Describe { experiment } => {
            let e = find(&experiment).ok_or(LabError::UnknownExperiment(experiment))?;
            println!("{}: {}\n\n{}", e.name, e.summary, e.details);
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            config,
            seed,
            budget,
            out,
            format,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(b) = budget {
                cfg.budget = b;
            }
            let out = out
                .or_else(|| cfg.out.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let record = run_experiment(&cfg)?;
            for path in emit_report(&record, &out, format)? {
                println!("{}", path.display());
            }
            for a in &record.assertions {
                let status = if a.pass { "PASS" } else { "FAIL" };
                let rel = match a.relation {
                    ruelle_lab::report::Relation::AtMost => "<=",
                    ruelle_lab::report::Relation::AtLeast => ">=",
                };
                eprintln!("{status} {}: {:e} {rel} {:e}", a.name, a.value, a.bound);
            }
            eprintln!("wall time: {:.3} s", record.wall_time.as_secs_f64());
            Ok(if record.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
