use clap::{Args, Parser, Subcommand};
use dihedral::cli::{self, ExperimentConfig, Format};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dihedral", version, about = "LCLT experiments on the infinite dihedral group")]
struct Cli {
    /// Read the whole experiment from a JSON config instead of flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Parseval and δ_e inversion checks of the Plancherel constant.
    DualSelftest {
        #[arg(long, default_value = "nu1")]
        dist: String,
    },
    /// n-step probabilities of an i.i.d. walk against the Gaussian limit.
    RwLclt {
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        radius: i64,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
    },
    /// μ(ψ_n = g) for a Markov model against the Gaussian limit.
    GmLclt {
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        /// `e` or `flip:r1,...,rd`, e.g. `-1:2,0`.
        #[arg(long, default_value = "e", allow_hyphen_values = true)]
        target: String,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
    },
    /// First-return law and scaled tails.
    ReturnTail {
        #[arg(long)]
        model: String,
        #[arg(long = "nmax")]
        n_max: usize,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
    },
    /// Monte Carlo block decomposition and return fractions (JSON).
    Recurrence(RecurrenceArgs),
    /// Check a model file; the report goes to stderr on failure.
    ValidateModel {
        #[arg(long)]
        model: String,
    },
}

#[derive(Args)]
struct RecurrenceArgs {
    #[arg(long)]
    dist: String,
    #[arg(long)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    horizons: Vec<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    block_horizon: usize,
    #[arg(long, value_enum, default_value = "json")]
    out: Format,
}

fn to_config(c: Command) -> Result<ExperimentConfig, String> {
    Ok(match c {
        Command::DualSelftest { dist } => ExperimentConfig::DualSelftest(cli::DualSelftest { dist }),
        Command::RwLclt { dist, n, radius, out } => ExperimentConfig::RwLclt(cli::RwLclt { dist, n, radius, out }),
        Command::GmLclt { model, n, target, out } => ExperimentConfig::GmLclt(cli::GmLclt { model, n, target, out }),
        Command::ReturnTail { model, n_max, out } => ExperimentConfig::ReturnTail(cli::ReturnTail { model, n_max, out }),
        Command::Recurrence(a) => {
            if a.out != Format::Json {
                return Err("recurrence only writes json".into());
            }
            ExperimentConfig::Recurrence(cli::Recurrence {
                dist: a.dist,
                trials: a.trials,
                horizons: a.horizons,
                seed: a.seed,
                block_horizon: a.block_horizon,
            })
        }
        Command::ValidateModel { model } => ExperimentConfig::ValidateModel(cli::ValidateModel { model }),
    })
}

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Ok(t) = std::env::var(cli::THREADS_ENV) {
        match t.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: {} must be a positive integer", cli::THREADS_ENV);
                return ExitCode::from(2);
            }
        }
    }
    let config = match (args.config, args.command) {
        (Some(path), None) => std::fs::read_to_string(&path)
            .map_err(|e| format!("{}: {e}", path.display()))
            .and_then(|t| ExperimentConfig::from_json(&t).map_err(|e| e.to_string())),
        (None, Some(c)) => to_config(c),
        (Some(_), Some(_)) => Err("give either --config or a subcommand, not both".into()),
        (None, None) => Err("missing subcommand (see --help)".into()),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match cli::run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    eprint!("{}", outcome.stderr);
    if !outcome.artifact.is_empty() {
        let written = match &args.output {
            Some(p) => std::fs::write(p, &outcome.artifact).map_err(|e| format!("{}: {e}", p.display())),
            None => {
                print!("{}", outcome.artifact);
                Ok(())
            }
        };
        if let Err(e) = written {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
