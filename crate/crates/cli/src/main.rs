mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "prooftutor", version, about = "Data-driven propositional logic tutor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate students on problems and write their event logs.
    GenCorpus {
        /// A problem directory, or a curriculum directory with a problems/ folder.
        #[arg(long)]
        problems: PathBuf,
        #[arg(long)]
        policies: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Phase whose problems are simulated, or `all`.
        #[arg(long, default_value = "training")]
        phase: String,
    },
    /// Build and solve interaction networks from event logs.
    BuildNetwork {
        #[arg(long)]
        logs: PathBuf,
        /// Problem id; repeat for several, or `all`. With one id `--out` is a
        /// file, otherwise a directory of `<id>.net` files.
        #[arg(long, required = true)]
        problem: Vec<String>,
        #[arg(long)]
        rewards: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the hint a network gives for a state.
    Hint {
        #[arg(long)]
        network: PathBuf,
        /// Statements separated by `;`, givens first. Defaults to the givens.
        #[arg(long)]
        state: Option<String>,
        #[arg(long = "type", value_parser = ["ns", "wp"])]
        hint_type: String,
    },
    /// Replay event logs and summarise every attempt.
    Replay {
        #[arg(long)]
        logs: PathBuf,
        /// Also print the state key after every transition.
        #[arg(long)]
        keys: bool,
    },
    /// Per-student metrics as CSV.
    Metrics {
        #[arg(long)]
        logs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write hint-rate correlations with posttest metrics.
        #[arg(long)]
        correlations: Option<PathBuf>,
    },
    /// Stratified assignment of students to hint conditions.
    Assign {
        /// CSV with `student` and `score` columns.
        #[arg(long)]
        pretest: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "ns,wp")]
        conditions: Vec<String>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the tutor service.
    Serve {
        #[arg(long)]
        curriculum: PathBuf,
        #[arg(long)]
        port: u16,
        /// Directory of `.net` snapshots used for hints.
        #[arg(long)]
        networks: Option<PathBuf>,
        /// Corpus logs used to color nodes.
        #[arg(long)]
        colors: Option<PathBuf>,
        /// Append every event to this JSONL file.
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

fn usage_failure(err: clap::Error) -> ExitCode {
    use clap::error::ErrorKind;
    if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
        print!("{err}");
        return ExitCode::SUCCESS;
    }
    eprintln!("{err}");
    let mut cmd = Cli::command();
    cmd.build();
    let name = std::env::args().nth(1).unwrap_or_default();
    if let Some(sub) = cmd.find_subcommand_mut(&name) {
        eprintln!("{}", sub.render_help());
    }
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => return usage_failure(err),
    };
    let result = match cli.command {
        Command::GenCorpus {
            problems,
            policies,
            seed,
            out,
            phase,
        } => commands::gen_corpus(&problems, &policies, seed, &out, &phase),
        Command::BuildNetwork {
            logs,
            problem,
            rewards,
            out,
        } => commands::build_network(&logs, &problem, rewards.as_deref(), &out),
        Command::Hint {
            network,
            state,
            hint_type,
        } => commands::hint(&network, state.as_deref(), &hint_type),
        Command::Replay { logs, keys } => commands::replay(&logs, keys),
        Command::Metrics {
            logs,
            out,
            correlations,
        } => commands::metrics(&logs, &out, correlations.as_deref()),
        Command::Assign {
            pretest,
            conditions,
            seed,
            out,
        } => commands::assign(&pretest, &conditions, seed, out.as_deref()),
        Command::Serve {
            curriculum,
            port,
            networks,
            colors,
            events,
            seed,
            host,
        } => commands::serve(commands::ServeArgs {
            curriculum,
            port,
            networks,
            colors,
            events,
            seed,
            host,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
