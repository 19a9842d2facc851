//! `frlab` — the command-line entry point.
//!
//! Exit codes: 0 all checks passed or values computed, 1 a property check
//! failed (the report carries a re-checkable witness), 2 unresolved at the
//! given bounds, 3 malformed input.

mod cache;
mod commands;
mod output;
mod witness;

use clap::{Parser, Subcommand};
use output::Outcome;

#[derive(Parser)]
#[command(
    name = "frlab",
    version,
    about = "Finite-scale closure/rank/amalgamation laboratory"
)]
pub struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, default_value = "text")]
    pub format: output::Format,
    /// Seed for every randomized scan.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Bypass the result cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Cache directory (overrides FRLAB_CACHE_DIR).
    #[arg(long, global = true)]
    pub cache_dir: Option<std::path::PathBuf>,
    /// Write the JSON payload to a file as well.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Finite structures: validation, automorphisms, homogenization.
    Structure {
        #[command(subcommand)]
        cmd: commands::StructureCmd,
    },
    /// Permutation groups: orbits and stabilizers.
    Group {
        #[command(subcommand)]
        cmd: commands::GroupCmd,
    },
    /// Closure operators: axioms, disjointifying forms, enumeration.
    Closure {
        #[command(subcommand)]
        cmd: commands::ClosureCmd,
    },
    /// Rank recursions and certificates.
    Rank {
        #[command(subcommand)]
        cmd: commands::RankCmd,
    },
    /// Amalgamation classes: checks, amalgams, limit builds.
    Fraisse {
        #[command(subcommand)]
        cmd: commands::FraisseCmd,
    },
    /// Colored back-and-forth runs and transversal quotients.
    Involve {
        #[command(subcommand)]
        cmd: commands::InvolveCmd,
    },
    /// Support functions and the permutation decomposition.
    Support {
        #[command(subcommand)]
        cmd: commands::SupportCmd,
    },
    /// Token-scale sequence/injection reductions.
    Eplus {
        #[command(subcommand)]
        cmd: commands::EplusCmd,
    },
    /// Named property suites.
    Props {
        #[command(subcommand)]
        cmd: commands::PropsCmd,
    },
    /// Re-checks a witness file produced by a failing run.
    VerifyWitness {
        #[arg(long)]
        input: std::path::PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(err) => {
            eprintln!("error: {err}");
            output::classify_error(&err)
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let ctx = output::Ctx {
        format: cli.format,
        seed: cli.seed,
        out: cli.out.clone(),
        cache: cache::Cache::from_flags(cli.no_cache, cli.cache_dir.clone()),
    };
    match &cli.command {
        Command::Structure { cmd } => commands::structure(cmd, &ctx),
        Command::Group { cmd } => commands::group(cmd, &ctx),
        Command::Closure { cmd } => commands::closure(cmd, &ctx),
        Command::Rank { cmd } => commands::rank(cmd, &ctx),
        Command::Fraisse { cmd } => commands::fraisse(cmd, &ctx),
        Command::Involve { cmd } => commands::involve(cmd, &ctx),
        Command::Support { cmd } => commands::support(cmd, &ctx),
        Command::Eplus { cmd } => commands::eplus(cmd, &ctx),
        Command::Props { cmd } => commands::props(cmd, &ctx),
        Command::VerifyWitness { input } => witness::verify_witness(input, &ctx),
    }
}
