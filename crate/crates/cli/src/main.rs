//! `renege-talk`: command-line front end for the cheap-talk solver.
//!
//! Exit codes for every subcommand:
//!
//! * `0` success
//! * `1` negative answer (certificate refused or failed verification) or I/O
//!   failure
//! * `2` invalid input; the message names the invariant and where it broke
//! * `3` capability limit, such as the partition-search limit

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use renege_talk::wrp::Mode;

#[derive(Debug, Parser)]
#[command(name = "renege-talk", version, about = "Weakly renegotiation-proof cheap talk: certify, scan, simulate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stage-game checks and summaries.
    #[command(subcommand)]
    Game(GameCmd),
    /// Certificates, frontier scans and the gap below the Receiver optimum.
    #[command(subcommand)]
    Wrp(WrpCmd),
    /// Two-state persuasion game closed forms.
    Binary(BinaryArgs),
    /// Continuum game with a constant bias.
    Cs(CsArgs),
    /// Three-phase automata in the repeated game.
    #[command(subcommand)]
    Sim(SimCmd),
}

#[derive(Debug, Subcommand)]
pub enum GameCmd {
    /// Validate a game file and report the identifiability assumptions.
    Validate { game: PathBuf },
    /// Expected payoffs of a profile file `{"sender": [[..]], "receiver": [[..]]}`.
    Payoffs {
        game: PathBuf,
        #[arg(long)]
        profile: PathBuf,
    },
    /// Minmax payoffs and their witnesses.
    Minmax { game: PathBuf },
    /// Hull vertices and weighted Pareto frontier as CSV.
    Frontier {
        game: PathBuf,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Largest state count searched exhaustively for Receiver punishments.
    #[arg(long, default_value_t = renege_talk::wrp::DEFAULT_PARTITION_LIMIT)]
    pub partition_limit: usize,
    /// Above the limit, search interval partitions instead of failing.
    #[arg(long)]
    pub intervals: bool,
}

#[derive(Debug, Subcommand)]
pub enum WrpCmd {
    /// Certify a target payoff, or verify a certificate file with `--verify`.
    /// Exits 1 when the target is refused or the certificate fails.
    Certify {
        game: PathBuf,
        #[arg(long = "vs", allow_hyphen_values = true, required_unless_present = "verify", conflicts_with = "verify")]
        v_s: Option<f64>,
        #[arg(long = "vr", allow_hyphen_values = true, required_unless_present = "verify", conflicts_with = "verify")]
        v_r: Option<f64>,
        #[arg(long)]
        verify: Option<PathBuf>,
        #[arg(long, default_value = "strict", value_parser = parse_mode)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Certify evenly spaced points on the efficient frontier (CSV).
    Scan {
        game: PathBuf,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Sender deviation caps below the Receiver optimum (JSON).
    Gap {
        game: PathBuf,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct BinaryArgs {
    #[command(subcommand)]
    pub figure: Option<BinaryFigure>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Print the WRP interval of Receiver payoffs.
    #[arg(long)]
    pub interval: bool,
    /// Build and write the three-profile certificate for `--nu`.
    #[arg(long, requires = "nu")]
    pub construct: bool,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Use the mixed Receiver punishment.
    #[arg(long, requires = "construct")]
    pub mixed: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BinaryFigure {
    /// Hull vertices, Receiver minmax line and flagged frontier (CSV).
    Figure1 {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct CsArgs {
    #[command(subcommand)]
    pub sub: Option<CsSub>,
    #[arg(long)]
    pub bias: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Certify the frontier point with Sender weight `--lambda`.
    #[arg(long, requires = "lambda")]
    pub certify: bool,
    /// Emit the Pareto frontier as CSV.
    #[arg(long, conflicts_with = "certify")]
    pub frontier: bool,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CsSub {
    /// Finite approximation written as a game file.
    Discretize {
        #[arg(long)]
        bias: f64,
        #[arg(long)]
        n_states: usize,
        #[arg(long)]
        n_actions: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frontier curve with certified-region flags (CSV).
    Figure2 {
        #[arg(long)]
        bias: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SimCmd {
    /// Continuation values, one-shot deviation margins and phase ranking.
    Check {
        automaton: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Also search the smallest supporting discount factor.
        #[arg(long)]
        min_delta: bool,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate one path; the trace goes to `--out` (CSV), the summary to stdout.
    Run {
        automaton: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        periods: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scripted deviations: `[{"t": .., "player": "sender", "kernel": [[..]]}]`.
        #[arg(long)]
        deviations: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = io::exec_from_env().and_then(|exec| match cli.command {
        Command::Game(cmd) => commands::game(cmd, exec),
        Command::Wrp(cmd) => commands::wrp(cmd, exec),
        Command::Binary(args) => commands::binary(args, exec),
        Command::Cs(args) => commands::cs(args, exec),
        Command::Sim(cmd) => commands::sim(cmd, exec),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(io::Failure::Negative) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
