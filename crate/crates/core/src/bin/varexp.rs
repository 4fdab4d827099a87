use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use varexp_parabolic::cli::{self, Command, Invocation, ProfileName};

#[derive(Parser)]
#[command(name = "varexp", version, about = "Variable-exponent norms and nonlocal degenerate parabolic solves")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `out` in the config, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Validator profile: u1, thm31, thm32 or thm41. Repeatable.
    #[arg(long, value_parser = parse_profile)]
    profile: Vec<ProfileName>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the structural hypotheses of a problem.
    Validate(Common),
    /// Solve and write trajectory, summary and verdict.
    Solve(Common),
    /// Norms of a stored or closed-form field.
    Norms {
        #[command(flatten)]
        common: Common,
        /// CSV field (`node,value` or `t,node,value`).
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Solve every point of the `[sweep]` grid.
    Sweep(Common),
}

fn parse_profile(s: &str) -> Result<ProfileName, String> {
    ProfileName::parse(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (command, common, field) = match args.command {
        Cmd::Validate(c) => (Command::Validate, c, None),
        Cmd::Solve(c) => (Command::Solve, c, None),
        Cmd::Norms { common, field } => (Command::Norms, common, field),
        Cmd::Sweep(c) => (Command::Sweep, c, None),
    };
    let inv = Invocation {
        config: common.config,
        out: common.out,
        seed: common.seed,
        profiles: common.profile,
        field,
    };
    ExitCode::from(cli::run(command, &inv).code() as u8)
}
