//! `acg`: command-line front end for assortative configuration graphs.
//!
//! Exit codes: 0 success, 1 invalid input or failed computation, 2 usage error.

mod args;
mod commands;
mod output;
mod parse;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::RunContext;
use parse::UsageError;

fn command_name(c: &Command) -> &'static str {
    use args::{AsymptoticsCommand as A, ConfigsCommand as C, ExactCommand as E};
    match c {
        Command::Generate(_) => "generate",
        Command::Exact(E::Partition(_)) => "exact partition",
        Command::Exact(E::Mean(_)) => "exact mean",
        Command::Exact(E::Var(_)) => "exact var",
        Command::Exact(E::Joint(_)) => "exact joint",
        Command::Exact(E::Oracle(_)) => "exact oracle",
        Command::Asymptotics(A::CriticalPoint(_)) => "asymptotics critical-point",
        Command::Asymptotics(A::EdgeMean(_)) => "asymptotics edge-mean",
        Command::Asymptotics(A::LaplaceCheck(_)) => "asymptotics laplace-check",
        Command::Configs(C::Predict(_)) => "configs predict",
        Command::Configs(C::Count(_)) => "configs count",
        Command::Validate(_) => "validate",
        Command::Describe(_) => "describe",
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let ctx = RunContext {
        threads: cli.threads,
        command: command_name(&cli.command),
    };
    match &cli.command {
        Command::Generate(a) => commands::generate(&ctx, a),
        Command::Exact(c) => commands::exact(&ctx, c),
        Command::Asymptotics(c) => commands::asymptotics(&ctx, c),
        Command::Configs(c) => commands::configs(&ctx, c),
        Command::Validate(a) => commands::validate(&ctx, a),
        Command::Describe(a) => commands::describe(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
