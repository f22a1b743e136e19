#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod fail;
mod output;

use clap::Parser;

use args::{Cli, Command, OutputArgs};
use fail::{CliResult, Failure};

fn install_threads(out: &OutputArgs) -> CliResult<()> {
    if let Some(n) = out.threads {
        if n == 0 {
            return Err(Failure::config("threads", "need at least one thread"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config("threads", e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Fourier(a) => {
            install_threads(&a.output)?;
            commands::fourier(a)
        }
        Command::Pdf(a) => {
            install_threads(&a.output)?;
            commands::pdf(a)
        }
        Command::Sample(a) => {
            install_threads(&a.output)?;
            commands::sample(a)
        }
        Command::Crlb(a) => {
            install_threads(&a.output)?;
            commands::crlb(a)
        }
        Command::CompareAsymptotic(a) => {
            install_threads(&a.output)?;
            commands::compare(a)
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPHERE_SCATTER_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { fail::EXIT_CONFIG } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(f) = run(cli) {
        eprintln!("{}", f.to_json());
        std::process::exit(f.code);
    }
}
