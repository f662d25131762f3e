mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use dicke_core::Error;

use crate::args::{Cli, RunConfig};

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParams(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let command = cli.command.name();

    let rc = match RunConfig::from_cli(&cli) {
        Ok(rc) => rc,
        Err(e) => {
            eprintln!("dicke {command}: {e}");
            eprintln!("usage: dicke {command} [OPTIONS]; see `dicke {command} --help`");
            return ExitCode::from(exit_code(&e));
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(rc.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("dicke {command}: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };

    match pool.install(|| commands::run(&rc)) {
        Ok(out) => {
            println!("{}", out.summary);
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!(
                "dicke {command} failed ({}): {e}",
                output::describe(&rc.params)
            );
            ExitCode::from(exit_code(&e))
        }
    }
}
