mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;
use nwa_core::Exec;

use args::{Cli, Command};
use commands::{parse_threshold, Outcome};
use report::Status;

fn run(cli: Cli) -> Outcome {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match cli.command {
        Command::Check { file } => commands::check(&file),
        Command::Width { file, k, max } => commands::width(&file, k, max),
        Command::Eval { file, word, cap, certificate } => {
            commands::eval(&file, word.as_deref(), cap, certificate.as_deref())
        }
        Command::Empty { file, k, threshold, certificate } => {
            commands::empty(&file, k, &parse_threshold(&threshold)?, certificate.as_deref(), exec)
        }
        Command::Infimum { file, k } => commands::infimum(&file, k, exec),
        Command::Universal { file, k, threshold } => commands::universal(&file, k, &parse_threshold(&threshold)?, exec),
        Command::Star { file, k } => commands::star(&file, k, exec),
        Command::Translate { file, to, k, o } => commands::translate(&file, to, k, &o),
        Command::Reduce { file, k, o } => commands::reduce(&file, k, &o, exec),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Usage as u8 } else { Status::Yes as u8 });
        }
    };
    match run(cli) {
        Ok((report, status)) => {
            println!("{}", report.to_json());
            ExitCode::from(status as u8)
        }
        Err(f) => {
            eprintln!("nwaq: {}", f.message);
            ExitCode::from(f.status as u8)
        }
    }
}
