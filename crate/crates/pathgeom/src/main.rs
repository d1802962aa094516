use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use pathgeom::cli::{execute, Cli, Status};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Status::InputError as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let out = execute(&cli);
    eprint!("{}", out.diagnostics);
    let written = match &cli.output {
        Some(path) if out.status != Status::InputError => std::fs::write(path, &out.artifact),
        _ => std::io::stdout().write_all(out.artifact.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("cannot write output: {e}");
        return ExitCode::from(Status::InputError as u8);
    }
    ExitCode::from(out.status as u8)
}
