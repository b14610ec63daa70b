//! Command-line front end for `fdiv-core`.
//!
//! Every report echoes the flags that produced it under `params`, keyed by
//! flag name, so a JSON report can be replayed mechanically.

pub mod args;
pub mod error;
pub mod repro;
pub mod report;
pub mod run;

use std::fs;
use std::io::Write;

pub use args::{Cli, Command, Format};
pub use error::CliError;

/// Runs one command and writes its report; returns the exit status.
pub fn execute(command: &Command) -> i32 {
    let out = command.output();
    let (body, error) = match command {
        Command::PaperRepro(_) => match repro::table() {
            Ok(table) => {
                let error = (!table.pass).then(|| {
                    let failed: Vec<String> = table.rows.iter().filter(|r| !r.pass).map(|r| r.quantity.clone()).collect();
                    CliError::ReproFailed(format!("out of tolerance: {}", failed.join("; ")))
                });
                (Some(repro::render(&table, out.format)), error)
            }
            Err(e) => (None, Some(e)),
        },
        other => {
            let outcome = run::run(other);
            (outcome.report.map(|r| report::render(&r, out.format)), outcome.error)
        }
    };
    let mut error = error;
    if let Some(body) = body {
        if let Err(e) = write_body(&body, out.output.as_deref()) {
            error.get_or_insert(CliError::Io(e));
        }
    }
    match error {
        Some(e) => {
            eprintln!("{}", e.to_json_line());
            e.exit_code()
        }
        None => 0,
    }
}

fn write_body(body: &str, path: Option<&std::path::Path>) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{body}\n")),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{body}")
        }
    }
}
