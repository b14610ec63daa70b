use clap::error::ErrorKind;
use clap::Parser;

use fdiv_cli::{execute, Cli, CliError};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                let _ = e.print();
                std::process::exit(0);
            }
            _ => {
                let message = e
                    .render()
                    .to_string()
                    .lines()
                    .filter(|l| !l.trim().is_empty() && !l.starts_with("For more information"))
                    .collect::<Vec<_>>()
                    .join(" ");
                let err = CliError::BadArguments(message);
                eprintln!("{}", err.to_json_line());
                std::process::exit(err.exit_code());
            }
        },
    };
    std::process::exit(execute(&cli.command));
}
