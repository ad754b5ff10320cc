use clap::Parser;
use refcmfs_cli::args::Cli;
use refcmfs_cli::{execute, CliError};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            e.exit()
        }
        Err(e) => {
            let err = CliError::InvalidConfig(
                e.to_string().lines().next().unwrap_or_default().to_string(),
            );
            eprintln!("{}", err.to_json_line());
            std::process::exit(err.exit_code());
        }
    };
    if let Err(err) = execute(&cli) {
        eprintln!("{}", err.to_json_line());
        std::process::exit(err.exit_code());
    }
}
