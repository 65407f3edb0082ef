use std::process::ExitCode;

use clap::Parser;

mod run;

use run::{Cli, Failure};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("bad arguments");
            let first = first.trim_start_matches("error: ");
            eprintln!("sturm-glm: config: {first}");
            return ExitCode::from(3);
        }
    };
    match run::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure {
            status,
            category,
            message,
        }) => {
            eprintln!("sturm-glm: {category}: {}", message.replace('\n', " "));
            ExitCode::from(status)
        }
    }
}
