mod commands;
mod config;
mod curve;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command, RunConfig};

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TROPINT_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("TROPINT_THREADS={v:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = threads() {
        eprintln!("error: {e}");
        return ExitCode::from(commands::INPUT);
    }
    let run = || -> commands::Outcome {
        let cfg = RunConfig::resolve(cli.command.flags())?;
        match cli.command {
            Command::Trop(_) => commands::trop(&cfg),
            Command::Periods(_) => commands::periods(&cfg),
            Command::Check(_) => commands::check(&cfg),
            Command::Verify(_) => commands::verify(&cfg),
            Command::Lift(_) => commands::lift(&cfg),
        }
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
