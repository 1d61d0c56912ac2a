mod args;
mod commands;
mod output;

use args::Cli;
use clap::Parser;
use serde_json::json;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let g = &cli.global;
    if let Some(jobs) = g.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    let report = match commands::run(&cli.command, g) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    // --out and --jobs do not affect results and stay out of the artifact
    let config = json!({
        "seed": g.seed,
        "rel_tol": g.rel_tol,
        "format": g.format,
        "command": cli.command,
    });
    if let Err(e) = output::emit(&report, &config, g.format, g.seed, g.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if report.non_convergence {
        ExitCode::from(3)
    } else if report.assertion_failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
