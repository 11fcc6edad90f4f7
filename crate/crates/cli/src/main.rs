use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use frontlab_cli::{parse_config, persist, run_command, workers_from_env, Command};

/// Pulsating front speeds of periodic bistable media.
#[derive(Parser)]
#[command(name = "frontlab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Directory for results.csv and profiles/.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let workers = match workers_from_env(std::env::var("FRONTLAB_WORKERS").ok().as_deref()) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if !args.quiet {
        eprint!("{}", cfg.banner());
    }
    let out = run_command(&cfg, args.command, workers);
    if !args.quiet {
        for line in &out.report {
            println!("{line}");
        }
    }
    if let Err(e) = persist(&cfg, &out, &args.out) {
        eprintln!("error: writing results: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(out.exit_code() as u8)
}
