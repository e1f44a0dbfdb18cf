use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qthermo_cli::output::{write_json, ErrorReport};
use qthermo_cli::{execute, Command};

/// Environment variable supplying the default worker count.
const THREADS_ENV: &str = "QTHERMO_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qthermo", version, about = "Quenched thermodynamic formalism experiments")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to $QTHERMO_THREADS, then the core count.
    #[arg(long)]
    threads: Option<usize>,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map(Some).map_err(|_| format!("{THREADS_ENV}={v} is not a thread count")),
        Err(_) => Ok(None),
    }
}

fn report(out: &std::path::Path, e: ErrorReport) {
    eprintln!("error: {}", e.message);
    for d in &e.details {
        eprintln!("  - {d}");
    }
    if std::fs::create_dir_all(out).is_ok() {
        let _ = write_json(&out.join("error.json"), &e);
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let name = args.command.name().to_string();
    let threads = match thread_count(args.threads) {
        Ok(t) => t,
        Err(msg) => {
            report(&args.out, ErrorReport { command: name, kind: "config", message: msg, details: Vec::new() });
            return ExitCode::from(2);
        }
    };
    if let Some(k) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("warning: could not configure {k} threads: {e}");
        }
    }
    match execute(args.command, &args.config, &args.out, args.seed) {
        Ok(run) if run.failures.is_empty() => {
            println!("{name}: wrote {} file(s) to {}", run.manifest.outputs.len(), args.out.display());
            ExitCode::SUCCESS
        }
        Ok(run) => {
            report(
                &args.out,
                ErrorReport { command: name, kind: "assertion", message: "built-in checks failed".into(), details: run.failures },
            );
            ExitCode::from(1)
        }
        Err(e) => {
            let code = e.exit_code() as u8;
            report(&args.out, ErrorReport { command: name, kind: e.kind(), message: e.to_string(), details: e.details() });
            ExitCode::from(code)
        }
    }
}
