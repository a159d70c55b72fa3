//! `kpb`: batch runs of the KPB-II simulator, the ill-posedness study and the
//! estimate checks.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure.

mod commands;
mod config;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

use commands::{run, window_parameters, RunError, RunOutput};
use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "kpb", version, about = "KPB-II pseudospectral simulator and verification lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the equation from `phi_spec` and store the trajectory.
    Solve(RunArgs),
    /// Second-iterate scaling study over `N_list`.
    Illposed(RunArgs),
    /// Randomized ratio suite of one estimate.
    Verify(RunArgs),
    /// Sobolev and Bourgain norms of a stored trajectory.
    Norms(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn fail(code: u8, message: &str) -> ExitCode {
    eprintln!("kpb: {message}");
    ExitCode::from(code)
}

/// Writes every file under a temporary name first, then renames them into
/// place; on failure the already renamed ones are removed again.
fn write_outputs(dir: &Path, files: &[(String, String)]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut staged = Vec::new();
    let result = (|| {
        for (name, contents) in files {
            let tmp = dir.join(format!(".{name}.partial"));
            fs::write(&tmp, contents)?;
            staged.push((tmp, dir.join(name)));
        }
        Ok(())
    })();
    if let Err(e) = result {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
        return Err(e);
    }
    let mut placed: Vec<&PathBuf> = Vec::new();
    for (tmp, dest) in &staged {
        if let Err(e) = fs::rename(tmp, dest) {
            for p in placed {
                let _ = fs::remove_file(p);
            }
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(e);
        }
        placed.push(dest);
    }
    Ok(())
}

fn manifest(config: &ExperimentConfig, raw: &[u8], threads: usize, output: &RunOutput) -> String {
    let hash = Sha256::digest(raw);
    let hash: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    let names: Vec<&str> = output.files.iter().map(|(n, _)| n.as_str()).collect();
    let value = json!({
        "command": config.command(),
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": hash,
        "config": config.to_json(),
        "threads": threads,
        "window": window_parameters(),
        "tolerances": output.tolerances,
        "results": output.results,
        "outputs": names,
    });
    serde_json::to_string_pretty(&value).expect("manifest serializes") + "\n"
}

fn execute(name: &str, args: RunArgs) -> ExitCode {
    let raw = match fs::read(&args.config) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_CONFIG, &format!("cannot read {}: {e}", args.config.display())),
    };
    let text = match String::from_utf8(raw.clone()) {
        Ok(t) => t,
        Err(_) => return fail(EXIT_CONFIG, &format!("{}: not valid UTF-8", args.config.display())),
    };
    let config = match config::parse(&args.config, &text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, &e.message),
    };
    if config.command() != name {
        return fail(
            EXIT_CONFIG,
            &format!("invalid `command`: config is for `{}`, not `{name}`", config.command()),
        );
    }
    if args.threads == Some(0) {
        return fail(EXIT_CONFIG, "--threads must be at least 1");
    }
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return fail(EXIT_NUMERICAL, &format!("cannot start worker threads: {e}")),
    };
    let config_dir = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let output = match pool.install(|| run(&config, &config_dir)) {
        Ok(o) => o,
        Err(RunError::Config(m)) => return fail(EXIT_CONFIG, &m),
        Err(RunError::Numerical(m)) => return fail(EXIT_NUMERICAL, &m),
    };
    let mut files = output.files.clone();
    files.push(("manifest.json".into(), manifest(&config, &raw, threads, &output)));
    if let Err(e) = write_outputs(&args.out, &files) {
        return fail(EXIT_CONFIG, &format!("cannot write to {}: {e}", args.out.display()));
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(a) => execute("solve", a),
        Command::Illposed(a) => execute("illposed", a),
        Command::Verify(a) => execute("verify", a),
        Command::Norms(a) => execute("norms", a),
    }
}
