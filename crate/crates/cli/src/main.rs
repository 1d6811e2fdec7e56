//! `spinsim`: command-line driver for spin-system simulations.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use commands::RunInfo;
use config::ConfigError;
use output::OutDir;

#[derive(Parser, Debug)]
#[command(
    name = "spinsim",
    version,
    about = "Simulate finite spin systems exactly and with site-decoupled schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output directory; created if missing.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample trajectories with one method.
    Simulate {
        #[command(flatten)]
        args: commands::SimulateArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Couple the exact process with Euler and/or midpoint on shared streams.
    Couple {
        #[command(flatten)]
        args: commands::CoupleArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Solve the mean-field ODE and its first-order error field.
    Ode {
        #[command(flatten)]
        args: commands::OdeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Evaluate the strong-error bounds of a model.
    Bounds {
        #[command(flatten)]
        args: commands::BoundsArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Time exact, Euler and midpoint sampling on Ising–Kac lattices.
    Bench {
        #[command(flatten)]
        args: commands::BenchArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Time dense, FFT and tree potential evaluation.
    FastsumBench {
        #[command(flatten)]
        args: commands::FastsumBenchArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Couple { .. } => "couple",
            Command::Ode { .. } => "ode",
            Command::Bounds { .. } => "bounds",
            Command::Bench { .. } => "bench",
            Command::FastsumBench { .. } => "fastsum-bench",
        }
    }

    fn out_dir(&self) -> &PathBuf {
        match self {
            Command::Simulate { out, .. }
            | Command::Couple { out, .. }
            | Command::Ode { out, .. }
            | Command::Bounds { out, .. }
            | Command::Bench { out, .. }
            | Command::FastsumBench { out, .. } => &out.out,
        }
    }

    fn run(self, out: &mut OutDir, info: &mut RunInfo) -> Result<()> {
        match self {
            Command::Simulate { args, .. } => commands::simulate(args, out, info),
            Command::Couple { args, .. } => commands::couple(args, out, info),
            Command::Ode { args, .. } => commands::ode(args, out, info),
            Command::Bounds { args, .. } => commands::bounds(args, out, info),
            Command::Bench { args, .. } => commands::bench(args, out, info),
            Command::FastsumBench { args, .. } => commands::fastsum_bench(args, out, info),
        }
    }
}

fn is_config_error(err: &anyhow::Error) -> bool {
    err.chain().any(|c| {
        c.is::<ConfigError>()
            || matches!(
                c.downcast_ref::<spinsim_core::Error>(),
                Some(spinsim_core::Error::Config(_))
            )
    })
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

fn host_info() -> serde_json::Value {
    let hostname = std::env::var("HOSTNAME")
        .ok()
        .or_else(|| std::fs::read_to_string("/etc/hostname").ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".into());
    json!({
        "hostname": hostname,
        "os": std::env::consts::OS,
        "arch": std::env::consts::ARCH,
        "cpus": std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        "threads": rayon::current_num_threads(),
    })
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SPINSIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| config::config_err(format!("SPINSIM_THREADS={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| anyhow::anyhow!("cannot configure worker pool: {e}"))
}

fn report(err: &anyhow::Error) -> ExitCode {
    eprintln!("error: {err:#}");
    if is_config_error(err) {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    if let Err(e) = configure_threads() {
        return report(&e);
    }
    let started = chrono::Utc::now();
    let argv: Vec<String> = std::env::args().collect();
    let name = cli.command.name();
    let mut out = match OutDir::create(cli.command.out_dir()) {
        Ok(o) => o,
        Err(e) => return report(&e),
    };
    let mut info = RunInfo::default();
    let result = cli.command.run(&mut out, &mut info);
    let code = match &result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    };
    let manifest = json!({
        "tool": "spinsim",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": name,
        "status": if result.is_ok() { "ok" } else { "failed" },
        "error": result.as_ref().err().map(|e| format!("{e:#}")),
        "argv": argv,
        "config": info.config,
        "seed": info.seed,
        "replicates": info.replicates,
        "git_describe": git_describe(),
        "host": host_info(),
        "started_at": started.to_rfc3339(),
        "finished_at": chrono::Utc::now().to_rfc3339(),
        "outputs": out.entries(),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = out.root().join("manifest.json");
    if let Err(e) = std::fs::write(&path, text) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return ExitCode::from(1);
    }
    code
}
