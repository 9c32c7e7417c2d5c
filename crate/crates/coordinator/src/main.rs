use std::net::IpAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use rfim_coordinator::{Coordinator, ServerConfig};

/// XML-RPC coordinator for batches of hysteresis simulations.
#[derive(Debug, Parser)]
#[command(name = "rfim-coordinator", version)]
struct Args {
    /// Address to bind.
    #[arg(long, default_value = "0.0.0.0")]
    bind: IpAddr,
    #[arg(long, default_value_t = 8000, value_parser = clap::value_parser!(u16).range(1..))]
    port: u16,
    /// Directory holding launchable simulator binaries.
    #[arg(long, default_value = "bin")]
    bin_dir: PathBuf,
    /// Simultaneous simulator processes (default: CPU count).
    #[arg(long)]
    slots: Option<usize>,
    /// Command prefix for every job, e.g. "mosrun -L -j<node> <cmd>".
    #[arg(long)]
    launcher_template: Option<String>,
    /// Master seed for per-run seeds (random per batch when omitted).
    #[arg(long)]
    master_seed: Option<u64>,
    /// Ask workers to also dump their curve as CSV into this directory.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
    /// Kill a simulator that runs longer than this many seconds.
    #[arg(long)]
    job_timeout: Option<f64>,
    /// URL workers report to (default: derived from the bound address).
    #[arg(long)]
    worker_url: Option<String>,
    /// Send permissive CORS headers so a browser console can call the server.
    #[arg(long)]
    cors: bool,
    /// Serve static console assets from this directory under /ui/.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let defaults = ServerConfig::default();
    let config = ServerConfig {
        bind: args.bind,
        port: args.port,
        bin_dir: args.bin_dir,
        slots: args.slots.unwrap_or(defaults.slots),
        launcher_template: args.launcher_template,
        master_seed: args.master_seed,
        dump_dir: args.dump_dir,
        job_timeout: args.job_timeout.map(Duration::from_secs_f64),
        worker_url: args.worker_url,
        cors: args.cors,
        ui_dir: args.ui_dir,
        console_log: true,
    };
    if let Err(e) = config.validate() {
        eprintln!("rfim-coordinator: {e}");
        return ExitCode::from(2);
    }
    let coordinator = match Coordinator::new(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("rfim-coordinator: {e}");
            return ExitCode::from(2);
        }
    };
    match coordinator.serve_forever() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rfim-coordinator: {e}");
            ExitCode::FAILURE
        }
    }
}
