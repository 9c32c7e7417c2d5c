use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use rfim_core::{extract_metrics, simulate_curve, Error};
use rfim_sim::{dump_csv, report, report_calls, CliArgs, ReportOptions, EXIT_NO_CROSSING, EXIT_OK, EXIT_REPORT_FAILED, EXIT_USAGE};

fn main() -> ExitCode {
    let args = CliArgs::parse();
    let started = Instant::now();
    let params = args.simulation_params(args.seed_or_clock());
    let curve = match simulate_curve(&params) {
        Ok(c) => c,
        Err(e @ Error::InvalidParam { .. }) => {
            eprintln!("rfim-sim: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            eprintln!("rfim-sim: {e}");
            return ExitCode::from(EXIT_REPORT_FAILED);
        }
    };
    let (metrics, mut code) = match extract_metrics(&curve) {
        Ok(m) => (m.to_array(), EXIT_OK),
        Err(e) => {
            eprintln!("rfim-sim: pid {}: {e}", args.pid);
            ([0.0; 4], EXIT_NO_CROSSING)
        }
    };
    if let Some(path) = &args.dump {
        if let Err(e) = std::fs::write(path, dump_csv(curve.h_values(), curve.m_values(), &metrics)) {
            eprintln!("rfim-sim: cannot write {}: {e}", path.display());
        }
    }
    let calls = report_calls(args.pid, curve.h_values(), curve.m_values(), &metrics);
    if let Err(e) = report(&args.server_url, &calls, &ReportOptions::default()) {
        eprintln!("rfim-sim: {e}");
        code = EXIT_REPORT_FAILED;
    }
    println!(
        "pid={} eb={} hc={} t={:.3}s asd={} pp={}",
        args.pid,
        metrics[0],
        metrics[1],
        started.elapsed().as_secs_f64(),
        args.asd,
        args.pp
    );
    ExitCode::from(code)
}
