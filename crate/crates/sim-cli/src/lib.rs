//! Worker side of a batch: one hysteresis run, reported to the coordinator
//! as four XML-RPC calls.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::thread;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::Parser;
use rfim_core::rng::derive_seed;
use rfim_core::{Boundary, SimulationParams};
use rfim_xmlrpc::{post_call, ClientOptions, Fault, MethodCall, TransportError, Value};
use thiserror::Error;

pub const DEFAULT_SERVER_URL: &str = "http://10.0.0.1:8000";

pub const EXIT_OK: u8 = 0;
pub const EXIT_REPORT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NO_CROSSING: u8 = 3;

const METRIC_NAMES: [&str; 4] = ["exchange_bias", "coercivity", "h_cross_desc", "h_cross_asc"];

/// Runs one zero-temperature random-field hysteresis loop and reports it.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "rfim-sim", version, allow_negative_numbers = true)]
pub struct CliArgs {
    /// Lattice side length.
    #[arg(long, default_value_t = 70)]
    pub size: usize,
    /// Field samples over the whole loop.
    #[arg(long, default_value_t = 300)]
    pub steps: usize,
    #[arg(long, default_value_t = 8.0)]
    pub hmax: f64,
    #[arg(long, default_value_t = -5.0)]
    pub hmin: f64,
    /// Fraction of pinned sites.
    #[arg(long, default_value_t = 0.10)]
    pub dlevel: f64,
    /// Exchange constant at pinned sites.
    #[arg(long, default_value_t = 10.0)]
    pub econst: f64,
    /// Random-field standard deviation.
    #[arg(long, default_value_t = 1.5)]
    pub sd: f64,
    /// Accepted and echoed, no effect on the run.
    #[arg(long, default_value_t = 0.0)]
    pub asd: f64,
    /// Accepted and echoed, no effect on the run.
    #[arg(long, default_value_t = 0.0)]
    pub pp: f64,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(..=i32::MAX as i64))]
    pub pid: u32,
    #[arg(long, default_value = DEFAULT_SERVER_URL)]
    pub server_url: String,
    /// Disorder seed; derived from pid and the clock when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the curve and metrics to this CSV file.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[arg(long, default_value = "free")]
    pub boundary: Boundary,
}

impl Default for CliArgs {
    fn default() -> Self {
        CliArgs::parse_from(["rfim-sim"])
    }
}

impl CliArgs {
    pub fn seed_or_clock(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            let nanos = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_nanos() as u64);
            derive_seed(nanos, u64::from(self.pid))
        })
    }

    pub fn simulation_params(&self, seed: u64) -> SimulationParams {
        SimulationParams {
            size: self.size,
            steps: self.steps,
            hmax: self.hmax,
            hmin: self.hmin,
            dlevel: self.dlevel,
            econst: self.econst,
            sd: self.sd,
            seed,
            run_id: self.pid,
            boundary: self.boundary,
        }
    }
}

/// The four calls a worker sends, in order.
pub fn report_calls(pid: u32, h: &[f64], m: &[f64], metrics: &[f64; 4]) -> [MethodCall; 4] {
    let pid = Value::Int(pid as i32);
    let with = |name: &str, values: &[f64]| MethodCall::new(name, vec![pid.clone(), Value::doubles(values)]);
    [
        with("store_array1", h),
        with("store_array2", m),
        with("store_results", metrics),
        MethodCall::new("finish", vec![pid.clone()]),
    ]
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{method}: gave up after {attempts} attempts: {source}")]
    Transport {
        method: String,
        attempts: u32,
        source: TransportError,
    },
    #[error("{method}: coordinator answered with fault: {fault}")]
    Fault { method: String, fault: Fault },
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    /// Total attempts per call on transport failure.
    pub attempts: u32,
    pub retry_spacing: Duration,
    pub client: ClientOptions,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            attempts: 3,
            retry_spacing: Duration::from_secs(1),
            client: ClientOptions {
                user_agent: concat!("rfim-sim/", env!("CARGO_PKG_VERSION")).to_string(),
                ..ClientOptions::default()
            },
        }
    }
}

/// Sends the calls in order, retrying transport failures. A fault stops the
/// report immediately.
pub fn report(url: &str, calls: &[MethodCall], opts: &ReportOptions) -> Result<(), ReportError> {
    for call in calls {
        let mut attempt = 1;
        loop {
            match post_call(url, call, &opts.client) {
                Ok(resp) => match resp.into_result() {
                    Ok(_) => break,
                    Err(fault) => {
                        return Err(ReportError::Fault { method: call.name().to_string(), fault })
                    }
                },
                Err(e) if attempt < opts.attempts.max(1) => {
                    eprintln!("rfim-sim: {}: {e}; retrying", call.name());
                    attempt += 1;
                    thread::sleep(opts.retry_spacing);
                }
                Err(source) => {
                    return Err(ReportError::Transport {
                        method: call.name().to_string(),
                        attempts: attempt,
                        source,
                    })
                }
            }
        }
    }
    Ok(())
}

/// CSV dump: `H,M` rows, a blank line, then `metric,value` rows.
pub fn dump_csv(h: &[f64], m: &[f64], metrics: &[f64; 4]) -> String {
    let mut out = String::from("H,M\n");
    for (h, m) in h.iter().zip(m) {
        let _ = writeln!(out, "{h},{m}");
    }
    out.push_str("\nmetric,value\n");
    for (name, v) in METRIC_NAMES.iter().zip(metrics) {
        let _ = writeln!(out, "{name},{v}");
    }
    out
}
