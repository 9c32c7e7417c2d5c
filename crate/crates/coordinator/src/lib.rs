//! XML-RPC coordinator: starts a batch of simulator processes through the
//! slot scheduler, stores what each run reports, and serves ensemble means
//! with standard errors.

mod aggregate;
mod batch;
mod config;
mod service;

pub use aggregate::{export_csv, loop_mean, res_sum, FinishedRun, LoopPoint, MetricStat, METRIC_NAMES};
pub use batch::{BatchParams, RunRecord, RunStatus};
pub use config::{ConfigError, ServerConfig};
pub use service::{faults, CallRecord, Coordinator, Progress};
