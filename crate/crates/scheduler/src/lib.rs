//! FIFO job queue feeding a fixed pool of execution slots.
//!
//! Each job is one OS process. Jobs start in enqueue order whenever a slot is
//! free; a completion frees its slot for the next job. An optional launcher
//! template wraps every command (for example `mosrun -L -j<node> <cmd>`) so
//! placement can be delegated to a cluster tool.

mod job;
mod log_format;
mod queue;

pub use job::{JobError, JobSpec, LauncherTemplate, SlotPool};
pub use log_format::{format_log, LogEvent};
pub use queue::{run_queue, FailureReason, JobOutcome, JobStatus, NoopObserver, QueueObserver, QueueOptions, QueueReport};
