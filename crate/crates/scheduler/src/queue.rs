use std::collections::VecDeque;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use log::warn;

use crate::job::{JobSpec, LauncherTemplate, SlotPool};
use crate::log_format::{format_log, LogEvent};

#[derive(Debug, Clone, Default)]
pub struct QueueOptions {
    pub launcher: Option<LauncherTemplate>,
    /// Kill a job that runs longer than this.
    pub job_timeout: Option<Duration>,
    /// Print start/finish/summary lines on stdout.
    pub console_log: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureReason {
    Spawn(String),
    Exit(i32),
    /// Terminated by a signal (no exit code).
    Killed,
    TimedOut,
    Wait(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JobStatus {
    Succeeded,
    Failed(FailureReason),
}

#[derive(Debug, Clone)]
pub struct JobOutcome {
    pub run_id: u32,
    /// Command actually executed, after template expansion.
    pub command: Vec<String>,
    pub node: String,
    pub os_pid: Option<u32>,
    pub status: JobStatus,
    pub wall_time: Duration,
}

impl JobOutcome {
    pub fn succeeded(&self) -> bool {
        self.status == JobStatus::Succeeded
    }

    pub fn exit_code(&self) -> Option<i32> {
        match self.status {
            JobStatus::Succeeded => Some(0),
            JobStatus::Failed(FailureReason::Exit(c)) => Some(c),
            _ => None,
        }
    }
}

/// Summary of a drained queue.
#[derive(Debug, Clone)]
pub struct QueueReport {
    /// One entry per job, in enqueue order.
    pub outcomes: Vec<JobOutcome>,
    /// Run ids in the order they were started.
    pub start_order: Vec<u32>,
    pub elapsed: Duration,
    pub max_concurrency: usize,
}

impl QueueReport {
    pub fn succeeded(&self) -> usize {
        self.outcomes.iter().filter(|o| o.succeeded()).count()
    }

    pub fn failed(&self) -> usize {
        self.outcomes.len() - self.succeeded()
    }
}

/// Receives lifecycle notifications from [`run_queue`], on the queue thread.
pub trait QueueObserver: Send + Sync {
    fn job_started(&self, _job: &JobSpec, _node: &str, _os_pid: u32) {}
    fn job_finished(&self, _job: &JobSpec, _outcome: &JobOutcome) {}
}

pub struct NoopObserver;

impl QueueObserver for NoopObserver {}

struct Completion {
    slot: usize,
    status: JobStatus,
    finished_at: Instant,
}

struct Running {
    index: usize,
    os_pid: u32,
    started: Instant,
}

/// Runs every job exactly once, never more than `pool.len()` at a time,
/// starting them in FIFO order. Failures are recorded and the queue carries on.
pub fn run_queue(
    jobs: Vec<JobSpec>,
    pool: &SlotPool,
    options: &QueueOptions,
    observer: &dyn QueueObserver,
) -> QueueReport {
    let start = Instant::now();
    let total = jobs.len();
    let mut pending: VecDeque<usize> = (0..total).collect();
    let mut slots: Vec<Option<Running>> = (0..pool.len()).map(|_| None).collect();
    let mut outcomes: Vec<Option<JobOutcome>> = (0..total).map(|_| None).collect();
    let mut start_order = Vec::with_capacity(total);
    let mut running = 0usize;
    let mut max_concurrency = 0usize;
    let (tx, rx) = mpsc::channel::<Completion>();

    while !pending.is_empty() || running > 0 {
        if running < slots.len() && !pending.is_empty() {
            let index = pending.pop_front().expect("checked non-empty");
            let slot = slots.iter().position(Option::is_none).expect("a slot is free");
            let job = &jobs[index];
            let node = &pool.labels()[slot];
            let command = match &options.launcher {
                Some(t) => t.expand(job.argv(), node),
                None => job.argv().to_vec(),
            };
            start_order.push(job.run_id());
            let started = Instant::now();
            match spawn(&command) {
                Ok(child) => {
                    let os_pid = child.id();
                    if options.console_log {
                        println!(
                            "{}",
                            format_log(&LogEvent::Started { program: job.program(), os_pid, node })
                        );
                    }
                    observer.job_started(job, node, os_pid);
                    slots[slot] = Some(Running { index, os_pid, started });
                    running += 1;
                    max_concurrency = max_concurrency.max(running);
                    watch(child, slot, options.job_timeout, tx.clone());
                    outcomes[index] = Some(JobOutcome {
                        run_id: job.run_id(),
                        command,
                        node: node.clone(),
                        os_pid: Some(os_pid),
                        status: JobStatus::Succeeded,
                        wall_time: Duration::ZERO,
                    });
                }
                Err(e) => {
                    warn!("cannot start job {}: {e}", job.run_id());
                    let outcome = JobOutcome {
                        run_id: job.run_id(),
                        command,
                        node: node.clone(),
                        os_pid: None,
                        status: JobStatus::Failed(FailureReason::Spawn(e.to_string())),
                        wall_time: started.elapsed(),
                    };
                    observer.job_finished(job, &outcome);
                    outcomes[index] = Some(outcome);
                }
            }
            continue;
        }

        let done = rx.recv().expect("waiter threads hold a sender while jobs run");
        let run = slots[done.slot].take().expect("completion for an occupied slot");
        running -= 1;
        let node = &pool.labels()[done.slot];
        if options.console_log {
            println!("{}", format_log(&LogEvent::Finished { os_pid: run.os_pid, node }));
        }
        let outcome = outcomes[run.index].as_mut().expect("recorded at spawn");
        outcome.status = done.status;
        outcome.wall_time = done.finished_at.saturating_duration_since(run.started);
        observer.job_finished(&jobs[run.index], outcome);
    }

    let elapsed = start.elapsed();
    if options.console_log {
        println!("{}", format_log(&LogEvent::Summary { elapsed }));
    }
    QueueReport {
        outcomes: outcomes.into_iter().map(|o| o.expect("every job ran")).collect(),
        start_order,
        elapsed,
        max_concurrency,
    }
}

fn spawn(command: &[String]) -> std::io::Result<Child> {
    Command::new(&command[0])
        .args(&command[1..])
        .stdin(Stdio::null())
        .spawn()
}

fn classify(status: ExitStatus) -> JobStatus {
    match status.code() {
        Some(0) => JobStatus::Succeeded,
        Some(c) => JobStatus::Failed(FailureReason::Exit(c)),
        None => JobStatus::Failed(FailureReason::Killed),
    }
}

/// Waits for `child` on its own thread and reports through `tx`.
fn watch(mut child: Child, slot: usize, timeout: Option<Duration>, tx: mpsc::Sender<Completion>) {
    thread::spawn(move || {
        let status = match timeout {
            None => match child.wait() {
                Ok(s) => classify(s),
                Err(e) => JobStatus::Failed(FailureReason::Wait(e.to_string())),
            },
            Some(limit) => {
                let deadline = Instant::now() + limit;
                loop {
                    match child.try_wait() {
                        Ok(Some(s)) => break classify(s),
                        Ok(None) if Instant::now() >= deadline => {
                            let _ = child.kill();
                            let _ = child.wait();
                            break JobStatus::Failed(FailureReason::TimedOut);
                        }
                        Ok(None) => thread::sleep(Duration::from_millis(5)),
                        Err(e) => break JobStatus::Failed(FailureReason::Wait(e.to_string())),
                    }
                }
            }
        };
        let _ = tx.send(Completion { slot, status, finished_at: Instant::now() });
    });
}
