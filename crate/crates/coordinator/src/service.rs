use std::collections::BTreeMap;
use std::io;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use log::{info, warn};
use rfim_core::rng::derive_seed;
use rfim_scheduler::{run_queue, JobOutcome, JobSpec, QueueObserver, QueueOptions, QueueReport, SlotPool};
use rfim_xmlrpc::{Fault, Handler, MethodCall, MethodResponse, Server, ServerHandle, ServerOptions, Value};

use crate::aggregate::{self, FinishedRun};
use crate::batch::{Batch, BatchParams, RunRecord, RunStatus};
use crate::config::{ConfigError, ServerConfig};

/// Application fault codes.
pub mod faults {
    pub const BUSY: i32 = 1;
    pub const UNKNOWN_BINARY: i32 = 2;
    pub const UNKNOWN_PID: i32 = 3;
    pub const WRONG_LENGTH: i32 = 4;
    pub const NO_FINISHED_RUNS: i32 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub created: usize,
    pub finished: usize,
    pub running: usize,
}

/// A store/finish call as received.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallRecord {
    pub method: &'static str,
    pub pid: i64,
    pub at: SystemTime,
}

struct Inner {
    config: ServerConfig,
    worker_url: Mutex<Option<String>>,
    state: Mutex<State>,
    idle: Condvar,
    calls: Mutex<Vec<CallRecord>>,
}

#[derive(Default)]
struct State {
    batch: Option<Batch>,
    generation: u64,
}

/// Shared handle to the coordinator; clones refer to the same state.
#[derive(Clone)]
pub struct Coordinator {
    inner: Arc<Inner>,
}

fn bad_params(msg: impl Into<String>) -> Fault {
    Fault::new(Fault::INVALID_PARAMS, msg)
}

fn arity(call: &MethodCall, n: usize) -> Result<(), Fault> {
    if call.params.len() == n {
        Ok(())
    } else {
        Err(bad_params(format!("{} takes {n} parameter(s), got {}", call.name(), call.params.len())))
    }
}

fn pid_arg(v: &Value) -> Result<i64, Fault> {
    match *v {
        Value::Int(i) => Ok(i as i64),
        Value::Double(d) if d.fract() == 0.0 && d.abs() < 1e15 => Ok(d as i64),
        ref other => Err(bad_params(format!("pid must be an int, got {}", other.type_name()))),
    }
}

fn doubles_arg(v: &Value) -> Result<Vec<f64>, Fault> {
    let items = v
        .as_array()
        .ok_or_else(|| bad_params(format!("expected an array, got {}", v.type_name())))?;
    items
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| bad_params(format!("array element is {}", x.type_name()))))
        .collect()
}

fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl Coordinator {
    pub fn new(config: ServerConfig) -> Result<Self, ConfigError> {
        config.validate_runtime()?;
        let worker_url = config.worker_url.clone();
        Ok(Coordinator {
            inner: Arc::new(Inner {
                config,
                worker_url: Mutex::new(worker_url),
                state: Mutex::new(State::default()),
                idle: Condvar::new(),
                calls: Mutex::new(Vec::new()),
            }),
        })
    }

    pub fn config(&self) -> &ServerConfig {
        &self.inner.config
    }

    fn server_options(&self) -> ServerOptions {
        ServerOptions {
            cors: self.inner.config.cors,
            static_dir: self.inner.config.ui_dir.clone(),
            ..Default::default()
        }
    }

    /// Binds `addr` and serves on a background thread. Unless configured
    /// otherwise, workers are told to report to the bound address.
    pub fn spawn_server(&self, addr: std::net::SocketAddr) -> io::Result<ServerHandle> {
        let server = Server::bind(addr, Arc::new(self.clone()), self.server_options())?;
        let handle = server.spawn()?;
        self.adopt_url(handle.url());
        Ok(handle)
    }

    /// Binds the configured address and serves until the process exits.
    pub fn serve_forever(&self) -> io::Result<()> {
        let server = Server::bind(self.inner.config.socket_addr(), Arc::new(self.clone()), self.server_options())?;
        let mut addr = server.local_addr()?;
        if addr.ip().is_unspecified() {
            addr.set_ip(std::net::Ipv4Addr::LOCALHOST.into());
        }
        self.adopt_url(format!("http://{addr}"));
        info!("listening on {}", server.local_addr()?);
        server.serve_forever()
    }

    fn adopt_url(&self, url: String) {
        let mut slot = self.inner.worker_url.lock().unwrap();
        if slot.is_none() {
            *slot = Some(url);
        }
    }

    pub fn worker_url(&self) -> String {
        self.inner
            .worker_url
            .lock()
            .unwrap()
            .clone()
            .unwrap_or_else(|| "http://127.0.0.1:8000".to_string())
    }

    fn state(&self) -> MutexGuard<'_, State> {
        self.inner.state.lock().unwrap()
    }

    fn record_call(&self, method: &'static str, pid: i64) {
        let at = SystemTime::now();
        info!("method={method} pid={pid} ts={:.3}", unix_seconds(at));
        self.inner.calls.lock().unwrap().push(CallRecord { method, pid, at });
    }

    /// Store and finish calls in arrival order.
    pub fn call_log(&self) -> Vec<CallRecord> {
        self.inner.calls.lock().unwrap().clone()
    }

    pub fn dispatch(&self, call: &MethodCall) -> Result<Value, Fault> {
        match call.name() {
            "start" => self.start(&call.params).map(Value::Int),
            "store_array1" => {
                arity(call, 2)?;
                self.store_array(pid_arg(&call.params[0])?, &doubles_arg(&call.params[1])?, Axis::Field)
                    .map(Value::Int)
            }
            "store_array2" => {
                arity(call, 2)?;
                self.store_array(pid_arg(&call.params[0])?, &doubles_arg(&call.params[1])?, Axis::Magnetization)
                    .map(Value::Int)
            }
            "store_results" => {
                arity(call, 2)?;
                self.store_results(pid_arg(&call.params[0])?, &doubles_arg(&call.params[1])?)
                    .map(Value::Int)
            }
            "finish" => {
                arity(call, 1)?;
                self.finish(pid_arg(&call.params[0])?).map(Value::Int)
            }
            "fin_as_far" => {
                arity(call, 0)?;
                Ok(Value::Int(self.fin_as_far() as i32))
            }
            "res_sum" => {
                arity(call, 0)?;
                Ok(Value::Array(
                    aggregate::res_sum(&self.finished_runs())
                        .into_iter()
                        .map(|s| Value::doubles(&[s.mean, s.stderr]))
                        .collect(),
                ))
            }
            "loop_mean" => {
                arity(call, 0)?;
                let points = aggregate::loop_mean(&self.finished_runs()).ok_or_else(no_finished)?;
                Ok(Value::Array(
                    points.into_iter().map(|p| Value::doubles(&[p.h, p.m_mean, p.m_stderr])).collect(),
                ))
            }
            "progress" => {
                arity(call, 0)?;
                let p = self.progress();
                let mut s = BTreeMap::new();
                s.insert("created".to_string(), Value::Int(p.created as i32));
                s.insert("finished".to_string(), Value::Int(p.finished as i32));
                s.insert("running".to_string(), Value::Int(p.running as i32));
                Ok(Value::Struct(s))
            }
            "export_csv" => {
                arity(call, 0)?;
                aggregate::export_csv(&self.finished_runs()).map(Value::String).ok_or_else(no_finished)
            }
            other => Err(Fault::new(Fault::METHOD_NOT_FOUND, format!("method `{other}` is not supported"))),
        }
    }

    /// Creates the batch tables and hands one job per run to the scheduler
    /// on a background thread. Returns 0 without waiting for any run.
    pub fn start(&self, params: &[Value]) -> Result<i32, Fault> {
        let params = BatchParams::from_values(params)?;
        let config = &self.inner.config;
        let mut state = self.state();
        if state.batch.as_ref().is_some_and(|b| b.active) {
            return Err(Fault::new(faults::BUSY, "a batch is already running"));
        }
        params.check_bin_name()?;
        let program = config.bin_dir.join(&params.bin_name);
        if !program.is_file() {
            return Err(Fault::new(
                faults::UNKNOWN_BINARY,
                format!("no binary `{}` in {}", params.bin_name, config.bin_dir.display()),
            ));
        }
        let nofs = params.nofs()?;
        let sim = params.simulation_params()?;

        let master_seed = config.master_seed.unwrap_or_else(rand::random);
        let worker_url = self.worker_url();
        let shared = params.worker_flags();
        let mut runs = Vec::with_capacity(nofs);
        let mut jobs = Vec::with_capacity(nofs);
        for i in 0..nofs {
            let seed = derive_seed(master_seed, i as u64);
            let mut argv = vec![program.to_string_lossy().into_owned()];
            argv.extend(shared.iter().cloned());
            argv.extend(["--pid".into(), i.to_string(), "--seed".into(), seed.to_string()]);
            argv.extend(["--server-url".into(), worker_url.clone()]);
            if let Some(dir) = &config.dump_dir {
                argv.push("--dump".into());
                argv.push(dir.join(format!("run_{i}.csv")).to_string_lossy().into_owned());
            }
            jobs.push(JobSpec::new(argv, i as u32).map_err(|e| Fault::new(Fault::INTERNAL_ERROR, e.to_string()))?);
            runs.push(RunRecord::new(i as u32, sim.steps, seed));
        }
        info!(
            "start: nofs={nofs} bin={} master_seed={master_seed} asd={} pp={} runall={}",
            params.bin_name, params.sd1, params.pp, params.runall
        );

        state.generation += 1;
        let generation = state.generation;
        state.batch = Some(Batch {
            steps: sim.steps,
            params,
            runs,
            created_at: SystemTime::now(),
            master_seed,
            active: true,
            report: None,
        });
        drop(state);

        let pool = SlotPool::new(config.slots).map_err(|e| Fault::new(Fault::INTERNAL_ERROR, e.to_string()))?;
        let options = QueueOptions {
            launcher: config.launcher().map_err(|e| Fault::new(Fault::INTERNAL_ERROR, e.to_string()))?,
            job_timeout: config.job_timeout,
            console_log: config.console_log,
        };
        let me = self.clone();
        let spawned = thread::Builder::new().name("batch-queue".into()).spawn(move || {
            let observer = BatchObserver { coordinator: me.clone(), generation };
            let report = run_queue(jobs, &pool, &options, &observer);
            let mut state = me.state();
            if state.generation == generation {
                if let Some(batch) = state.batch.as_mut() {
                    batch.active = false;
                    batch.report = Some(report);
                }
            }
            drop(state);
            me.inner.idle.notify_all();
        });
        if let Err(e) = spawned {
            let mut state = self.state();
            if let Some(b) = state.batch.as_mut() {
                b.active = false;
            }
            return Err(Fault::new(Fault::INTERNAL_ERROR, format!("cannot start queue: {e}")));
        }
        Ok(0)
    }

    fn with_run<T>(&self, pid: i64, f: impl FnOnce(&mut RunRecord, usize) -> Result<T, Fault>) -> Result<T, Fault> {
        let mut state = self.state();
        let batch = state
            .batch
            .as_mut()
            .ok_or_else(|| Fault::new(faults::UNKNOWN_PID, format!("unknown pid {pid}: no batch")))?;
        let steps = batch.steps;
        let run = usize::try_from(pid)
            .ok()
            .and_then(|i| batch.runs.get_mut(i))
            .ok_or_else(|| Fault::new(faults::UNKNOWN_PID, format!("unknown pid {pid}")))?;
        f(run, steps)
    }

    fn store_array(&self, pid: i64, values: &[f64], axis: Axis) -> Result<i32, Fault> {
        self.record_call(axis.method(), pid);
        self.with_run(pid, |run, steps| {
            if values.len() != steps {
                return Err(Fault::new(
                    faults::WRONG_LENGTH,
                    format!("expected {steps} values, got {}", values.len()),
                ));
            }
            match axis {
                Axis::Field => run.h_values.copy_from_slice(values),
                Axis::Magnetization => run.m_values.copy_from_slice(values),
            }
            Ok(0)
        })
    }

    fn store_results(&self, pid: i64, results: &[f64]) -> Result<i32, Fault> {
        self.record_call("store_results", pid);
        if results.len() < 2 {
            return Err(bad_params(format!("results need at least 2 values, got {}", results.len())));
        }
        if self.inner.config.console_log {
            println!("RESULTS APP PID:{pid}");
        }
        self.with_run(pid, |run, _| {
            run.metrics = [0.0; 4];
            for (slot, v) in run.metrics.iter_mut().zip(results) {
                *slot = *v;
            }
            Ok(2)
        })
    }

    /// Marks the run finished. Repeated calls change nothing.
    fn finish(&self, pid: i64) -> Result<i32, Fault> {
        self.record_call("finish", pid);
        self.with_run(pid, |run, _| {
            run.status = RunStatus::Finished;
            Ok(0)
        })
    }

    pub fn fin_as_far(&self) -> usize {
        self.state().batch.as_ref().map_or(0, Batch::finished)
    }

    pub fn progress(&self) -> Progress {
        let state = self.state();
        match &state.batch {
            None => Progress { created: 0, finished: 0, running: 0 },
            Some(b) => {
                let created = b.runs.len();
                let finished = b.finished();
                Progress { created, finished, running: created - finished - b.failed() }
            }
        }
    }

    /// Snapshot of finished runs, ordered by run id.
    pub fn finished_runs(&self) -> Vec<FinishedRun> {
        let state = self.state();
        let Some(batch) = &state.batch else { return Vec::new() };
        batch
            .runs
            .iter()
            .filter(|r| r.status == RunStatus::Finished)
            .map(|r| FinishedRun {
                run_id: r.run_id,
                h_values: r.h_values.clone(),
                m_values: r.m_values.clone(),
                metrics: r.metrics,
            })
            .collect()
    }

    pub fn runs(&self) -> Vec<RunRecord> {
        self.state().batch.as_ref().map(|b| b.runs.clone()).unwrap_or_default()
    }

    pub fn batch_params(&self) -> Option<BatchParams> {
        self.state().batch.as_ref().map(|b| b.params.clone())
    }

    pub fn master_seed(&self) -> Option<u64> {
        self.state().batch.as_ref().map(|b| b.master_seed)
    }

    pub fn batch_created_at(&self) -> Option<SystemTime> {
        self.state().batch.as_ref().map(|b| b.created_at)
    }

    pub fn is_busy(&self) -> bool {
        self.state().batch.as_ref().is_some_and(|b| b.active)
    }

    /// Blocks until the current batch's queue has drained. Returns false on
    /// timeout.
    pub fn wait_idle(&self, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        let mut state = self.state();
        while state.batch.as_ref().is_some_and(|b| b.active) {
            let now = Instant::now();
            if now >= deadline {
                return false;
            }
            state = self.inner.idle.wait_timeout(state, deadline - now).unwrap().0;
        }
        true
    }

    /// Scheduler report of the last drained batch.
    pub fn last_report(&self) -> Option<QueueReport> {
        self.state().batch.as_ref().and_then(|b| b.report.clone())
    }
}

fn no_finished() -> Fault {
    Fault::new(faults::NO_FINISHED_RUNS, "no run has finished yet")
}

#[derive(Debug, Clone, Copy)]
enum Axis {
    Field,
    Magnetization,
}

impl Axis {
    fn method(self) -> &'static str {
        match self {
            Axis::Field => "store_array1",
            Axis::Magnetization => "store_array2",
        }
    }
}

impl Handler for Coordinator {
    fn handle(&self, call: MethodCall) -> MethodResponse {
        self.dispatch(&call).into()
    }
}

struct BatchObserver {
    coordinator: Coordinator,
    generation: u64,
}

impl BatchObserver {
    fn update(&self, run_id: u32, f: impl FnOnce(&mut RunRecord)) {
        let mut state = self.coordinator.state();
        if state.generation != self.generation {
            return;
        }
        if let Some(run) = state.batch.as_mut().and_then(|b| b.runs.get_mut(run_id as usize)) {
            f(run);
        }
    }
}

impl QueueObserver for BatchObserver {
    fn job_started(&self, job: &JobSpec, _node: &str, _os_pid: u32) {
        self.update(job.run_id(), |run| {
            if run.status == RunStatus::Pending {
                run.status = RunStatus::Running;
            }
        });
    }

    fn job_finished(&self, job: &JobSpec, outcome: &JobOutcome) {
        if !outcome.succeeded() {
            warn!("run {} failed: {:?}", job.run_id(), outcome.status);
        }
        self.update(job.run_id(), |run| {
            run.wall_time = Some(outcome.wall_time);
            run.exit_code = outcome.exit_code();
            if run.status != RunStatus::Finished {
                run.status = RunStatus::Failed;
            }
        });
    }
}
