use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use rfim_scheduler::{
    run_queue, FailureReason, JobOutcome, JobSpec, JobStatus, LauncherTemplate, NoopObserver, QueueObserver,
    QueueOptions, SlotPool,
};

/// Shell job that appends `<id> <start_ns> <end_ns>` to `log` after sleeping.
fn probe_job(id: u32, sleep: &str, log: &Path) -> JobSpec {
    let script = format!(
        "s=$(date +%s%N); sleep {sleep}; e=$(date +%s%N); echo \"{id} $s $e\" >> {}",
        log.display()
    );
    JobSpec::new(vec!["sh".into(), "-c".into(), script], id).unwrap()
}

/// Maximum number of overlapping [start, end) intervals, computed from the
/// jobs' own timestamps.
fn max_overlap(log: &Path) -> usize {
    let mut events = Vec::new();
    for line in fs::read_to_string(log).unwrap().lines() {
        let f: Vec<u128> = line.split_whitespace().map(|x| x.parse().unwrap()).collect();
        events.push((f[1], 1i32));
        events.push((f[2], -1i32));
    }
    events.sort();
    let (mut cur, mut best) = (0i32, 0i32);
    for (_, d) in events {
        cur += d;
        best = best.max(cur);
    }
    best as usize
}

#[test]
fn forty_jobs_fifteen_slots() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("probe.log");
    let jobs: Vec<_> = (0..40).map(|i| probe_job(i, "0.05", &log)).collect();
    let report = run_queue(jobs, &SlotPool::new(15).unwrap(), &QueueOptions::default(), &NoopObserver);
    assert_eq!(report.outcomes.len(), 40);
    assert_eq!(report.succeeded(), 40);
    assert!(report.max_concurrency <= 15);
    assert_eq!(report.max_concurrency, 15);
    assert!(max_overlap(&log) <= 15);
    assert_eq!(fs::read_to_string(&log).unwrap().lines().count(), 40);
    let ids: Vec<u32> = report.outcomes.iter().map(|o| o.run_id).collect();
    assert_eq!(ids, (0..40).collect::<Vec<_>>());
}

#[test]
fn single_job() {
    let report = run_queue(
        vec![JobSpec::new(vec!["true".into()], 0).unwrap()],
        &SlotPool::new(4).unwrap(),
        &QueueOptions { console_log: true, ..Default::default() },
        &NoopObserver,
    );
    assert_eq!(report.succeeded(), 1);
    assert_eq!(report.max_concurrency, 1);
    assert!(report.outcomes[0].os_pid.is_some());
}

#[test]
fn empty_queue() {
    let report = run_queue(vec![], &SlotPool::new(2).unwrap(), &QueueOptions::default(), &NoopObserver);
    assert!(report.outcomes.is_empty());
    assert_eq!(report.max_concurrency, 0);
}

#[derive(Default)]
struct Recorder {
    started: Mutex<Vec<(u32, String)>>,
    finished: Mutex<Vec<(u32, bool)>>,
}

impl QueueObserver for Recorder {
    fn job_started(&self, job: &JobSpec, node: &str, _os_pid: u32) {
        self.started.lock().unwrap().push((job.run_id(), node.to_string()));
    }
    fn job_finished(&self, job: &JobSpec, outcome: &JobOutcome) {
        self.finished.lock().unwrap().push((job.run_id(), outcome.succeeded()));
    }
}

#[test]
fn fifo_start_order_with_arbitrary_completion() {
    // Later jobs are shorter, so completion order differs from start order.
    let jobs: Vec<_> = (0..8u32)
        .map(|i| {
            let secs = format!("0.{}", 8 - i);
            JobSpec::new(vec!["sleep".into(), secs], i).unwrap()
        })
        .collect();
    let rec = Recorder::default();
    let report = run_queue(jobs, &SlotPool::new(3).unwrap(), &QueueOptions::default(), &rec);
    assert_eq!(report.start_order, (0..8).collect::<Vec<_>>());
    let started: Vec<u32> = rec.started.lock().unwrap().iter().map(|s| s.0).collect();
    assert_eq!(started, (0..8).collect::<Vec<_>>());
    let finished: Vec<u32> = rec.finished.lock().unwrap().iter().map(|f| f.0).collect();
    assert_ne!(finished, started);
    let mut sorted = finished.clone();
    sorted.sort();
    assert_eq!(sorted, (0..8).collect::<Vec<_>>());
}

#[test]
fn failures_do_not_stop_the_queue() {
    let jobs = vec![
        JobSpec::new(vec!["/nonexistent/simulator".into()], 0).unwrap(),
        JobSpec::new(vec!["false".into()], 1).unwrap(),
        JobSpec::new(vec!["sh".into(), "-c".into(), "exit 3".into()], 2).unwrap(),
        JobSpec::new(vec!["true".into()], 3).unwrap(),
    ];
    let rec = Recorder::default();
    let report = run_queue(jobs, &SlotPool::new(1).unwrap(), &QueueOptions::default(), &rec);
    assert!(matches!(report.outcomes[0].status, JobStatus::Failed(FailureReason::Spawn(_))));
    assert_eq!(report.outcomes[1].status, JobStatus::Failed(FailureReason::Exit(1)));
    assert_eq!(report.outcomes[2].exit_code(), Some(3));
    assert!(report.outcomes[3].succeeded());
    assert_eq!(report.succeeded(), 1);
    assert_eq!(report.failed(), 3);
    assert_eq!(rec.finished.lock().unwrap().len(), 4);
}

#[test]
fn timeout_kills_wedged_job() {
    let jobs = vec![
        JobSpec::new(vec!["sleep".into(), "10".into()], 0).unwrap(),
        JobSpec::new(vec!["true".into()], 1).unwrap(),
    ];
    let opts = QueueOptions { job_timeout: Some(Duration::from_millis(200)), ..Default::default() };
    let report = run_queue(jobs, &SlotPool::new(1).unwrap(), &opts, &NoopObserver);
    assert_eq!(report.outcomes[0].status, JobStatus::Failed(FailureReason::TimedOut));
    assert!(report.outcomes[1].succeeded());
    assert!(report.elapsed < Duration::from_secs(5));
}

#[test]
fn launcher_template_substitutes_node() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nodes");
    let jobs: Vec<_> = (0..6u32)
        .map(|i| {
            let script = format!("echo \"{i} $NODE\" >> {}; sleep 0.1", out.display());
            JobSpec::new(vec!["sh".into(), "-c".into(), script], i).unwrap()
        })
        .collect();
    let opts = QueueOptions {
        launcher: Some(LauncherTemplate::parse("env NODE=n<node> <cmd>").unwrap()),
        ..Default::default()
    };
    let pool = SlotPool::with_labels(vec!["a".into(), "b".into()]).unwrap();
    let report = run_queue(jobs, &pool, &opts, &NoopObserver);
    assert_eq!(report.succeeded(), 6);
    assert_eq!(report.outcomes[0].command[..2], ["env".to_string(), "NODE=na".to_string()]);
    let text = fs::read_to_string(out).unwrap();
    for line in text.lines() {
        let node = line.split_whitespace().nth(1).unwrap();
        assert!(node == "na" || node == "nb", "{line}");
    }
    for o in &report.outcomes {
        assert!(o.node == "a" || o.node == "b");
    }
}

#[test]
fn elapsed_bounds() {
    let jobs: Vec<_> = (0..8u32)
        .map(|i| JobSpec::new(vec!["sleep".into(), "0.1".into()], i).unwrap())
        .collect();
    let report = run_queue(jobs, &SlotPool::new(4).unwrap(), &QueueOptions::default(), &NoopObserver);
    let longest = report.outcomes.iter().map(|o| o.wall_time).max().unwrap();
    assert!(report.elapsed >= longest);
    // ceil(8/4) * 0.1 s, within 20 % plus process start overhead.
    let ideal = Duration::from_millis(200);
    assert!(report.elapsed >= ideal, "{:?}", report.elapsed);
    assert!(report.elapsed <= ideal.mul_f64(1.2) + Duration::from_millis(60), "{:?}", report.elapsed);
}

#[test]
fn proportional_speedup() {
    let run = |slots| {
        let jobs: Vec<_> = (0..16u32)
            .map(|i| JobSpec::new(vec!["sleep".into(), "0.1".into()], i).unwrap())
            .collect();
        run_queue(jobs, &SlotPool::new(slots).unwrap(), &QueueOptions::default(), &NoopObserver).elapsed
    };
    let serial = run(1);
    let parallel = run(4);
    let ratio = serial.as_secs_f64() / parallel.as_secs_f64();
    assert!(ratio >= 2.5, "ratio {ratio}");
}
