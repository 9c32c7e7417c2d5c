use std::time::SystemTime;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JobError {
    #[error("job argv is empty")]
    EmptyArgv,
    #[error("job run id {run_id} does not match --pid {pid_flag}")]
    PidMismatch { run_id: u32, pid_flag: String },
    #[error("slot pool needs at least one slot")]
    NoSlots,
    #[error("launcher template is empty")]
    EmptyTemplate,
}

/// One process to launch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobSpec {
    argv: Vec<String>,
    run_id: u32,
    enqueue_time: SystemTime,
}

impl JobSpec {
    /// Fails if `argv` is empty or carries a `--pid` flag different from `run_id`.
    pub fn new(argv: Vec<String>, run_id: u32) -> Result<Self, JobError> {
        if argv.is_empty() {
            return Err(JobError::EmptyArgv);
        }
        if let Some(pos) = argv.iter().position(|a| a == "--pid") {
            let flag = argv.get(pos + 1).cloned().unwrap_or_default();
            if flag != run_id.to_string() {
                return Err(JobError::PidMismatch { run_id, pid_flag: flag });
            }
        }
        Ok(JobSpec { argv, run_id, enqueue_time: SystemTime::now() })
    }

    pub fn argv(&self) -> &[String] {
        &self.argv
    }

    pub fn program(&self) -> &str {
        &self.argv[0]
    }

    pub fn run_id(&self) -> u32 {
        self.run_id
    }

    pub fn enqueue_time(&self) -> SystemTime {
        self.enqueue_time
    }
}

/// Execution slots, each tagged with a node label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotPool {
    labels: Vec<String>,
}

impl SlotPool {
    /// Slots labelled `1..=count`.
    pub fn new(count: usize) -> Result<Self, JobError> {
        Self::with_labels((1..=count).map(|i| i.to_string()).collect())
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self, JobError> {
        if labels.is_empty() {
            return Err(JobError::NoSlots);
        }
        Ok(SlotPool { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Whitespace-separated command prefix. `<node>` is replaced by the slot
/// label wherever it occurs; a token that is exactly `<cmd>` expands to the
/// job's argv. Without a `<cmd>` token the argv is appended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LauncherTemplate {
    tokens: Vec<String>,
}

impl LauncherTemplate {
    pub fn parse(template: &str) -> Result<Self, JobError> {
        let tokens: Vec<String> = template.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() || tokens[0] == "<cmd>" {
            return Err(JobError::EmptyTemplate);
        }
        Ok(LauncherTemplate { tokens })
    }

    pub fn expand(&self, argv: &[String], node: &str) -> Vec<String> {
        let mut out = Vec::with_capacity(self.tokens.len() + argv.len());
        let mut placed = false;
        for t in &self.tokens {
            if t == "<cmd>" {
                out.extend(argv.iter().cloned());
                placed = true;
            } else {
                out.push(t.replace("<node>", node));
            }
        }
        if !placed {
            out.extend(argv.iter().cloned());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn job_validation() {
        assert_eq!(JobSpec::new(vec![], 0), Err(JobError::EmptyArgv));
        assert!(JobSpec::new(argv(&["./bin/rfim", "--pid", "3"]), 3).is_ok());
        assert!(matches!(
            JobSpec::new(argv(&["./bin/rfim", "--pid", "3"]), 4),
            Err(JobError::PidMismatch { .. })
        ));
        assert!(JobSpec::new(argv(&["sleep", "1"]), 9).is_ok());
    }

    #[test]
    fn default_labels() {
        let pool = SlotPool::new(15).unwrap();
        assert_eq!(pool.labels().first().map(String::as_str), Some("1"));
        assert_eq!(pool.labels().last().map(String::as_str), Some("15"));
        assert_eq!(SlotPool::new(0), Err(JobError::NoSlots));
    }

    #[test]
    fn mosrun_template() {
        let t = LauncherTemplate::parse("mosrun -L -j<node> <cmd>").unwrap();
        assert_eq!(
            t.expand(&argv(&["./bin/rfim", "--pid", "0"]), "3"),
            argv(&["mosrun", "-L", "-j3", "./bin/rfim", "--pid", "0"])
        );
        let t = LauncherTemplate::parse("ssh node<node>").unwrap();
        assert_eq!(t.expand(&argv(&["a", "b"]), "2"), argv(&["ssh", "node2", "a", "b"]));
        assert!(LauncherTemplate::parse("  ").is_err());
    }
}
