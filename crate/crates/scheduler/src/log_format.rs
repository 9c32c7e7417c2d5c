use std::time::Duration;

/// Console events of a queue run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogEvent<'a> {
    Started { program: &'a str, os_pid: u32, node: &'a str },
    Finished { os_pid: u32, node: &'a str },
    Summary { elapsed: Duration },
}

pub fn format_log(event: &LogEvent<'_>) -> String {
    match event {
        LogEvent::Started { program, os_pid, node } => {
            format!("Job {program} pid {os_pid} started on node {node}.")
        }
        LogEvent::Finished { os_pid, node } => format!("Process {os_pid} on node {node} finished."),
        LogEvent::Summary { elapsed } => {
            let secs = elapsed.as_secs();
            // Trailing space is part of the format.
            format!("Completed in {} min {} sec. ", secs / 60, secs % 60)
        }
    }
}
