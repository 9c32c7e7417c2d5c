use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::time::Duration;

use rfim_scheduler::LauncherTemplate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("bin directory {0} does not exist")]
    MissingBinDir(PathBuf),
    #[error("port must be in 1..=65535")]
    BadPort,
    #[error("slot count must be at least 1")]
    NoSlots,
    #[error("invalid launcher template: {0}")]
    Template(#[from] rfim_scheduler::JobError),
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind: IpAddr,
    pub port: u16,
    /// Directory holding launchable simulator binaries.
    pub bin_dir: PathBuf,
    pub slots: usize,
    pub launcher_template: Option<String>,
    /// Master seed for per-run seeds; a fresh random one per batch when unset.
    pub master_seed: Option<u64>,
    /// When set, workers also write their curve to `<dir>/run_<pid>.csv`.
    pub dump_dir: Option<PathBuf>,
    pub job_timeout: Option<Duration>,
    /// URL workers report to; derived from the bound address when unset.
    pub worker_url: Option<String>,
    pub cors: bool,
    pub ui_dir: Option<PathBuf>,
    pub console_log: bool,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind: IpAddr::V4(Ipv4Addr::UNSPECIFIED),
            port: 8000,
            bin_dir: PathBuf::from("bin"),
            slots: std::thread::available_parallelism().map_or(1, |n| n.get()),
            launcher_template: None,
            master_seed: None,
            dump_dir: None,
            job_timeout: None,
            worker_url: None,
            cors: false,
            ui_dir: None,
            console_log: true,
        }
    }
}

impl ServerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.port == 0 {
            return Err(ConfigError::BadPort);
        }
        self.validate_runtime()
    }

    /// Checks everything except the port, which may be 0 for tests binding an
    /// ephemeral port.
    pub(crate) fn validate_runtime(&self) -> Result<(), ConfigError> {
        if !self.bin_dir.is_dir() {
            return Err(ConfigError::MissingBinDir(self.bin_dir.clone()));
        }
        if self.slots == 0 {
            return Err(ConfigError::NoSlots);
        }
        self.launcher()?;
        Ok(())
    }

    pub fn launcher(&self) -> Result<Option<LauncherTemplate>, ConfigError> {
        Ok(match &self.launcher_template {
            Some(t) => Some(LauncherTemplate::parse(t)?),
            None => None,
        })
    }

    pub fn socket_addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }
}
