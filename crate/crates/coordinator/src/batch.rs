use std::time::{Duration, SystemTime};

use rfim_core::SimulationParams;
use rfim_xmlrpc::{Fault, Value};

use crate::service::faults;

/// The twelve `start` arguments, kept as the strings forwarded to workers.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchParams {
    pub net_size: String,
    pub steps: String,
    pub hmax: String,
    pub hmin: String,
    pub dlevel: String,
    pub econst: String,
    pub sd: String,
    pub sd1: String,
    pub pp: String,
    pub nofs: String,
    pub runall: String,
    pub bin_name: String,
}

/// Accepts string, int or double and renders it the way it goes on a
/// command line.
fn as_arg(name: &str, v: &Value) -> Result<String, Fault> {
    match v {
        Value::String(s) => Ok(s.trim().to_string()),
        Value::Int(i) => Ok(i.to_string()),
        Value::Double(d) => Ok(d.to_string()),
        other => Err(Fault::new(
            Fault::INVALID_PARAMS,
            format!("{name}: expected string, int or double, got {}", other.type_name()),
        )),
    }
}

fn parse_num<T: std::str::FromStr>(name: &str, s: &str) -> Result<T, Fault> {
    s.parse()
        .map_err(|_| Fault::new(Fault::INVALID_PARAMS, format!("{name}: `{s}` is not a valid number")))
}

/// Integer parameters may arrive as `"70"` or `70.0`.
fn parse_count(name: &str, s: &str) -> Result<i64, Fault> {
    if let Ok(i) = s.parse::<i64>() {
        return Ok(i);
    }
    let d: f64 = parse_num(name, s)?;
    if d.fract() == 0.0 && d.abs() < 1e15 {
        Ok(d as i64)
    } else {
        Err(Fault::new(Fault::INVALID_PARAMS, format!("{name}: `{s}` is not an integer")))
    }
}

impl BatchParams {
    pub const NAMES: [&'static str; 12] = [
        "net_size", "steps", "hmax", "hmin", "dlevel", "econst", "sd", "sd1", "pp", "nofs", "runall", "bin_name",
    ];

    pub fn from_values(params: &[Value]) -> Result<Self, Fault> {
        if params.len() != 12 {
            return Err(Fault::new(
                Fault::INVALID_PARAMS,
                format!("start takes 12 parameters, got {}", params.len()),
            ));
        }
        let a: Vec<String> = params
            .iter()
            .zip(Self::NAMES)
            .map(|(v, n)| as_arg(n, v))
            .collect::<Result<_, _>>()?;
        let mut it = a.into_iter();
        let mut next = || it.next().expect("12 parameters");
        Ok(BatchParams {
            net_size: next(),
            steps: next(),
            hmax: next(),
            hmin: next(),
            dlevel: next(),
            econst: next(),
            sd: next(),
            sd1: next(),
            pp: next(),
            nofs: next(),
            runall: next(),
            bin_name: next(),
        })
    }

    pub fn nofs(&self) -> Result<usize, Fault> {
        let n = parse_count("nofs", &self.nofs)?;
        if n < 1 {
            return Err(Fault::new(Fault::INVALID_PARAMS, format!("nofs must be >= 1, got {n}")));
        }
        usize::try_from(n)
            .ok()
            .filter(|&n| n <= i32::MAX as usize)
            .ok_or_else(|| Fault::new(Fault::INVALID_PARAMS, "nofs too large"))
    }

    /// Physics parameters as a worker would see them; checks their invariants.
    pub fn simulation_params(&self) -> Result<SimulationParams, Fault> {
        let size = parse_count("net_size", &self.net_size)?;
        let steps = parse_count("steps", &self.steps)?;
        let p = SimulationParams {
            size: usize::try_from(size).unwrap_or(0),
            steps: usize::try_from(steps).unwrap_or(0),
            hmax: parse_num("hmax", &self.hmax)?,
            hmin: parse_num("hmin", &self.hmin)?,
            dlevel: parse_num("dlevel", &self.dlevel)?,
            econst: parse_num("econst", &self.econst)?,
            sd: parse_num("sd", &self.sd)?,
            ..Default::default()
        };
        p.validate().map_err(|e| Fault::new(Fault::INVALID_PARAMS, e.to_string()))?;
        Ok(p)
    }

    pub fn check_bin_name(&self) -> Result<(), Fault> {
        let name = &self.bin_name;
        if name.is_empty() || name == "." || name == ".." || name.contains(['/', '\\']) {
            return Err(Fault::new(faults::UNKNOWN_BINARY, format!("invalid binary name `{name}`")));
        }
        Ok(())
    }

    /// Worker flags shared by every run of the batch, in the order the worker
    /// documents them.
    pub fn worker_flags(&self) -> Vec<String> {
        [
            ("--size", &self.net_size),
            ("--steps", &self.steps),
            ("--hmax", &self.hmax),
            ("--hmin", &self.hmin),
            ("--dlevel", &self.dlevel),
            ("--econst", &self.econst),
            ("--sd", &self.sd),
            ("--asd", &self.sd1),
            ("--pp", &self.pp),
        ]
        .into_iter()
        .flat_map(|(flag, v)| [flag.to_string(), v.clone()])
        .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Pending,
    Running,
    Finished,
    /// The process ended without reporting `finish`.
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: u32,
    pub status: RunStatus,
    pub h_values: Vec<f64>,
    pub m_values: Vec<f64>,
    /// Exchange bias, coercivity, descending and ascending crossings.
    pub metrics: [f64; 4],
    pub wall_time: Option<Duration>,
    pub seed: u64,
    pub exit_code: Option<i32>,
}

impl RunRecord {
    pub(crate) fn new(run_id: u32, steps: usize, seed: u64) -> Self {
        RunRecord {
            run_id,
            status: RunStatus::Pending,
            h_values: vec![0.0; steps],
            m_values: vec![0.0; steps],
            metrics: [0.0; 4],
            wall_time: None,
            seed,
            exit_code: None,
        }
    }
}

#[derive(Debug)]
pub(crate) struct Batch {
    pub params: BatchParams,
    pub steps: usize,
    pub runs: Vec<RunRecord>,
    pub created_at: SystemTime,
    pub master_seed: u64,
    /// Queue driver still running.
    pub active: bool,
    pub report: Option<rfim_scheduler::QueueReport>,
}

impl Batch {
    pub fn finished(&self) -> usize {
        self.runs.iter().filter(|r| r.status == RunStatus::Finished).count()
    }

    pub fn failed(&self) -> usize {
        self.runs.iter().filter(|r| r.status == RunStatus::Failed).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(xs: &[&str]) -> Vec<Value> {
        xs.iter().map(|s| Value::from(*s)).collect()
    }

    const DEFAULTS: [&str; 12] = ["70", "300", "8", "-5", "0.10", "10", "1.5", "0", "0", "8", "1", "rfim"];

    #[test]
    fn parses_strings() {
        let p = BatchParams::from_values(&strings(&DEFAULTS)).unwrap();
        assert_eq!(p.nofs().unwrap(), 8);
        let sim = p.simulation_params().unwrap();
        assert_eq!((sim.size, sim.steps, sim.hmin, sim.dlevel), (70, 300, -5.0, 0.10));
        assert_eq!(p.worker_flags()[..4], ["--size", "70", "--steps", "300"].map(String::from));
    }

    #[test]
    fn coerces_numbers() {
        let mut v = strings(&DEFAULTS);
        v[0] = Value::Int(70);
        v[1] = Value::Double(300.0);
        v[2] = Value::Double(8.5);
        let p = BatchParams::from_values(&v).unwrap();
        assert_eq!(p.net_size, "70");
        assert_eq!(p.steps, "300");
        assert_eq!(p.hmax, "8.5");
        assert_eq!(p.simulation_params().unwrap().steps, 300);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(BatchParams::from_values(&strings(&DEFAULTS[..11])).is_err());
        let mut v = strings(&DEFAULTS);
        v[9] = Value::from("0");
        assert_eq!(BatchParams::from_values(&v).unwrap().nofs().unwrap_err().code, Fault::INVALID_PARAMS);
        let mut v = strings(&DEFAULTS);
        v[1] = Value::from("301");
        assert!(BatchParams::from_values(&v).unwrap().simulation_params().is_err());
        let mut v = strings(&DEFAULTS);
        v[3] = Value::Boolean(true);
        assert!(BatchParams::from_values(&v).is_err());
        let mut v = strings(&DEFAULTS);
        v[11] = Value::from("../evil");
        assert_eq!(
            BatchParams::from_values(&v).unwrap().check_bin_name().unwrap_err().code,
            faults::UNKNOWN_BINARY
        );
    }
}
