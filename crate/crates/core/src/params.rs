use crate::error::{Error, Result};
use crate::lattice::Boundary;

/// Inputs of a single hysteresis run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationParams {
    /// Lattice side length.
    pub size: usize,
    /// Field samples over the full loop (both branches).
    pub steps: usize,
    pub hmax: f64,
    pub hmin: f64,
    /// Fraction of sites carrying the enhanced exchange constant.
    pub dlevel: f64,
    /// Enhanced exchange constant at pinned sites.
    pub econst: f64,
    /// Standard deviation of the Gaussian random field.
    pub sd: f64,
    pub seed: u64,
    pub run_id: u32,
    pub boundary: Boundary,
}

impl Default for SimulationParams {
    fn default() -> Self {
        SimulationParams {
            size: 70,
            steps: 300,
            hmax: 8.0,
            hmin: -5.0,
            dlevel: 0.10,
            econst: 10.0,
            sd: 1.5,
            seed: 0,
            run_id: 0,
            boundary: Boundary::Free,
        }
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}

impl SimulationParams {
    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(invalid("size", format!("must be >= 2, got {}", self.size)));
        }
        if self.steps < 4 || !self.steps.is_multiple_of(2) {
            return Err(invalid(
                "steps",
                format!("must be even and >= 4, got {}", self.steps),
            ));
        }
        if !(self.hmax.is_finite() && self.hmin.is_finite()) || self.hmax <= self.hmin {
            return Err(invalid(
                "hmax",
                format!("need finite hmax > hmin, got {} <= {}", self.hmax, self.hmin),
            ));
        }
        if !(0.0..=1.0).contains(&self.dlevel) {
            return Err(invalid("dlevel", format!("must lie in [0, 1], got {}", self.dlevel)));
        }
        if !(self.econst >= 1.0 && self.econst.is_finite()) {
            return Err(invalid("econst", format!("must be >= 1, got {}", self.econst)));
        }
        if !(self.sd >= 0.0 && self.sd.is_finite()) {
            return Err(invalid("sd", format!("must be >= 0, got {}", self.sd)));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.size * self.size
    }

    /// Number of pinned sites, `round(dlevel * n^2)`.
    pub fn pinned_count(&self) -> usize {
        (self.dlevel * self.sites() as f64).round() as usize
    }

    /// Distance between consecutive field samples within one branch.
    pub fn field_step(&self) -> f64 {
        (self.hmax - self.hmin) / (self.steps / 2 - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = SimulationParams::default();
        p.validate().unwrap();
        assert_eq!(p.pinned_count(), 490);
    }

    #[test]
    fn rejects_bad_values() {
        let base = SimulationParams::default();
        let cases = [
            SimulationParams { size: 1, ..base.clone() },
            SimulationParams { steps: 2, ..base.clone() },
            SimulationParams { steps: 301, ..base.clone() },
            SimulationParams { hmax: -5.0, ..base.clone() },
            SimulationParams { dlevel: 1.5, ..base.clone() },
            SimulationParams { econst: 0.5, ..base.clone() },
            SimulationParams { sd: -0.1, ..base.clone() },
            SimulationParams { sd: f64::NAN, ..base.clone() },
        ];
        for p in cases {
            assert!(matches!(p.validate(), Err(Error::InvalidParam { .. })), "{p:?}");
        }
    }
}
