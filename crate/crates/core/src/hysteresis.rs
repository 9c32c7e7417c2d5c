use crate::disorder::generate_disorder;
use crate::dynamics::relax;
use crate::error::Result;
use crate::lattice::{magnetization, SpinLattice};
use crate::metrics::{extract_metrics, LoopMetrics};
use crate::params::SimulationParams;

/// Ordered `(H, M)` samples of one loop: the descending branch followed by the
/// ascending branch.
#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisCurve {
    h: Vec<f64>,
    m: Vec<f64>,
    branch_split: usize,
}

impl HysteresisCurve {
    /// Panics unless both arrays have the same even length >= 4.
    pub fn new(h: Vec<f64>, m: Vec<f64>) -> Self {
        assert_eq!(h.len(), m.len(), "h and m must have equal length");
        assert!(h.len() >= 4 && h.len().is_multiple_of(2), "curve length must be even and >= 4");
        let branch_split = h.len() / 2;
        HysteresisCurve { h, m, branch_split }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h
    }

    pub fn m_values(&self) -> &[f64] {
        &self.m
    }

    /// Index of the first ascending sample.
    pub fn branch_split(&self) -> usize {
        self.branch_split
    }

    pub fn descending(&self) -> (&[f64], &[f64]) {
        (&self.h[..self.branch_split], &self.m[..self.branch_split])
    }

    pub fn ascending(&self) -> (&[f64], &[f64]) {
        (&self.h[self.branch_split..], &self.m[self.branch_split..])
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.h, self.m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub curve: HysteresisCurve,
    pub metrics: LoopMetrics,
}

/// External field values of the full loop: `steps / 2` evenly spaced values
/// from `hmax` to `hmin`, then the same values in reverse. Both endpoints appear
/// on both branches.
pub fn field_schedule(params: &SimulationParams) -> Vec<f64> {
    let half = params.steps / 2;
    let span = (half - 1) as f64;
    let mut h: Vec<f64> = (0..half)
        .map(|k| {
            if k + 1 == half {
                params.hmin
            } else {
                params.hmax + k as f64 * (params.hmin - params.hmax) / span
            }
        })
        .collect();
    h.extend_from_within(..);
    h[half..].reverse();
    h
}

/// Sweeps the loop from positive saturation and records `M(H)`.
pub fn simulate_curve(params: &SimulationParams) -> Result<HysteresisCurve> {
    params.validate()?;
    let disorder = generate_disorder(params);
    let mut lattice = SpinLattice::saturated(params.size, params.boundary);
    let h = field_schedule(params);
    let mut m = Vec::with_capacity(h.len());
    for &field in &h {
        relax(&mut lattice, &disorder, field)?;
        m.push(magnetization(&lattice));
    }
    Ok(HysteresisCurve::new(h, m))
}

/// One full run: the loop and its zero-crossing metrics.
pub fn run_hysteresis(params: &SimulationParams) -> Result<RunOutput> {
    let curve = simulate_curve(params)?;
    let metrics = extract_metrics(&curve)?;
    Ok(RunOutput { curve, metrics })
}
