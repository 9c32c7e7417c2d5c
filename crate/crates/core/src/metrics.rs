use crate::error::{Error, Result};
use crate::hysteresis::HysteresisCurve;

/// Zero-crossing observables of one loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopMetrics {
    pub h_cross_desc: f64,
    pub h_cross_asc: f64,
    /// Midpoint of the two crossings.
    pub exchange_bias: f64,
    /// Distance between the two crossings.
    pub coercivity: f64,
}

impl LoopMetrics {
    pub fn from_crossings(h_cross_desc: f64, h_cross_asc: f64) -> Self {
        LoopMetrics {
            h_cross_desc,
            h_cross_asc,
            exchange_bias: (h_cross_desc + h_cross_asc) / 2.0,
            coercivity: h_cross_asc - h_cross_desc,
        }
    }

    /// Wire order: exchange bias, coercivity, descending and ascending crossings.
    pub fn to_array(&self) -> [f64; 4] {
        [self.exchange_bias, self.coercivity, self.h_cross_desc, self.h_cross_asc]
    }
}

/// Field of the first zero crossing of `m` along a branch, linearly
/// interpolated between the bracketing samples. A sample with `m == 0` is the
/// crossing itself.
pub fn branch_crossing(h: &[f64], m: &[f64]) -> Option<f64> {
    for k in 0..m.len() {
        if m[k] == 0.0 {
            return Some(h[k]);
        }
        if k + 1 < m.len() && m[k] * m[k + 1] < 0.0 {
            let t = m[k] / (m[k] - m[k + 1]);
            return Some(h[k] + t * (h[k + 1] - h[k]));
        }
    }
    None
}

pub fn extract_metrics(curve: &HysteresisCurve) -> Result<LoopMetrics> {
    let (h, m) = curve.descending();
    let desc = branch_crossing(h, m).ok_or(Error::NoCrossing { branch: "descending" })?;
    let (h, m) = curve.ascending();
    let asc = branch_crossing(h, m).ok_or(Error::NoCrossing { branch: "ascending" })?;
    Ok(LoopMetrics::from_crossings(desc, asc))
}
