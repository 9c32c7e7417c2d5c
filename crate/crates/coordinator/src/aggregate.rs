//! Ensemble statistics over finished runs.

use std::fmt::Write;

use rfim_core::stats::mean_stderr;

pub const METRIC_NAMES: [&str; 4] = ["exchange_bias", "coercivity", "h_cross_desc", "h_cross_asc"];

/// Data of one run that reported `finish`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinishedRun {
    pub run_id: u32,
    pub h_values: Vec<f64>,
    pub m_values: Vec<f64>,
    pub metrics: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricStat {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPoint {
    pub h: f64,
    pub m_mean: f64,
    pub m_stderr: f64,
}

/// Mean and standard error of each metric; empty when nothing has finished.
pub fn res_sum(runs: &[FinishedRun]) -> Vec<MetricStat> {
    if runs.is_empty() {
        return Vec::new();
    }
    (0..4)
        .map(|k| {
            let column: Vec<f64> = runs.iter().map(|r| r.metrics[k]).collect();
            let (mean, stderr) = mean_stderr(&column).expect("non-empty");
            MetricStat { mean, stderr }
        })
        .collect()
}

/// Per-sample mean and standard error of the magnetization. The field axis is
/// taken from the first run given.
pub fn loop_mean(runs: &[FinishedRun]) -> Option<Vec<LoopPoint>> {
    let first = runs.first()?;
    let steps = first.h_values.len();
    let mut column = Vec::with_capacity(runs.len());
    let points = (0..steps)
        .map(|i| {
            column.clear();
            column.extend(runs.iter().map(|r| r.m_values.get(i).copied().unwrap_or(0.0)));
            let (m_mean, m_stderr) = mean_stderr(&column).expect("non-empty");
            LoopPoint { h: first.h_values[i], m_mean, m_stderr }
        })
        .collect();
    Some(points)
}

/// Averaged loop as CSV followed by a blank line and the metric table.
pub fn export_csv(runs: &[FinishedRun]) -> Option<String> {
    let points = loop_mean(runs)?;
    let mut out = String::from("H,M_mean,M_stderr\n");
    for p in &points {
        let _ = writeln!(out, "{},{},{}", p.h, p.m_mean, p.m_stderr);
    }
    out.push('\n');
    out.push_str("metric,mean,stderr\n");
    for (name, s) in METRIC_NAMES.iter().zip(res_sum(runs)) {
        let _ = writeln!(out, "{name},{},{}", s.mean, s.stderr);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(id: u32, m: &[f64], metrics: [f64; 4]) -> FinishedRun {
        FinishedRun {
            run_id: id,
            h_values: (0..m.len()).map(|i| i as f64).collect(),
            m_values: m.to_vec(),
            metrics,
        }
    }

    #[test]
    fn metric_stats_hand_computed() {
        let runs = [
            run(0, &[1.0], [1.0, 4.0, 0.0, 0.0]),
            run(1, &[1.0], [2.0, 4.0, 0.0, 0.0]),
            run(2, &[1.0], [3.0, 4.0, 0.0, 0.0]),
        ];
        let s = res_sum(&runs);
        assert_eq!(s.len(), 4);
        assert_eq!(s[0].mean, 2.0);
        assert!((s[0].stderr - 0.577_350_269_189_625_8).abs() < 1e-15);
        assert_eq!(s[1], MetricStat { mean: 4.0, stderr: 0.0 });
    }

    #[test]
    fn single_run_has_zero_stderr() {
        let runs = [run(0, &[1.0, -1.0], [0.4, 4.2, -1.7, 2.5])];
        assert!(res_sum(&runs).iter().all(|s| s.stderr == 0.0));
        let pts = loop_mean(&runs).unwrap();
        assert_eq!(pts[1], LoopPoint { h: 1.0, m_mean: -1.0, m_stderr: 0.0 });
    }

    #[test]
    fn empty() {
        assert!(res_sum(&[]).is_empty());
        assert!(loop_mean(&[]).is_none());
        assert!(export_csv(&[]).is_none());
    }

    #[test]
    fn csv_layout() {
        let runs = [run(0, &[1.0, 0.5, -1.0, 0.25], [0.5, 4.0, -1.5, 2.5])];
        let csv = export_csv(&runs).unwrap();
        assert_eq!(
            csv,
            "H,M_mean,M_stderr\n0,1,0\n1,0.5,0\n2,-1,0\n3,0.25,0\n\nmetric,mean,stderr\n\
             exchange_bias,0.5,0\ncoercivity,4,0\nh_cross_desc,-1.5,0\nh_cross_asc,2.5,0\n"
        );
    }
}
