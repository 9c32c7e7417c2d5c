//! Ensemble statistics.

/// Mean and standard error of the mean, using the `N - 1` sample standard
/// deviation. A single sample has standard error 0; an empty slice has no
/// statistics.
pub fn mean_stderr(samples: &[f64]) -> Option<(f64, f64)> {
    let n = samples.len();
    if n == 0 {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Some((mean, 0.0));
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    Some((mean, (var / n as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed() {
        let (mean, se) = mean_stderr(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(mean, 2.0);
        assert!((se - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((se - 0.57735).abs() < 1e-5);
    }

    #[test]
    fn degenerate() {
        assert_eq!(mean_stderr(&[]), None);
        assert_eq!(mean_stderr(&[4.5]), Some((4.5, 0.0)));
        assert_eq!(mean_stderr(&[2.0, 2.0]), Some((2.0, 0.0)));
    }
}
