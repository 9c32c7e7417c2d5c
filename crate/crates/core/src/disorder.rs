use rand::seq::index;
use rand_distr::{Distribution, Normal};

use crate::params::SimulationParams;
use crate::rng::rng_from_seed;

/// Quenched disorder of one run: the Gaussian random field and the per-site
/// exchange constants. Drawn once and held fixed for the whole loop.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    n: usize,
    grf: Vec<f64>,
    jmap: Vec<f64>,
    pinned: Vec<usize>,
}

impl DisorderRealization {
    /// Builds a realization from explicit row-major arrays.
    ///
    /// Sites whose exchange constant differs from 1 are counted as pinned.
    pub fn from_parts(n: usize, grf: Vec<f64>, jmap: Vec<f64>) -> Self {
        assert_eq!(grf.len(), n * n);
        assert_eq!(jmap.len(), n * n);
        assert!(jmap.iter().all(|&j| j > 0.0), "exchange constants must be positive");
        let pinned = jmap
            .iter()
            .enumerate()
            .filter(|(_, &j)| j != 1.0)
            .map(|(k, _)| k)
            .collect();
        DisorderRealization { n, grf, jmap, pinned }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grf(&self) -> &[f64] {
        &self.grf
    }

    pub fn jmap(&self) -> &[f64] {
        &self.jmap
    }

    /// Row-major indices of pinned sites, ascending.
    pub fn pinned_sites(&self) -> &[usize] {
        &self.pinned
    }

    pub fn pinned_count(&self) -> usize {
        self.pinned.len()
    }
}

/// Draws the random field i.i.d. from `Normal(0, sd^2)` and then picks
/// `round(dlevel * n^2)` distinct sites uniformly to carry `econst`.
pub fn generate_disorder(params: &SimulationParams) -> DisorderRealization {
    let sites = params.sites();
    let mut rng = rng_from_seed(params.seed);

    let normal = Normal::new(0.0, params.sd).expect("sd validated as finite and >= 0");
    let grf: Vec<f64> = (0..sites).map(|_| normal.sample(&mut rng)).collect();

    let mut pinned = index::sample(&mut rng, sites, params.pinned_count()).into_vec();
    pinned.sort_unstable();
    let mut jmap = vec![1.0; sites];
    for &k in &pinned {
        jmap[k] = params.econst;
    }

    DisorderRealization {
        n: params.size,
        grf,
        jmap,
        pinned,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_distribution() {
        let p = SimulationParams { sd: 0.0, dlevel: 0.0, ..Default::default() };
        let d = generate_disorder(&p);
        assert!(d.grf().iter().all(|&g| g == 0.0));
        assert!(d.jmap().iter().all(|&j| j == 1.0));
        assert_eq!(d.pinned_count(), 0);
    }

    #[test]
    fn default_pinned_count() {
        let d = generate_disorder(&SimulationParams { seed: 3, ..Default::default() });
        assert_eq!(d.pinned_count(), 490);
        assert_eq!(d.jmap().iter().filter(|&&j| j == 10.0).count(), 490);
        assert!(d.jmap().iter().all(|&j| j == 1.0 || j == 10.0));
    }

    #[test]
    fn pinning_frequency_is_uniform() {
        // 10^4 seeds on a 10x10 lattice: every site should be pinned with
        // frequency 0.10 +- 0.01.
        let mut hits = vec![0u32; 100];
        let seeds = 10_000;
        for seed in 0..seeds {
            let p = SimulationParams { size: 10, seed, ..Default::default() };
            for &k in generate_disorder(&p).pinned_sites() {
                hits[k] += 1;
            }
        }
        for (k, &h) in hits.iter().enumerate() {
            let freq = h as f64 / seeds as f64;
            assert!((freq - 0.10).abs() <= 0.01, "site {k}: {freq}");
        }
    }

    #[test]
    fn field_moments() {
        let p = SimulationParams { size: 200, sd: 1.5, seed: 11, ..Default::default() };
        let d = generate_disorder(&p);
        let n = d.grf().len() as f64;
        let mean = d.grf().iter().sum::<f64>() / n;
        let var = d.grf().iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.03, "{mean}");
        assert!((var.sqrt() - 1.5).abs() < 0.03, "{}", var.sqrt());
    }

    #[test]
    fn same_seed_same_disorder() {
        let p = SimulationParams { seed: 99, ..Default::default() };
        assert_eq!(generate_disorder(&p), generate_disorder(&p));
        let q = SimulationParams { seed: 100, ..Default::default() };
        assert_ne!(generate_disorder(&p), generate_disorder(&q));
    }
}
