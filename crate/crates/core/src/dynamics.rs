use std::collections::VecDeque;

use rand::seq::SliceRandom;

use crate::disorder::DisorderRealization;
use crate::error::{Error, Result};
use crate::lattice::SpinLattice;
use crate::rng::rng_from_seed;

/// Flip budget per site before relaxation is declared stuck.
const FLIP_CAP_PER_SITE: u64 = 10_000;

/// Total field on site `(i, j)`: each neighbor's spin weighted by that
/// neighbor's exchange constant, plus the site's random field and `h_ext`.
///
/// Panics on an out-of-range index.
pub fn local_field(
    lattice: &SpinLattice,
    disorder: &DisorderRealization,
    h_ext: f64,
    i: usize,
    j: usize,
) -> f64 {
    let n = lattice.n();
    assert!(i < n && j < n, "site ({i}, {j}) outside {n}x{n} lattice");
    field_at(lattice, disorder, h_ext, lattice.index(i, j))
}

#[inline]
fn field_at(lattice: &SpinLattice, disorder: &DisorderRealization, h_ext: f64, k: usize) -> f64 {
    let jmap = disorder.jmap();
    let exchange: f64 = lattice
        .neighbors(k)
        .as_slice()
        .iter()
        .map(|&nb| jmap[nb] * lattice.at(nb) as f64)
        .sum();
    exchange + disorder.grf()[k] + h_ext
}

/// A zero field never destabilizes a spin.
#[inline]
fn unstable(lattice: &SpinLattice, disorder: &DisorderRealization, h_ext: f64, k: usize) -> bool {
    field_at(lattice, disorder, h_ext, k) * f64::from(lattice.at(k)) < 0.0
}

/// Visiting strategy for [`relax_with_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxOrder {
    /// Raster scan seeding a FIFO worklist of destabilized sites.
    Raster,
    /// Repeated sweeps over a fresh random permutation of the sites until a
    /// sweep makes no flip.
    Shuffled(u64),
}

/// Flips misaligned spins until the lattice is stable at `h_ext`. Returns the
/// number of flips.
pub fn relax(lattice: &mut SpinLattice, disorder: &DisorderRealization, h_ext: f64) -> Result<u64> {
    relax_with_order(lattice, disorder, h_ext, RelaxOrder::Raster)
}

pub fn relax_with_order(
    lattice: &mut SpinLattice,
    disorder: &DisorderRealization,
    h_ext: f64,
    order: RelaxOrder,
) -> Result<u64> {
    debug_assert_eq!(lattice.n(), disorder.n());
    let cap = (lattice.spins().len() as u64).saturating_mul(FLIP_CAP_PER_SITE);
    match order {
        RelaxOrder::Raster => relax_worklist(lattice, disorder, h_ext, cap),
        RelaxOrder::Shuffled(seed) => relax_shuffled(lattice, disorder, h_ext, cap, seed),
    }
}

fn relax_worklist(
    lattice: &mut SpinLattice,
    disorder: &DisorderRealization,
    h_ext: f64,
    cap: u64,
) -> Result<u64> {
    let sites = lattice.spins().len();
    let mut queued = vec![false; sites];
    let mut work = VecDeque::new();
    for (k, q) in queued.iter_mut().enumerate() {
        if unstable(lattice, disorder, h_ext, k) {
            *q = true;
            work.push_back(k);
        }
    }

    let mut flips = 0u64;
    while let Some(k) = work.pop_front() {
        queued[k] = false;
        if !unstable(lattice, disorder, h_ext, k) {
            continue;
        }
        lattice.flip_at(k);
        flips += 1;
        if flips > cap {
            return Err(Error::NonConvergence { flips });
        }
        for &nb in lattice.neighbors(k).as_slice() {
            if !queued[nb] && unstable(lattice, disorder, h_ext, nb) {
                queued[nb] = true;
                work.push_back(nb);
            }
        }
    }
    Ok(flips)
}

fn relax_shuffled(
    lattice: &mut SpinLattice,
    disorder: &DisorderRealization,
    h_ext: f64,
    cap: u64,
    seed: u64,
) -> Result<u64> {
    let mut rng = rng_from_seed(seed);
    let mut order: Vec<usize> = (0..lattice.spins().len()).collect();
    let mut flips = 0u64;
    loop {
        order.shuffle(&mut rng);
        let mut sweep_flips = 0u64;
        for &k in &order {
            if unstable(lattice, disorder, h_ext, k) {
                lattice.flip_at(k);
                sweep_flips += 1;
            }
        }
        flips += sweep_flips;
        if flips > cap {
            return Err(Error::NonConvergence { flips });
        }
        if sweep_flips == 0 {
            return Ok(flips);
        }
    }
}
