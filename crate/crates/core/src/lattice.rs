/// Treatment of sites on the lattice edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Missing neighbors contribute nothing.
    #[default]
    Free,
    /// Opposite edges are neighbors.
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "free" => Ok(Boundary::Free),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(format!("unknown boundary `{other}` (expected free or periodic)")),
        }
    }
}

/// `n x n` grid of +1/-1 spins stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinLattice {
    n: usize,
    boundary: Boundary,
    spins: Vec<i8>,
}

impl SpinLattice {
    /// Positively saturated lattice.
    pub fn saturated(n: usize, boundary: Boundary) -> Self {
        SpinLattice {
            n,
            boundary,
            spins: vec![1; n * n],
        }
    }

    /// Builds a lattice from row-major spins.
    ///
    /// Panics if the length is not `n * n` or a value is not +1/-1.
    pub fn from_spins(n: usize, boundary: Boundary, spins: Vec<i8>) -> Self {
        assert_eq!(spins.len(), n * n, "spin vector length must be n*n");
        assert!(
            spins.iter().all(|&s| s == 1 || s == -1),
            "spins must be +1 or -1"
        );
        SpinLattice { n, boundary, spins }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.spins[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, spin: i8) {
        assert!(spin == 1 || spin == -1, "spins must be +1 or -1");
        let k = self.index(i, j);
        self.spins[k] = spin;
    }

    #[inline]
    pub(crate) fn flip_at(&mut self, k: usize) {
        self.spins[k] = -self.spins[k];
    }

    #[inline]
    pub(crate) fn at(&self, k: usize) -> i8 {
        self.spins[k]
    }

    /// Flat indices of the nearest neighbors of `k` under the lattice boundary.
    pub fn neighbors(&self, k: usize) -> Neighbors {
        let n = self.n;
        let (i, j) = (k / n, k % n);
        let mut out = Neighbors::default();
        match self.boundary {
            Boundary::Free => {
                if j > 0 {
                    out.push(k - 1);
                }
                if j + 1 < n {
                    out.push(k + 1);
                }
                if i > 0 {
                    out.push(k - n);
                }
                if i + 1 < n {
                    out.push(k + n);
                }
            }
            Boundary::Periodic => {
                out.push(i * n + (j + n - 1) % n);
                out.push(i * n + (j + 1) % n);
                out.push(((i + n - 1) % n) * n + j);
                out.push(((i + 1) % n) * n + j);
            }
        }
        out
    }

    /// Sum of all spins; `magnetization() * n^2`.
    pub fn spin_sum(&self) -> i64 {
        self.spins.iter().map(|&s| s as i64).sum()
    }
}

/// Up to four neighbor indices without allocating.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neighbors {
    idx: [usize; 4],
    len: usize,
}

impl Neighbors {
    fn push(&mut self, k: usize) {
        self.idx[self.len] = k;
        self.len += 1;
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.idx[..self.len]
    }
}

/// Mean spin, `sum(S) / n^2`.
pub fn magnetization(lattice: &SpinLattice) -> f64 {
    lattice.spin_sum() as f64 / lattice.spins.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturated_magnetization_is_one() {
        assert_eq!(magnetization(&SpinLattice::saturated(70, Boundary::Free)), 1.0);
    }

    #[test]
    fn half_and_half_is_zero() {
        let n = 6;
        let spins = (0..n * n).map(|k| if k < n * n / 2 { 1 } else { -1 }).collect();
        assert_eq!(magnetization(&SpinLattice::from_spins(n, Boundary::Free, spins)), 0.0);
    }

    #[test]
    fn partial_flip_70() {
        let n = 70;
        let spins = (0..n * n).map(|k| if k < 2500 { -1 } else { 1 }).collect();
        let m = magnetization(&SpinLattice::from_spins(n, Boundary::Free, spins));
        assert_eq!(m, -100.0 / 4900.0);
        assert!((m + 0.020408).abs() < 1e-6);
    }

    #[test]
    fn neighbor_counts() {
        let free = SpinLattice::saturated(4, Boundary::Free);
        assert_eq!(free.neighbors(0).as_slice().len(), 2);
        assert_eq!(free.neighbors(1).as_slice().len(), 3);
        assert_eq!(free.neighbors(5).as_slice().len(), 4);
        let per = SpinLattice::saturated(4, Boundary::Periodic);
        let mut nb = per.neighbors(0).as_slice().to_vec();
        nb.sort();
        assert_eq!(nb, vec![1, 3, 4, 12]);
    }

    #[test]
    #[should_panic]
    fn rejects_non_spin_values() {
        SpinLattice::from_spins(2, Boundary::Free, vec![1, 0, 1, -1]);
    }
}
