use crate::error::{Error, Result};
use std::f64::consts::PI;

/// The periodic lattice torus with `2N` points and mesh `h = pi/N`.
///
/// Points are `x = h*j` for `j = -N, ..., N-1`; the dual group is the index
/// set `k = -N, ..., N-1`. Arrays over either are stored with offset `N`,
/// i.e. slot `i` holds position/frequency `i - N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LatticeGrid {
    n: usize,
}

impl LatticeGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("grid needs N >= 1".into()));
        }
        Ok(LatticeGrid { n })
    }

    /// Half the particle count, `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points, `2N`.
    pub fn points(&self) -> usize {
        2 * self.n
    }

    /// Mesh size `h = pi/N`.
    pub fn h(&self) -> f64 {
        PI / self.n as f64
    }

    /// Position of slot `i`: `x_i = h*(i - N)` in `[-pi, pi)`.
    pub fn x_at(&self, i: usize) -> f64 {
        self.h() * (i as f64 - self.n as f64)
    }

    /// Frequency stored in slot `i`: `k_i = i - N`.
    pub fn mode_at(&self, i: usize) -> i64 {
        i as i64 - self.n as i64
    }

    /// Slot of frequency `k` (caller guarantees `-N <= k < N`).
    pub fn index_of(&self, k: i64) -> usize {
        (k + self.n as i64) as usize
    }

    pub fn contains_mode(&self, k: i64) -> bool {
        -(self.n as i64) <= k && k < self.n as i64
    }

    /// Dual indices `-N, ..., N-1` in storage order.
    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let n = self.n as i64;
        -n..n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_times_points_is_two_pi() {
        for n in [1, 2, 4, 7, 64, 256] {
            let g = LatticeGrid::new(n).unwrap();
            assert!((g.h() * g.points() as f64 - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn mode_layout_is_symmetric_except_nyquist() {
        let g = LatticeGrid::new(4).unwrap();
        let modes: Vec<i64> = g.modes().collect();
        assert_eq!(modes, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        assert_eq!(modes.len(), g.points());
        for k in 1..4 {
            assert!(g.contains_mode(k) && g.contains_mode(-k));
        }
        // the Nyquist index -N is unpaired
        assert!(g.contains_mode(-4) && !g.contains_mode(4));
        assert_eq!(g.index_of(g.mode_at(3)), 3);
    }

    #[test]
    fn zero_n_rejected() {
        assert!(LatticeGrid::new(0).is_err());
    }
}
