use std::f64::consts::PI;

use crate::error::{BmlError, Result};

/// Uniform periodic grid on the box `[-L, L)^2` with `n` samples per axis.
///
/// Node `i` sits at `-L + i * 2L/n`. Spectral index `i` maps to the integer
/// wave index `m = i` for `i < n/2` and `m = i - n` otherwise, so the lattice
/// runs over `-n/2 ..= n/2 - 1` and the physical wavenumber is `m * pi / L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(BmlError::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(BmlError::InvalidGrid(format!(
                "half length L = {half_length} must be positive"
            )));
        }
        Ok(Grid { n, half_length })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Area of the whole box, `(2L)^2`.
    #[inline]
    pub fn area(&self) -> f64 {
        4.0 * self.half_length * self.half_length
    }

    /// Fundamental wavenumber `pi / L`.
    #[inline]
    pub fn base_wavenumber(&self) -> f64 {
        PI / self.half_length
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.n + i2
    }

    #[inline]
    pub fn wave_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.wave_index(i) as f64 * self.base_wavenumber()
    }

    /// Wavenumber used by odd-order derivatives: the Nyquist mode is dropped
    /// so derivatives of real fields stay real.
    #[inline]
    pub fn derivative_wavenumber(&self, i: usize) -> f64 {
        if self.is_nyquist(i) {
            0.0
        } else {
            self.wavenumber(i)
        }
    }

    #[inline]
    pub fn k_squared(&self, i1: usize, i2: usize) -> f64 {
        let k1 = self.wavenumber(i1);
        let k2 = self.wavenumber(i2);
        k1 * k1 + k2 * k2
    }

    /// Largest `|k|` on the lattice (the corner mode).
    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::SQRT_2 * (self.n / 2) as f64 * self.base_wavenumber()
    }

    /// Largest integer wave index kept by the 2/3 rule: the biggest `K` with `3K < n`.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n as i64 - 1) / 3
    }

    /// Maps a coordinate into `[-L, L)`.
    #[inline]
    pub fn wrap(&self, x: f64) -> f64 {
        let period = 2.0 * self.half_length;
        let shifted = (x + self.half_length).rem_euclid(period);
        shifted - self.half_length
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(BmlError::GridMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(4, 1.0).is_err());
        assert!(Grid::new(100, 1.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::new(64, f64::NAN).is_err());
        assert!(Grid::new(64, 2.0).is_ok());
    }

    #[test]
    fn lattice_is_symmetric() {
        let g = Grid::new(16, 3.0).unwrap();
        let mut idx: Vec<i64> = (0..16).map(|i| g.wave_index(i)).collect();
        idx.sort();
        assert_eq!(idx.first(), Some(&-8));
        assert_eq!(idx.last(), Some(&7));
        for m in 1..8 {
            assert!(idx.contains(&m) && idx.contains(&-m));
        }
        assert_eq!(g.derivative_wavenumber(8), 0.0);
    }

    #[test]
    fn dealias_cutoff_matches_three_halves_rule() {
        for n in [8usize, 16, 32, 64, 128, 256] {
            let g = Grid::new(n, 1.0).unwrap();
            let k = g.dealias_cutoff();
            assert!(3 * k < n as i64 && 3 * (k + 1) >= n as i64);
        }
    }

    #[test]
    fn wrap_is_periodic() {
        let g = Grid::new(8, 2.0).unwrap();
        assert!((g.wrap(2.5) - (-1.5)).abs() < 1e-15);
        assert!((g.wrap(-2.5) - 1.5).abs() < 1e-15);
        assert_eq!(g.wrap(-2.0), -2.0);
    }
}
