//! Smooth dyadic partition of unity on the box lattice.
//!
//! The radial variable is the physical wavenumber `|k|`. With the smooth step
//! `h(x) = e(x) / (e(x) + e(1 - x))`, `e(x) = exp(-1/x)` for `x > 0`,
//!
//! ```text
//! chi(r) = 1 - h((r - 3/4) / (4/3 - 3/4))     // 1 on [0, 3/4], 0 beyond 4/3
//! phi(r) = chi(r / 2) - chi(r)                // supported in [3/4, 8/3]
//! ```
//!
//! The shell multipliers telescope: `chi + sum_{j<=J} phi(2^-j .) = chi(2^-(J+1) .)`.
//! `J` is the largest `j` with `(3/4) 2^j` below the corner wavenumber of the
//! lattice, so the partition covers every representable mode.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{BmlError, Result};
use crate::spectral::Grid;

const INNER: f64 = 0.75;
const OUTER: f64 = 4.0 / 3.0;

fn bump_edge(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// `C^inf` step rising from 0 at `x <= 0` to 1 at `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = bump_edge(x);
    a / (a + bump_edge(1.0 - x))
}

/// Low-pass profile, supported in `|xi| <= 4/3`.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - INNER) / (OUTER - INNER))
}

/// Annular profile, supported in `3/4 <= |xi| <= 8/3`.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// Outer radius of the support of shell `j` (`j = -1` is the low-pass block).
pub fn shell_outer_radius(j: i32) -> f64 {
    if j < 0 {
        OUTER
    } else {
        2.0 * OUTER * 2f64.powi(j)
    }
}

pub fn shell_inner_radius(j: i32) -> f64 {
    if j < 0 {
        0.0
    } else {
        INNER * 2f64.powi(j)
    }
}

/// Multiplier of `Delta_j` at radius `r`.
pub fn shell_profile(j: i32, r: f64) -> f64 {
    if j < 0 {
        chi(r)
    } else {
        phi(r / 2f64.powi(j))
    }
}

#[derive(Debug)]
pub struct DyadicPartition {
    grid: Grid,
    j_max: i32,
    /// `multipliers[j + 1][mode]`
    multipliers: Vec<Vec<f64>>,
}

fn cache() -> &'static Mutex<HashMap<(usize, u64), Arc<DyadicPartition>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<DyadicPartition>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl DyadicPartition {
    /// Partition for `grid`, built once per grid and shared.
    pub fn for_grid(grid: &Grid) -> Result<Arc<DyadicPartition>> {
        if grid.n() < 16 {
            return Err(BmlError::InvalidGrid(format!(
                "n = {} leaves no room for annular shells; need n >= 16",
                grid.n()
            )));
        }
        let key = (grid.n(), grid.half_length().to_bits());
        let mut map = cache().lock().expect("partition cache poisoned");
        Ok(map
            .entry(key)
            .or_insert_with(|| Arc::new(DyadicPartition::build(*grid)))
            .clone())
    }

    fn build(grid: Grid) -> DyadicPartition {
        let corner = grid.max_wavenumber();
        let mut j_max = -1;
        while INNER * 2f64.powi(j_max + 1) < corner {
            j_max += 1;
        }
        let n = grid.n();
        let radii: Vec<f64> = (0..n * n)
            .map(|idx| grid.k_squared(idx / n, idx % n).sqrt())
            .collect();
        let multipliers = (-1..=j_max)
            .map(|j| radii.iter().map(|&r| shell_profile(j, r)).collect())
            .collect();
        DyadicPartition {
            grid,
            j_max,
            multipliers,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Shell indices `-1 ..= j_max`.
    pub fn indices(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.j_max
    }

    /// Per-mode multiplier of `Delta_j`; empty shells outside the range are zero.
    pub fn multiplier(&self, j: i32) -> Option<&[f64]> {
        if j < -1 || j > self.j_max {
            None
        } else {
            Some(&self.multipliers[(j + 1) as usize])
        }
    }

    /// Largest deviation of `sum_j multiplier_j` from 1 over the lattice.
    pub fn partition_defect(&self) -> f64 {
        let len = self.grid.len();
        (0..len)
            .map(|m| {
                let total: f64 = self.multipliers.iter().map(|row| row[m]).sum();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}
