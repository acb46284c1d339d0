//! Grid densities of atomic measures.
//!
//! `phi(x) = exp(-1 / (1 - |x|^2)) / MOLLIFIER_MASS` on the unit ball and
//! `phi_n(x) = n^2 phi(n x)`. Each atom's samples are rescaled so that their
//! trapezoid sum equals the atom weight exactly; the correction is the
//! quadrature error of the bump, tiny once the radius spans three cells.

use crate::error::{BmlError, Result};
use crate::spectral::{Grid, RealField};

use super::atomic::AtomicMeasure;

/// `int_{|x|<1} exp(-1 / (1 - |x|^2)) dx = pi (e^{-1} - E_1(1))`.
pub const MOLLIFIER_MASS: f64 = 0.466_512_393_178_330_068_879_556_171_895;

/// Minimum number of grid cells spanned by the mollifier radius.
pub const MIN_CELLS_PER_RADIUS: f64 = 3.0;

/// Unnormalized bump as a function of `|x|^2`.
fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Normalized mollifier `phi`.
pub fn mollifier(x: [f64; 2]) -> f64 {
    bump(x[0] * x[0] + x[1] * x[1]) / MOLLIFIER_MASS
}

/// `phi_n(x) = n^2 phi(n x)`.
pub fn scaled_mollifier(n: u32, x: [f64; 2]) -> f64 {
    let nf = n as f64;
    nf * nf * mollifier([nf * x[0], nf * x[1]])
}

#[derive(Clone, Debug)]
pub struct MollifiedDensity {
    pub source: AtomicMeasure,
    pub n: u32,
    pub field: RealField,
}

pub fn check_resolution(n: u32, grid: &Grid) -> Result<()> {
    if n == 0 {
        return Err(BmlError::param("mollify.n", "mollification parameter must be at least 1"));
    }
    let radius = 1.0 / n as f64;
    if radius < MIN_CELLS_PER_RADIUS * grid.spacing() {
        return Err(BmlError::UnderResolvedMollifier {
            radius,
            cell: grid.spacing(),
        });
    }
    if radius >= grid.half_length() {
        return Err(BmlError::param("mollify.n", "mollifier radius must be smaller than the box"));
    }
    Ok(())
}

/// Node indices (wrapped) and minimum-image offsets covering `[c - r, c + r]`.
fn window(grid: &Grid, c: f64, r: f64) -> Vec<(usize, f64)> {
    let h = grid.spacing();
    let l = grid.half_length();
    let n = grid.n() as i64;
    let lo = ((c - r + l) / h).floor() as i64;
    let hi = ((c + r + l) / h).ceil() as i64;
    (lo..=hi)
        .map(|i| {
            let idx = i.rem_euclid(n) as usize;
            let d = grid.wrap(grid.node(idx) - c);
            (idx, d)
        })
        .collect()
}

pub fn mollify(mu: &AtomicMeasure, n: u32, grid: &Grid) -> Result<MollifiedDensity> {
    check_resolution(n, grid)?;
    let nf = n as f64;
    let radius = 1.0 / nf;
    let mut values = vec![0.0; grid.len()];
    let mut local: Vec<(usize, f64)> = Vec::new();
    for atom in mu.atoms() {
        if atom.weight == 0.0 {
            continue;
        }
        let rows = window(grid, atom.position[0], radius);
        let cols = window(grid, atom.position[1], radius);
        local.clear();
        let mut mass = 0.0;
        for &(i1, d1) in &rows {
            for &(i2, d2) in &cols {
                let b = bump(nf * nf * (d1 * d1 + d2 * d2));
                if b > 0.0 {
                    local.push((grid.index(i1, i2), b));
                    mass += b;
                }
            }
        }
        if mass == 0.0 {
            return Err(BmlError::UnderResolvedMollifier {
                radius,
                cell: grid.spacing(),
            });
        }
        let scale = atom.weight / (mass * grid.cell_area());
        for &(idx, b) in &local {
            values[idx] += scale * b;
        }
    }
    Ok(MollifiedDensity {
        source: mu.clone(),
        n,
        field: RealField::new(*grid, values, "mu_density")?,
    })
}
