//! Off-grid evaluation of trigonometric interpolants.
//!
//! The value at `x` is `Re sum_m F_m exp(i k_m (x + L))`. The Nyquist column
//! contributes through `cos` only, which keeps the interpolant real and exact
//! at the nodes. Sums are separable: the inner sum runs over the contiguous
//! x2 index so each point costs `O(n^2)` multiply-adds.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::field::{RealField, SpectralField};
use super::grid::Grid;
use crate::error::{BmlError, Result};

fn phases(grid: &Grid, x: f64) -> Vec<Complex64> {
    let n = grid.n();
    let u = (x + grid.half_length()) / (2.0 * grid.half_length());
    (0..n)
        .map(|i| {
            let m = grid.wave_index(i) as f64;
            let angle = TAU * (m * u).rem_euclid(1.0);
            if grid.is_nyquist(i) {
                Complex64::new(angle.cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, angle)
            }
        })
        .collect()
}

fn check_point(p: &[f64; 2]) -> Result<()> {
    if p[0].is_finite() && p[1].is_finite() {
        Ok(())
    } else {
        Err(BmlError::NonFinite(format!("evaluation point ({}, {})", p[0], p[1])))
    }
}

/// Value and gradient of a spectral field at a point.
pub fn value_and_gradient(spectrum: &SpectralField, p: [f64; 2]) -> Result<(f64, [f64; 2])> {
    check_point(&p)?;
    let g = spectrum.grid();
    let n = g.n();
    let e1 = phases(g, p[0]);
    let e2 = phases(g, p[1]);
    let k2: Vec<f64> = (0..n).map(|i| g.derivative_wavenumber(i)).collect();
    let coeffs = spectrum.coefficients();
    let mut value = Complex64::new(0.0, 0.0);
    let mut d1 = Complex64::new(0.0, 0.0);
    let mut d2 = Complex64::new(0.0, 0.0);
    for i1 in 0..n {
        let row = &coeffs[i1 * n..(i1 + 1) * n];
        let mut s0 = Complex64::new(0.0, 0.0);
        let mut s2 = Complex64::new(0.0, 0.0);
        for i2 in 0..n {
            let t = row[i2] * e2[i2];
            s0 += t;
            s2 += t * k2[i2];
        }
        value += e1[i1] * s0;
        d1 += e1[i1] * s0 * g.derivative_wavenumber(i1);
        d2 += e1[i1] * s2;
    }
    // i k factors: Re(i z) = -Im(z)
    Ok((value.re, [-d1.im, -d2.im]))
}

pub fn value_at(spectrum: &SpectralField, p: [f64; 2]) -> Result<f64> {
    check_point(&p)?;
    let g = spectrum.grid();
    let n = g.n();
    let e1 = phases(g, p[0]);
    let e2 = phases(g, p[1]);
    let coeffs = spectrum.coefficients();
    let mut value = Complex64::new(0.0, 0.0);
    for i1 in 0..n {
        let row = &coeffs[i1 * n..(i1 + 1) * n];
        let s0: Complex64 = row.iter().zip(&e2).map(|(c, e)| c * e).sum();
        value += e1[i1] * s0;
    }
    Ok(value.re)
}

/// Spectral (trigonometric) interpolation of `f` at arbitrary points.
pub fn eval_at_points(f: &RealField, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    let spectrum = f.to_spectral()?;
    points.iter().map(|&p| value_at(&spectrum, p)).collect()
}
