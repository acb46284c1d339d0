//! Lebesgue norms on the box.
//!
//! `p = 2` uses the trapezoid rule, which equals the Parseval sum for
//! trigonometric polynomials. Other finite `p` use the same grid quadrature
//! and are therefore only approximations of the continuous norm. `p = inf`
//! is the maximum over grid samples. Sums run sequentially in index order so
//! results are reproducible bit for bit.

use super::field::RealField;
use crate::error::{BmlError, Result};

/// Validated Lebesgue exponent in `[1, inf]`.
pub fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && !p.is_nan() {
        Ok(())
    } else {
        Err(BmlError::param("p", format!("Lebesgue index must lie in [1, inf], got {p}")))
    }
}

fn lp_from_magnitudes(magnitudes: impl Iterator<Item = f64>, p: f64, cell_area: f64) -> f64 {
    if p.is_infinite() {
        return magnitudes.fold(0.0, f64::max);
    }
    if p == 1.0 {
        return magnitudes.sum::<f64>() * cell_area;
    }
    if p == 2.0 {
        return (magnitudes.map(|a| a * a).sum::<f64>() * cell_area).sqrt();
    }
    // scale by the max to keep large exponents in range
    let values: Vec<f64> = magnitudes.collect();
    let peak = values.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|a| (a / peak).powf(p)).sum();
    peak * (sum * cell_area).powf(1.0 / p)
}

pub fn lp_norm(f: &RealField, p: f64) -> f64 {
    lp_from_magnitudes(f.values().iter().map(|v| v.abs()), p, f.grid().cell_area())
}

/// `L^p` norm of the pointwise Euclidean length of a vector field.
pub fn lp_norm_vector(components: &[&RealField], p: f64) -> f64 {
    let first = components[0];
    let len = first.values().len();
    let cell = first.grid().cell_area();
    let magnitudes = (0..len).map(|i| {
        components
            .iter()
            .map(|c| c.values()[i] * c.values()[i])
            .sum::<f64>()
            .sqrt()
    });
    lp_from_magnitudes(magnitudes, p, cell)
}

pub fn l2_norm(f: &RealField) -> f64 {
    lp_norm(f, 2.0)
}

pub fn linf_norm(f: &RealField) -> f64 {
    f.max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn constant_norms() {
        let g = Grid::new(16, 2.0).unwrap();
        let f = RealField::constant(g, -3.0, "c");
        assert!((lp_norm(&f, 1.0) - 48.0).abs() < 1e-12);
        assert!((lp_norm(&f, 2.0) - 12.0).abs() < 1e-12);
        assert!((lp_norm(&f, 3.0) - 3.0 * 16f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(lp_norm(&f, f64::INFINITY), 3.0);
    }

    #[test]
    fn l2_matches_parseval() {
        let g = Grid::new(32, 1.0).unwrap();
        let f = RealField::from_fn(g, "f", |x, y| (PI * x).sin() + 0.5 * (3.0 * PI * y).cos());
        let spectral = f.to_spectral().unwrap().l2_norm();
        assert!((l2_norm(&f) - spectral).abs() < 1e-12 * spectral);
    }

    #[test]
    fn vector_norm_is_pointwise_euclidean() {
        let g = Grid::new(8, 1.0).unwrap();
        let a = RealField::constant(g, 3.0, "a");
        let b = RealField::constant(g, 4.0, "b");
        assert_eq!(lp_norm_vector(&[&a, &b], f64::INFINITY), 5.0);
        assert!((lp_norm_vector(&[&a, &b], 2.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_validation() {
        assert!(check_exponent(0.5).is_err());
        assert!(check_exponent(f64::NAN).is_err());
        assert!(check_exponent(f64::INFINITY).is_ok());
    }
}
