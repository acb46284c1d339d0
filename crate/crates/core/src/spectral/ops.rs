use num_complex::Complex64;

use super::field::{RealField, SpectralField};
use crate::error::{BmlError, Result};

/// Relative size of the vorticity mean that [`biot_savart`] tolerates before
/// projecting it out.
pub const MEAN_TOLERANCE: f64 = 1e-8;

pub fn forward_transform(f: &RealField) -> Result<SpectralField> {
    f.to_spectral()
}

pub fn inverse_transform(spectrum: &SpectralField) -> RealField {
    spectrum.to_real("inverse")
}

pub fn gradient(f: &RealField) -> Result<(RealField, RealField)> {
    let s = f.to_spectral()?;
    Ok((
        s.partial(0).to_real(format!("d1_{}", f.label())),
        s.partial(1).to_real(format!("d2_{}", f.label())),
    ))
}

pub fn divergence(v1: &RealField, v2: &RealField) -> Result<RealField> {
    v1.grid().ensure_same(v2.grid())?;
    let d = v1.to_spectral()?.partial(0).add(&v2.to_spectral()?.partial(1))?;
    Ok(d.to_real("divergence"))
}

pub fn curl(v1: &RealField, v2: &RealField) -> Result<RealField> {
    v1.grid().ensure_same(v2.grid())?;
    let c = v2.to_spectral()?.partial(0).sub(&v1.to_spectral()?.partial(1))?;
    Ok(c.to_real("curl"))
}

pub fn laplacian(f: &RealField) -> Result<RealField> {
    Ok(f.to_spectral()?.laplacian().to_real(format!("lap_{}", f.label())))
}

/// Velocity from vorticity in spectral form: `psi = (-Delta)^{-1} omega`,
/// `v = (d2 psi, -d1 psi)`, which gives `d1 v2 - d2 v1 = omega` on mean-zero data.
pub fn biot_savart_spectral(omega: &SpectralField) -> (SpectralField, SpectralField) {
    let psi = omega.inverse_neg_laplacian();
    (psi.partial(1), psi.partial(0).scale(-1.0))
}

pub fn biot_savart(omega: &RealField) -> Result<(RealField, RealField)> {
    let spectrum = omega.to_spectral()?;
    let tolerance = MEAN_TOLERANCE * omega.max_abs();
    let mean = spectrum.mean();
    if mean.abs() > tolerance {
        return Err(BmlError::NonZeroMean { mean, tolerance });
    }
    let (v1, v2) = biot_savart_spectral(&spectrum.without_mean());
    Ok((v1.to_real("v1"), v2.to_real("v2")))
}

pub fn heat_propagator(spectrum: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(BmlError::param("t", format!("duration must be nonnegative, got {t}")));
    }
    let g = *spectrum.grid();
    Ok(spectrum.map_modes(|i1, i2| (-g.k_squared(i1, i2) * t).exp()))
}

/// Multiplies every mode by `exp(-|k|^2 t)`.
pub fn heat_propagate(f: &RealField, t: f64) -> Result<RealField> {
    let s = heat_propagator(&f.to_spectral()?, t)?;
    Ok(s.to_real(f.label().to_string()))
}

/// 2/3-rule truncation: zeroes every mode with `max(|m1|, |m2|) > K`, `K = (n - 1) / 3`.
pub fn dealias(spectrum: &SpectralField) -> SpectralField {
    let mut out = spectrum.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(spectrum: &mut SpectralField) {
    let g = *spectrum.grid();
    let cutoff = g.dealias_cutoff();
    let n = g.n();
    let zero = Complex64::new(0.0, 0.0);
    let coeffs = spectrum.coefficients_mut();
    for i1 in 0..n {
        let drop_row = g.wave_index(i1).abs() > cutoff;
        for i2 in 0..n {
            if drop_row || g.wave_index(i2).abs() > cutoff {
                coeffs[i1 * n + i2] = zero;
            }
        }
    }
}

/// Alias-free product of two fields: pointwise product followed by the 2/3 rule.
pub fn dealiased_product(a: &RealField, b: &RealField) -> Result<SpectralField> {
    let product = a.mul(b)?;
    Ok(dealias(&product.to_spectral_unchecked()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn sine_mode_has_two_conjugate_coefficients() {
        let g = Grid::new(16, 2.0).unwrap();
        let f = RealField::from_fn(g, "s", |x1, _| (PI * x1 / 2.0).sin());
        let s = forward_transform(&f).unwrap();
        let nonzero: Vec<_> = s
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 1e-13)
            .collect();
        assert_eq!(nonzero.len(), 2);
        let (a, b) = (nonzero[0].1, nonzero[1].1);
        assert!((a - b.conj()).norm() < 1e-14);
    }

    #[test]
    fn constant_lands_in_dc() {
        let g = Grid::new(8, 1.0).unwrap();
        let s = forward_transform(&RealField::constant(g, 3.5, "c")).unwrap();
        assert!((s.at(0, 0).re - 3.5).abs() < 1e-14);
        assert!(s.coefficients()[1..].iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(8, 1.0).unwrap();
        let mut f = RealField::zeros(g, "x");
        f.values_mut()[3] = f64::NAN;
        assert!(matches!(forward_transform(&f), Err(BmlError::NonFinite(_))));
    }

    #[test]
    fn single_mode_biot_savart() {
        let g = Grid::new(32, PI).unwrap();
        let omega = RealField::from_fn(g, "omega", |x1, _| x1.sin());
        let (v1, v2) = biot_savart(&omega).unwrap();
        let expected = RealField::from_fn(g, "v2", |x1, _| -x1.cos());
        assert!(v1.max_abs() < 1e-13);
        assert!(v2.sub(&expected).unwrap().max_abs() < 1e-13);
        let zero = RealField::zeros(g, "omega");
        let (z1, z2) = biot_savart(&zero).unwrap();
        assert_eq!(z1.max_abs() + z2.max_abs(), 0.0);
    }

    #[test]
    fn biot_savart_flags_mean() {
        let g = Grid::new(16, 1.0).unwrap();
        let omega = RealField::from_fn(g, "omega", |x1, _| 1.0 + (PI * x1).sin());
        assert!(matches!(biot_savart(&omega), Err(BmlError::NonZeroMean { .. })));
    }

    #[test]
    fn heat_decay_of_unit_mode() {
        let g = Grid::new(16, PI).unwrap();
        let f = RealField::from_fn(g, "f", |x1, _| x1.cos());
        let out = heat_propagate(&f, 1.0).unwrap();
        let expected = f.scale((-1.0f64).exp());
        assert!(out.sub(&expected).unwrap().max_abs() < 1e-14);
        assert_eq!(heat_propagate(&f, 0.0).unwrap().sub(&f).unwrap().max_abs() < 1e-15, true);
        assert!(heat_propagate(&f, -1.0).is_err());
    }

    #[test]
    fn laplacian_eigenfunction() {
        let g = Grid::new(32, 3.0).unwrap();
        let f = RealField::from_fn(g, "f", |x1, _| (PI * x1 / 3.0).sin());
        let lap = laplacian(&f).unwrap();
        let expected = f.scale(-(PI / 3.0).powi(2));
        assert!(lap.sub(&expected).unwrap().max_abs() < 1e-12);
        let (gx, gy) = gradient(&RealField::constant(g, 2.0, "c")).unwrap();
        assert!(gx.max_abs() < 1e-14 && gy.max_abs() < 1e-14);
    }
}
