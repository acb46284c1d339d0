use num_complex::Complex64;

use super::fft;
use super::grid::Grid;
use crate::error::{BmlError, Result};

/// Real samples on a [`Grid`], stored row-major with the x1 index first.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
    label: String,
}

/// Fourier coefficients of a real field, normalized so that a constant
/// field `c` has coefficient `c` at `k = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coefficients: Vec<Complex64>,
}

impl RealField {
    pub fn new(grid: Grid, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(BmlError::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(RealField {
            grid,
            values,
            label: label.into(),
        })
    }

    pub fn zeros(grid: Grid, label: impl Into<String>) -> Self {
        RealField {
            grid,
            values: vec![0.0; grid.len()],
            label: label.into(),
        }
    }

    pub fn constant(grid: Grid, value: f64, label: impl Into<String>) -> Self {
        RealField {
            grid,
            values: vec![value; grid.len()],
            label: label.into(),
        }
    }

    /// Samples `f(x1, x2)` at every node.
    pub fn from_fn(grid: Grid, label: impl Into<String>, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i1 in 0..n {
            let x1 = grid.node(i1);
            for i2 in 0..n {
                values.push(f(x1, grid.node(i2)));
            }
        }
        RealField {
            grid,
            values,
            label: label.into(),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[self.grid.index(i1, i2)]
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(BmlError::NonFinite(format!("field `{}`", self.label)))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Box integral by the trapezoid rule (exact for trigonometric polynomials).
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            label: self.label.clone(),
        }
    }

    pub fn zip_with(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> Result<RealField> {
        self.grid.ensure_same(&other.grid)?;
        Ok(RealField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            label: self.label.clone(),
        })
    }

    pub fn add(&self, other: &RealField) -> Result<RealField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RealField) -> Result<RealField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &RealField) -> Result<RealField> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> RealField {
        self.map(|v| c * v)
    }

    /// Forward transform; rejects non-finite samples.
    pub fn to_spectral(&self) -> Result<SpectralField> {
        self.ensure_finite()?;
        Ok(self.to_spectral_unchecked())
    }

    pub(crate) fn to_spectral_unchecked(&self) -> SpectralField {
        let mut data: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::plan(self.grid.n()).forward(&mut data);
        let norm = 1.0 / self.grid.len() as f64;
        for c in &mut data {
            *c *= norm;
        }
        SpectralField {
            grid: self.grid,
            coefficients: data,
        }
    }
}

impl SpectralField {
    pub fn new(grid: Grid, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(BmlError::InvalidInput(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coefficients.len()
            )));
        }
        Ok(SpectralField { grid, coefficients })
    }

    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            coefficients: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    #[inline]
    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize) -> Complex64 {
        self.coefficients[self.grid.index(i1, i2)]
    }

    /// Inverse transform, keeping the real part.
    pub fn to_real(&self, label: impl Into<String>) -> RealField {
        let mut data = self.coefficients.clone();
        fft::plan(self.grid.n()).inverse(&mut data);
        RealField {
            grid: self.grid,
            values: data.into_iter().map(|c| c.re).collect(),
            label: label.into(),
        }
    }

    /// Applies a real multiplier `m(i1, i2)` to every coefficient.
    pub fn map_modes(&self, m: impl Fn(usize, usize) -> f64) -> SpectralField {
        let n = self.grid.n();
        let mut out = self.coefficients.clone();
        for i1 in 0..n {
            for i2 in 0..n {
                out[i1 * n + i2] *= m(i1, i2);
            }
        }
        SpectralField {
            grid: self.grid,
            coefficients: out,
        }
    }

    /// Applies a complex multiplier to every coefficient.
    pub fn map_modes_complex(&self, m: impl Fn(usize, usize) -> Complex64) -> SpectralField {
        let n = self.grid.n();
        let mut out = self.coefficients.clone();
        for i1 in 0..n {
            for i2 in 0..n {
                out[i1 * n + i2] *= m(i1, i2);
            }
        }
        SpectralField {
            grid: self.grid,
            coefficients: out,
        }
    }

    /// Spectral partial derivative along `axis` (0 for x1, 1 for x2).
    pub fn partial(&self, axis: usize) -> SpectralField {
        let g = self.grid;
        self.map_modes_complex(|i1, i2| {
            let k = if axis == 0 {
                g.derivative_wavenumber(i1)
            } else {
                g.derivative_wavenumber(i2)
            };
            Complex64::new(0.0, k)
        })
    }

    pub fn laplacian(&self) -> SpectralField {
        let g = self.grid;
        self.map_modes(|i1, i2| -g.k_squared(i1, i2))
    }

    /// `(-Delta)^{-1}` on the mean-zero subspace; the `k = 0` mode is set to zero.
    pub fn inverse_neg_laplacian(&self) -> SpectralField {
        let g = self.grid;
        self.map_modes(|i1, i2| {
            let k2 = g.k_squared(i1, i2);
            if k2 == 0.0 {
                0.0
            } else {
                1.0 / k2
            }
        })
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.ensure_same(&other.grid)?;
        Ok(SpectralField {
            grid: self.grid,
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.ensure_same(&other.grid)?;
        Ok(SpectralField {
            grid: self.grid,
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coefficients: self.coefficients.iter().map(|z| z * c).collect(),
        }
    }

    /// `sum |F_k|^2`, i.e. the mean of `f^2` over the box.
    pub fn power(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `||f||_{L^2(box)}` from the coefficients (Parseval).
    pub fn l2_norm(&self) -> f64 {
        (self.grid.area() * self.power()).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.coefficients[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.coefficients.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Drops `k = 0` so the field has zero mean.
    pub fn without_mean(&self) -> SpectralField {
        let mut out = self.clone();
        out.coefficients[0] = Complex64::new(0.0, 0.0);
        out
    }

    /// Coefficients restricted (or zero-extended) to another grid with the
    /// same box. Exact for fields band-limited below both Nyquist limits.
    pub fn resample(&self, target: Grid) -> Result<SpectralField> {
        if target.half_length() != self.grid.half_length() {
            return Err(BmlError::GridMismatch);
        }
        let src = self.grid;
        let limit = (src.n().min(target.n()) / 2) as i64;
        let mut out = SpectralField::zeros(target);
        let tn = target.n() as i64;
        for i1 in 0..src.n() {
            let m1 = src.wave_index(i1);
            if m1.abs() >= limit {
                continue;
            }
            for i2 in 0..src.n() {
                let m2 = src.wave_index(i2);
                if m2.abs() >= limit {
                    continue;
                }
                let t1 = m1.rem_euclid(tn) as usize;
                let t2 = m2.rem_euclid(tn) as usize;
                out.coefficients[target.index(t1, t2)] = self.at(i1, i2);
            }
        }
        Ok(out)
    }
}
