use std::sync::Arc;

use super::partition::DyadicPartition;
use crate::error::{BmlError, Result};
use crate::spectral::norms::{check_exponent, lp_norm_vector};
use crate::spectral::{RealField, SpectralField};

/// Littlewood-Paley blocks of a field, `j = -1 ..= j_max`.
#[derive(Clone, Debug)]
pub struct ShellDecomposition {
    source: RealField,
    shells: Vec<(i32, RealField)>,
}

impl ShellDecomposition {
    pub fn source(&self) -> &RealField {
        &self.source
    }

    pub fn shells(&self) -> &[(i32, RealField)] {
        &self.shells
    }

    /// `Delta_j f`, or `None` when `j` lies outside the representable range.
    pub fn shell(&self, j: i32) -> Option<&RealField> {
        self.shells.iter().find(|(k, _)| *k == j).map(|(_, f)| f)
    }

    pub fn reconstruct(&self) -> RealField {
        let mut out = RealField::zeros(*self.source.grid(), self.source.label());
        for (_, s) in &self.shells {
            for (o, v) in out.values_mut().iter_mut().zip(s.values()) {
                *o += v;
            }
        }
        out
    }
}

pub(crate) fn shell_spectrum(spectrum: &SpectralField, partition: &DyadicPartition, j: i32) -> SpectralField {
    match partition.multiplier(j) {
        Some(m) => {
            let mut out = spectrum.clone();
            for (c, w) in out.coefficients_mut().iter_mut().zip(m) {
                *c *= *w;
            }
            out
        }
        None => SpectralField::zeros(*spectrum.grid()),
    }
}

/// `S_j f = sum_{k <= j - 1} Delta_k f`, applied in spectral space.
pub(crate) fn low_pass_spectrum(spectrum: &SpectralField, partition: &DyadicPartition, j: i32) -> SpectralField {
    let mut weights = vec![0.0; spectrum.grid().len()];
    for k in -1..j {
        if let Some(m) = partition.multiplier(k) {
            for (w, x) in weights.iter_mut().zip(m) {
                *w += x;
            }
        }
    }
    let mut out = spectrum.clone();
    for (c, w) in out.coefficients_mut().iter_mut().zip(&weights) {
        *c *= *w;
    }
    out
}

pub fn decompose(f: &RealField, partition: &DyadicPartition) -> Result<ShellDecomposition> {
    f.grid().ensure_same(partition.grid())?;
    let spectrum = f.to_spectral()?;
    let shells = partition
        .indices()
        .map(|j| {
            let s = shell_spectrum(&spectrum, partition, j).to_real(format!("{}_shell{j}", f.label()));
            (j, s)
        })
        .collect();
    Ok(ShellDecomposition {
        source: f.clone(),
        shells,
    })
}

/// Decomposes `f` with the cached partition of its grid.
pub fn decompose_default(f: &RealField) -> Result<ShellDecomposition> {
    let p = DyadicPartition::for_grid(f.grid())?;
    decompose(f, &p)
}

/// `(s, p, r)` of an inhomogeneous Besov norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        let bp = BesovParams { s, p, r };
        bp.validate()?;
        Ok(bp)
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p)?;
        if !(self.r >= 1.0) {
            return Err(BmlError::param("r", format!("summation index must lie in [1, inf], got {}", self.r)));
        }
        if !(-2.0..=4.0).contains(&self.s) {
            return Err(BmlError::param("s", format!("regularity must lie in [-2, 4], got {}", self.s)));
        }
        Ok(())
    }
}

/// `||Delta_j f||_{L^p}` for every shell of a scalar or vector field
/// (pointwise Euclidean length for vectors).
pub fn shell_norms(components: &[&RealField], p: f64) -> Result<Vec<(i32, f64)>> {
    check_exponent(p)?;
    let grid = *components[0].grid();
    for c in components {
        c.grid().ensure_same(&grid)?;
    }
    let partition = DyadicPartition::for_grid(&grid)?;
    let spectra: Vec<SpectralField> = components.iter().map(|c| c.to_spectral()).collect::<Result<_>>()?;
    Ok(shell_norms_spectral(&spectra, &partition, p))
}

pub(crate) fn shell_norms_spectral(spectra: &[SpectralField], partition: &Arc<DyadicPartition>, p: f64) -> Vec<(i32, f64)> {
    partition
        .indices()
        .map(|j| {
            let blocks: Vec<RealField> = spectra
                .iter()
                .map(|s| shell_spectrum(s, partition, j).to_real("shell"))
                .collect();
            let refs: Vec<&RealField> = blocks.iter().collect();
            (j, lp_norm_vector(&refs, p))
        })
        .collect()
}

pub(crate) fn combine(norms: &[(i32, f64)], s: f64, r: f64) -> f64 {
    let weighted = norms.iter().map(|&(j, x)| 2f64.powf(j as f64 * s) * x);
    if r.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else {
        weighted.map(|w| w.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

pub fn besov_norm(f: &RealField, bp: BesovParams) -> Result<f64> {
    besov_norm_vector(&[f], bp)
}

/// Besov norm of a vector field with the pointwise Euclidean length inside `L^p`.
pub fn besov_norm_vector(components: &[&RealField], bp: BesovParams) -> Result<f64> {
    bp.validate()?;
    Ok(combine(&shell_norms(components, bp.p)?, bp.s, bp.r))
}

/// Besov norm of a field given by its coefficients.
pub(crate) fn besov_norm_spectral(spectrum: &SpectralField, bp: BesovParams) -> Result<f64> {
    bp.validate()?;
    let partition = DyadicPartition::for_grid(spectrum.grid())?;
    let norms = shell_norms_spectral(std::slice::from_ref(spectrum), &partition, bp.p);
    Ok(combine(&norms, bp.s, bp.r))
}

/// The sequence `2^{k(1-s)} sqrt(k+2) ||Delta_k f||_{L^p}`.
pub fn weighted_shell_sequence(f: &RealField, s: f64, p: f64) -> Result<Vec<(i32, f64)>> {
    if !(s > 0.0 && s < 1.0) {
        return Err(BmlError::param("s", format!("weighted sup needs s in ]0,1[, got {s}")));
    }
    Ok(shell_norms(&[f], p)?
        .into_iter()
        .map(|(k, x)| (k, 2f64.powf(k as f64 * (1.0 - s)) * ((k + 2) as f64).sqrt() * x))
        .collect())
}

/// `sup_{k >= -1} 2^{k(1-s)} sqrt(k+2) ||Delta_k f||_{L^p}`.
pub fn weighted_sup(f: &RealField, s: f64, p: f64) -> Result<f64> {
    Ok(weighted_shell_sequence(f, s, p)?
        .into_iter()
        .fold(0.0, |m, (_, x)| m.max(x)))
}
