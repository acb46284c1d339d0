//! Inverse flow Jacobian by the series `A = sum_{k<=K} (-(G - Id))^k`,
//! valid while the integrated smallness stays at most 1/2.

use serde::Serialize;

use super::flow::FlowMap;
use crate::error::{BmlError, Result};
use crate::velocity::{mat_mul, operator_norm, Mat2, IDENTITY};

pub const DEFAULT_TERMS: usize = 32;

/// Largest integrated smallness accepted by the series.
pub const SMALLNESS_LIMIT: f64 = 0.5;

#[derive(Clone, Debug, Serialize)]
pub struct InverseGradient {
    pub a: Vec<Mat2>,
    pub series_terms: usize,
    pub smallness: f64,
    /// `|A G - Id|` per seed.
    pub residuals: Vec<f64>,
    /// `s^{K+1} / (1 - s)` per seed, plus a roundoff allowance.
    pub residual_bounds: Vec<f64>,
    /// `|A - Id|` per seed.
    pub deviations: Vec<f64>,
    /// `2 s` per seed.
    pub deviation_bounds: Vec<f64>,
}

impl InverseGradient {
    pub fn residual_margin(&self) -> f64 {
        self.residuals
            .iter()
            .zip(&self.residual_bounds)
            .map(|(r, b)| b - r)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn deviation_margin(&self) -> f64 {
        self.deviations
            .iter()
            .zip(&self.deviation_bounds)
            .map(|(r, b)| b - r)
            .fold(f64::INFINITY, f64::min)
    }
}

fn sub_identity(g: &Mat2) -> Mat2 {
    [[g[0][0] - 1.0, g[0][1]], [g[1][0], g[1][1] - 1.0]]
}

/// `sum_{k=0}^{terms} (-e)^k` by Horner's rule.
pub fn neumann_series(e: &Mat2, terms: usize) -> Mat2 {
    let neg = [[-e[0][0], -e[0][1]], [-e[1][0], -e[1][1]]];
    let mut acc = IDENTITY;
    for _ in 0..terms {
        let m = mat_mul(&neg, &acc);
        acc = [[1.0 + m[0][0], m[0][1]], [m[1][0], 1.0 + m[1][1]]];
    }
    acc
}

/// Geometric tail bound with a roundoff allowance of `1e-15` per term.
pub fn tail_bound(smallness: f64, terms: usize) -> f64 {
    smallness.powi(terms as i32 + 1) / (1.0 - smallness) + 1e-15 * (terms as f64 + 1.0)
}

pub fn neumann_inverse(fm: &FlowMap, terms: usize) -> Result<InverseGradient> {
    let smallness = fm.smallness();
    if smallness > SMALLNESS_LIMIT {
        return Err(BmlError::SmallnessViolated { smallness });
    }
    let mut out = InverseGradient {
        a: Vec::with_capacity(fm.grads().len()),
        series_terms: terms,
        smallness,
        residuals: Vec::new(),
        residual_bounds: Vec::new(),
        deviations: Vec::new(),
        deviation_bounds: Vec::new(),
    };
    for (g, &s) in fm.grads().iter().zip(fm.seed_smallness()) {
        let a = neumann_series(&sub_identity(g), terms);
        out.residuals.push(operator_norm(&sub_identity(&mat_mul(&a, g))));
        out.residual_bounds.push(tail_bound(s, terms));
        out.deviations.push(operator_norm(&sub_identity(&a)));
        out.deviation_bounds.push(2.0 * s + 1e-15 * (terms as f64 + 1.0));
        out.a.push(a);
    }
    Ok(out)
}
