//! Bony decomposition of `Delta_q (v . grad theta)`.
//!
//! Inputs are truncated by the 2/3 rule on entry and every product is
//! dealiased, so all quadratic terms are alias-free and the regrouping
//! `I_q + II_q + III_q = Delta_q (v . grad theta)` is exact up to roundoff.
//! `S_{k-1} = sum_{l <= k-2} Delta_l` and `~Delta_k = Delta_{k-1} + Delta_k + Delta_{k+1}`.

use std::sync::Arc;

use super::besov::{low_pass_spectrum, shell_spectrum};
use super::partition::DyadicPartition;
use crate::error::{BmlError, Result};
use crate::spectral::{dealias, dealiased_product, RealField, SpectralField};

/// Deliberate corruption used to check that the Bony suite detects errors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BonyFault {
    #[default]
    None,
    /// Flips the sign of the remainder term `III_q`.
    FlipRemainder,
}

#[derive(Clone, Debug)]
pub struct BonyTerms {
    pub q: i32,
    pub paraproduct_low_v: RealField,
    pub paraproduct_low_theta: RealField,
    pub remainder: RealField,
}

impl BonyTerms {
    pub fn sum(&self) -> RealField {
        self.paraproduct_low_v
            .add(&self.paraproduct_low_theta)
            .and_then(|s| s.add(&self.remainder))
            .expect("terms share a grid")
    }
}

/// Relative tolerance on `||div v||_inf / ||grad v||_inf`.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-8;

struct Prepared {
    partition: Arc<DyadicPartition>,
    v: [SpectralField; 2],
    theta: SpectralField,
}

fn prepare(v: (&RealField, &RealField), theta: &RealField) -> Result<Prepared> {
    v.0.grid().ensure_same(v.1.grid())?;
    v.0.grid().ensure_same(theta.grid())?;
    let partition = DyadicPartition::for_grid(theta.grid())?;
    let v1 = dealias(&v.0.to_spectral()?);
    let v2 = dealias(&v.1.to_spectral()?);
    let div = v1.partial(0).add(&v2.partial(1))?.to_real("div");
    let scale = [v1.partial(0), v1.partial(1), v2.partial(0), v2.partial(1)]
        .iter()
        .map(|d| d.to_real("dv").max_abs())
        .fold(0.0, f64::max);
    let tolerance = DIVERGENCE_TOLERANCE * scale.max(f64::MIN_POSITIVE);
    if div.max_abs() > tolerance {
        return Err(BmlError::DivergenceViolation {
            divergence: div.max_abs(),
            tolerance,
        });
    }
    Ok(Prepared {
        partition,
        v: [v1, v2],
        theta: dealias(&theta.to_spectral()?),
    })
}

/// `dealias(a . grad b)` for spectral `a` (vector) and `b` (scalar).
fn advect(a: &[SpectralField; 2], b: &SpectralField) -> SpectralField {
    let a1 = a[0].to_real("a1");
    let a2 = a[1].to_real("a2");
    let b1 = b.partial(0).to_real("b1");
    let b2 = b.partial(1).to_real("b2");
    let first = dealiased_product(&a1, &b1).expect("same grid");
    let second = dealiased_product(&a2, &b2).expect("same grid");
    first.add(&second).expect("same grid")
}

fn vec_shell(v: &[SpectralField; 2], p: &DyadicPartition, k: i32) -> [SpectralField; 2] {
    [shell_spectrum(&v[0], p, k), shell_spectrum(&v[1], p, k)]
}

fn vec_low(v: &[SpectralField; 2], p: &DyadicPartition, k: i32) -> [SpectralField; 2] {
    [low_pass_spectrum(&v[0], p, k), low_pass_spectrum(&v[1], p, k)]
}

fn tilde_shell(theta: &SpectralField, p: &DyadicPartition, k: i32) -> SpectralField {
    let mut sum = shell_spectrum(theta, p, k - 1);
    for j in [k, k + 1] {
        sum = sum.add(&shell_spectrum(theta, p, j)).expect("same grid");
    }
    sum
}

fn accumulate(terms: &[SpectralField], grid_len: usize, grid: crate::spectral::Grid) -> SpectralField {
    let mut out = SpectralField::zeros(grid);
    debug_assert_eq!(out.coefficients().len(), grid_len);
    for t in terms {
        for (o, c) in out.coefficients_mut().iter_mut().zip(t.coefficients()) {
            *o += c;
        }
    }
    out
}

/// The three Bony terms for every shell `q = -1 ..= j_max`.
pub fn bony_terms_all(v: (&RealField, &RealField), theta: &RealField, fault: BonyFault) -> Result<Vec<BonyTerms>> {
    let prep = prepare(v, theta)?;
    let p = &prep.partition;
    let grid = *p.grid();
    let ks: Vec<i32> = p.indices().collect();
    // products that do not depend on q
    let low_v: Vec<SpectralField> = ks
        .iter()
        .map(|&k| advect(&vec_low(&prep.v, p, k - 1), &shell_spectrum(&prep.theta, p, k)))
        .collect();
    let low_theta: Vec<SpectralField> = ks
        .iter()
        .map(|&k| advect(&vec_shell(&prep.v, p, k), &low_pass_spectrum(&prep.theta, p, k - 1)))
        .collect();
    let diagonal: Vec<SpectralField> = ks
        .iter()
        .map(|&k| advect(&vec_shell(&prep.v, p, k), &tilde_shell(&prep.theta, p, k)))
        .collect();
    let sign = if fault == BonyFault::FlipRemainder { -1.0 } else { 1.0 };
    Ok(ks
        .iter()
        .map(|&q| {
            let near: Vec<usize> = ks
                .iter()
                .enumerate()
                .filter(|(_, &k)| (k - q).abs() <= 4)
                .map(|(i, _)| i)
                .collect();
            let far: Vec<usize> = ks
                .iter()
                .enumerate()
                .filter(|(_, &k)| k >= q - 3)
                .map(|(i, _)| i)
                .collect();
            let pick = |src: &[SpectralField], idx: &[usize]| {
                let chosen: Vec<SpectralField> = idx.iter().map(|&i| src[i].clone()).collect();
                shell_spectrum(&accumulate(&chosen, grid.len(), grid), p, q)
            };
            BonyTerms {
                q,
                paraproduct_low_v: pick(&low_v, &near).to_real("I_q"),
                paraproduct_low_theta: pick(&low_theta, &near).to_real("II_q"),
                remainder: pick(&diagonal, &far).scale(sign).to_real("III_q"),
            }
        })
        .collect())
}

pub fn bony_terms(v: (&RealField, &RealField), theta: &RealField, q: i32) -> Result<BonyTerms> {
    bony_terms_with_fault(v, theta, q, BonyFault::None)
}

pub fn bony_terms_with_fault(
    v: (&RealField, &RealField),
    theta: &RealField,
    q: i32,
    fault: BonyFault,
) -> Result<BonyTerms> {
    let partition = DyadicPartition::for_grid(theta.grid())?;
    if q < -1 || q > partition.j_max() {
        return Err(BmlError::param(
            "q",
            format!("shell index must lie in [-1, {}], got {q}", partition.j_max()),
        ));
    }
    let all = bony_terms_all(v, theta, fault)?;
    Ok(all.into_iter().find(|t| t.q == q).expect("q in range"))
}

/// `Delta_q dealias(v . grad theta)` after the same entry truncation as the terms.
pub fn direct_block(v: (&RealField, &RealField), theta: &RealField, q: i32) -> Result<RealField> {
    let prep = prepare(v, theta)?;
    let full = advect(&prep.v, &prep.theta);
    Ok(shell_spectrum(&full, &prep.partition, q).to_real("direct"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn constant_theta_or_zero_velocity_vanish() {
        let g = Grid::new(32, PI).unwrap();
        let v1 = RealField::from_fn(g, "v1", |_, y| y.sin());
        let v2 = RealField::from_fn(g, "v2", |x, _| x.cos());
        let c = RealField::constant(g, 3.0, "theta");
        for t in bony_terms_all((&v1, &v2), &c, BonyFault::None).unwrap() {
            assert!(t.sum().max_abs() < 1e-13);
        }
        let z = RealField::zeros(g, "v");
        let theta = RealField::from_fn(g, "theta", |x, y| (x + 2.0 * y).sin());
        for t in bony_terms_all((&z, &z), &theta, BonyFault::None).unwrap() {
            assert_eq!(t.paraproduct_low_v.max_abs(), 0.0);
            assert_eq!(t.paraproduct_low_theta.max_abs(), 0.0);
            assert_eq!(t.remainder.max_abs(), 0.0);
        }
    }

    #[test]
    fn compressible_field_rejected() {
        let g = Grid::new(32, PI).unwrap();
        let v1 = RealField::from_fn(g, "v1", |x, _| x.sin());
        let z = RealField::zeros(g, "v2");
        assert!(matches!(
            bony_terms(( &v1, &z), &v1, 0),
            Err(BmlError::DivergenceViolation { .. })
        ));
    }
}
