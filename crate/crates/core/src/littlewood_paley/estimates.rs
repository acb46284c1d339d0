//! Numerical checks of the product, interpolation and heat-smoothing
//! inequalities. Every check evaluates both sides with constant 1 and
//! reports the ratio; callers fit `C = max ratio` over a corpus.

use rayon::prelude::*;
use serde::Serialize;

use super::besov::{besov_norm_vector, weighted_sup, BesovParams};
use crate::error::{BmlError, Result};
use crate::spectral::norms::{check_exponent, lp_norm, lp_norm_vector};
use crate::spectral::ops::heat_propagator;
use crate::spectral::{dealias, RealField, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProductVariant {
    /// `||v.grad theta||_{B^{-s}_{p,inf}}` against `(||v||_2 + ||grad v||_2) * weighted_sup(theta)`.
    Negative,
    /// `||v.grad theta||_{B^s_{p,inf}}` against the `L^{2p}`/`B^s_{2p,inf}` pairing.
    Positive,
    /// `||v.grad v||_{B^s_{p,inf}}` against `||grad v||_{B^s} ||v||_inf + ||v||_{B^s} ||grad v||_inf`.
    SelfAdvection,
}

impl ProductVariant {
    pub fn number(self) -> u8 {
        match self {
            ProductVariant::Negative => 1,
            ProductVariant::Positive => 2,
            ProductVariant::SelfAdvection => 3,
        }
    }

    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(ProductVariant::Negative),
            2 => Ok(ProductVariant::Positive),
            3 => Ok(ProductVariant::SelfAdvection),
            _ => Err(BmlError::param("variant", format!("expected 1, 2 or 3, got {k}"))),
        }
    }

    fn check_range(self, s: f64, p: f64) -> Result<()> {
        check_exponent(p)?;
        let ok = match self {
            ProductVariant::Negative => s > 0.0 && s < 1.0,
            ProductVariant::Positive => s > 0.0 && s < 1.0 && p <= 2.0,
            ProductVariant::SelfAdvection => s > 0.0 && s <= 4.0,
        };
        if ok {
            Ok(())
        } else {
            Err(BmlError::param(
                "s/p",
                format!("(s, p) = ({s}, {p}) outside the range of variant {}", self.number()),
            ))
        }
    }
}

/// One row of a verification table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRow {
    pub id: usize,
    pub variant: u8,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub grid_n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginReport {
    pub rows: Vec<EstimateRow>,
    /// Largest observed ratio, the fitted constant.
    pub fitted_constant: f64,
}

impl MarginReport {
    pub fn from_rows(rows: Vec<EstimateRow>) -> Self {
        let fitted_constant = rows.iter().fold(0.0_f64, |m, r| m.max(r.ratio));
        MarginReport { rows, fitted_constant }
    }
}

pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

/// Divergence-free velocity paired with a scalar.
#[derive(Clone, Debug)]
pub struct CorpusPair {
    pub v1: RealField,
    pub v2: RealField,
    pub theta: RealField,
}

struct Gradients {
    v: [RealField; 2],
    grad_v: [RealField; 4],
    theta: RealField,
    grad_theta: [RealField; 2],
}

fn gradients(pair: &CorpusPair) -> Result<Gradients> {
    let s1 = dealias(&pair.v1.to_spectral()?);
    let s2 = dealias(&pair.v2.to_spectral()?);
    let st = dealias(&pair.theta.to_spectral()?);
    let d = |s: &SpectralField, a: usize| s.partial(a).to_real("d");
    Ok(Gradients {
        v: [s1.to_real("v1"), s2.to_real("v2")],
        grad_v: [d(&s1, 0), d(&s1, 1), d(&s2, 0), d(&s2, 1)],
        theta: st.to_real("theta"),
        grad_theta: [d(&st, 0), d(&st, 1)],
    })
}

fn dot_dealiased(a: &[RealField; 2], b: [&RealField; 2]) -> Result<RealField> {
    let prod = a[0].mul(b[0])?.add(&a[1].mul(b[1])?)?;
    Ok(dealias(&prod.to_spectral()?).to_real("product"))
}

/// Both sides of the selected product inequality (constant 1).
pub fn product_estimate(pair: &CorpusPair, variant: ProductVariant, s: f64, p: f64) -> Result<(f64, f64)> {
    variant.check_range(s, p)?;
    let g = gradients(pair)?;
    let inf = f64::INFINITY;
    let gv: Vec<&RealField> = g.grad_v.iter().collect();
    match variant {
        ProductVariant::Negative => {
            let adv = dot_dealiased(&g.v, [&g.grad_theta[0], &g.grad_theta[1]])?;
            let lhs = besov_norm_vector(&[&adv], BesovParams::new(-s, p, inf)?)?;
            let rhs = (lp_norm_vector(&[&g.v[0], &g.v[1]], 2.0) + lp_norm_vector(&gv, 2.0))
                * weighted_sup(&g.theta, s, p)?;
            Ok((lhs, rhs))
        }
        ProductVariant::Positive => {
            let adv = dot_dealiased(&g.v, [&g.grad_theta[0], &g.grad_theta[1]])?;
            let lhs = besov_norm_vector(&[&adv], BesovParams::new(s, p, inf)?)?;
            let q = 2.0 * p;
            let rhs = lp_norm_vector(&[&g.v[0], &g.v[1]], q)
                * besov_norm_vector(&[&g.theta], BesovParams::new(1.0 + s, q, inf)?)?
                + besov_norm_vector(&[&g.v[0], &g.v[1]], BesovParams::new(s, q, inf)?)?
                    * lp_norm_vector(&[&g.grad_theta[0], &g.grad_theta[1]], q);
            Ok((lhs, rhs))
        }
        ProductVariant::SelfAdvection => {
            let a1 = dot_dealiased(&g.v, [&g.grad_v[0], &g.grad_v[1]])?;
            let a2 = dot_dealiased(&g.v, [&g.grad_v[2], &g.grad_v[3]])?;
            let bp = BesovParams::new(s, p, inf)?;
            let lhs = besov_norm_vector(&[&a1, &a2], bp)?;
            let rhs = besov_norm_vector(&gv, bp)? * lp_norm_vector(&[&g.v[0], &g.v[1]], inf)
                + besov_norm_vector(&[&g.v[0], &g.v[1]], bp)? * lp_norm_vector(&gv, inf);
            Ok((lhs, rhs))
        }
    }
}

pub fn verify_product_estimate(corpus: &[CorpusPair], variant: ProductVariant, s: f64, p: f64) -> Result<MarginReport> {
    variant.check_range(s, p)?;
    let rows = corpus
        .par_iter()
        .enumerate()
        .map(|(id, pair)| {
            let (lhs, rhs) = product_estimate(pair, variant, s, p)?;
            Ok(EstimateRow {
                id,
                variant: variant.number(),
                lhs,
                rhs,
                ratio: ratio(lhs, rhs),
                grid_n: pair.theta.grid().n(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginReport::from_rows(rows))
}

/// Snaps values within `1e-12` of an integer, so exact branch points survive roundoff.
fn floor_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * r.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// The integer `N` splitting low and high shells in the interpolation bound:
/// 2 when `b <= 2a`, otherwise `floor(log2(b/a) / (2 + d - s - d/p)) + 1`.
pub fn interpolation_index(l1: f64, besov: f64, s: f64, p: f64, d: f64) -> u32 {
    if besov <= 2.0 * l1 {
        return 2;
    }
    let a = 2.0 + d - s - d / p;
    (floor_snapped((besov / l1).log2() / a) + 1.0) as u32
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogInterpReport {
    pub lhs: f64,
    pub rhs: f64,
    pub n: u32,
    pub l1: f64,
    pub besov: f64,
}

impl LogInterpReport {
    pub fn ratio(&self) -> f64 {
        ratio(self.lhs, self.rhs)
    }
}

/// Right side of the logarithmic interpolation bound in two dimensions.
pub fn log_interp_rhs(l1: f64, besov: f64, s: f64, p: f64) -> f64 {
    let d = 2.0;
    let a = 2.0 + d - s - d / p;
    l1.powf(1.0 / a) * besov.powf((a - 1.0) / a) * (std::f64::consts::E + besov / l1).ln().sqrt() + l1
}

pub fn log_interp_check(theta: &RealField, s: f64, p: f64) -> Result<LogInterpReport> {
    if !(s > 0.0 && s < 1.0) {
        return Err(BmlError::param("s", format!("expected s in ]0,1[, got {s}")));
    }
    check_exponent(p)?;
    let l1 = lp_norm(theta, 1.0);
    if l1 == 0.0 {
        return Err(BmlError::InvalidInput("interpolation check needs a nonzero field".into()));
    }
    let besov = besov_norm_vector(&[theta], BesovParams::new(2.0 - s, p, f64::INFINITY)?)?;
    Ok(LogInterpReport {
        lhs: weighted_sup(theta, s, p)?,
        rhs: log_interp_rhs(l1, besov, s, p),
        n: interpolation_index(l1, besov, s, p, 2.0),
        l1,
        besov,
    })
}

/// Forcing that is constant on each of `pieces.len()` equal sub-intervals of `[0, T]`.
#[derive(Clone, Debug)]
pub struct ForcingTimeline {
    pub pieces: Vec<RealField>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeatReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `(t, ||u(t)||_{B^s_{p,inf}})`
    pub samples: Vec<(f64, f64)>,
}

/// One step of `u' = Delta u + f` with `f` frozen: exact integrating factor.
pub fn heat_step(u: &SpectralField, f: &SpectralField, h: f64) -> Result<SpectralField> {
    u.grid().ensure_same(f.grid())?;
    let decayed = heat_propagator(u, h)?;
    let g = *u.grid();
    let n = g.n();
    let mut out = decayed;
    for i1 in 0..n {
        for i2 in 0..n {
            let k2 = g.k_squared(i1, i2);
            let w = if k2 == 0.0 { h } else { -(-k2 * h).exp_m1() / k2 };
            let idx = g.index(i1, i2);
            out.coefficients_mut()[idx] += f.coefficients()[idx] * w;
        }
    }
    Ok(out)
}

/// Solves `u' - Delta u = f` exactly per piece and compares
/// `max_t ||u(t)||_{B^s_{p,inf}}` with `||u0||_{B^s} + (1+T) max ||f||_{B^{s-2}}`.
pub fn heat_smoothing_check(
    u0: &RealField,
    forcing: &ForcingTimeline,
    s: f64,
    p: f64,
    t_final: f64,
    samples_per_piece: usize,
) -> Result<HeatReport> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(BmlError::param("T", format!("expected T > 0, got {t_final}")));
    }
    if forcing.pieces.is_empty() || samples_per_piece == 0 {
        return Err(BmlError::InvalidInput("heat check needs forcing pieces and samples".into()));
    }
    let bp = BesovParams::new(s, p, f64::INFINITY)?;
    let bp_f = BesovParams::new(s - 2.0, p, f64::INFINITY)?;
    let piece = t_final / forcing.pieces.len() as f64;
    let h = piece / samples_per_piece as f64;
    let mut u = u0.to_spectral()?;
    let mut samples = vec![(0.0, besov_norm_vector(&[u0], bp)?)];
    let mut forcing_max: f64 = 0.0;
    for (i, f) in forcing.pieces.iter().enumerate() {
        forcing_max = forcing_max.max(besov_norm_vector(&[f], bp_f)?);
        let fs = f.to_spectral()?;
        for step in 1..=samples_per_piece {
            u = heat_step(&u, &fs, h)?;
            let t = i as f64 * piece + step as f64 * h;
            samples.push((t, besov_norm_vector(&[&u.to_real("u")], bp)?));
        }
    }
    let lhs = samples.iter().fold(0.0, |m: f64, s| m.max(s.1));
    let rhs = samples[0].1 + (1.0 + t_final) * forcing_max;
    Ok(HeatReport {
        lhs,
        rhs,
        ratio: ratio(lhs, rhs),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_branches() {
        // first branch
        assert_eq!(interpolation_index(1.0, 1.0, 0.5, 8.0 / 7.0, 2.0), 2);
        assert_eq!(interpolation_index(1.0, 2.0, 0.5, 8.0 / 7.0, 2.0), 2);
        // exactly 2^a: floor(1) + 1
        let a: f64 = 2.0 + 2.0 - 0.5 - 2.0 / (8.0 / 7.0);
        assert_eq!(interpolation_index(1.0, 2f64.powf(a), 0.5, 8.0 / 7.0, 2.0), 2);
        assert_eq!(interpolation_index(1.0, 2f64.powf(3.0 * a), 0.5, 8.0 / 7.0, 2.0), 4);
        // the second branch formula taken literally just above the switch
        assert_eq!(interpolation_index(1.0, 2.5, 0.5, 8.0 / 7.0, 2.0), 1);
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0.0, 0.0), 0.0);
        assert_eq!(ratio(1.0, 0.0), f64::INFINITY);
        assert_eq!(ratio(1.0, 4.0), 0.25);
    }

    #[test]
    fn variant_ranges() {
        assert!(ProductVariant::Positive.check_range(0.5, 3.0).is_err());
        assert!(ProductVariant::Negative.check_range(1.0, 2.0).is_err());
        assert!(ProductVariant::SelfAdvection.check_range(2.5, 7.0).is_ok());
        assert!(ProductVariant::from_number(4).is_err());
    }
}
