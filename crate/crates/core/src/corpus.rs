//! Seeded random test data: band-limited fields, divergence-free pairs,
//! Gaussian families and atomic measures. Every generator takes an explicit
//! seed and uses ChaCha8, so corpora are identical across runs and platforms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::littlewood_paley::CorpusPair;
use crate::measures::AtomicMeasure;
use crate::spectral::{biot_savart_spectral, Grid, RealField, SpectralField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real field with random modes up to integer wave index `band` and
/// amplitudes decaying like `1 / (1 + |m|^2)^decay`.
pub fn random_field(grid: Grid, band: i64, decay: f64, rng: &mut ChaCha8Rng) -> RealField {
    let n = grid.n();
    let band = band.min(n as i64 / 2 - 1);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for m1 in -band..=band {
        for m2 in 0..=band {
            // each conjugate pair is filled once
            if m2 == 0 && m1 < 0 {
                continue;
            }
            let amp = 1.0 / (1.0 + (m1 * m1 + m2 * m2) as f64).powf(decay);
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
            let i1 = m1.rem_euclid(n as i64) as usize;
            let i2 = m2 as usize;
            let j1 = (-m1).rem_euclid(n as i64) as usize;
            let j2 = (-m2).rem_euclid(n as i64) as usize;
            if m1 == 0 && m2 == 0 {
                coeffs[0] = Complex64::new(c.re, 0.0);
            } else {
                coeffs[grid.index(i1, i2)] = c;
                coeffs[grid.index(j1, j2)] = c.conj();
            }
        }
    }
    SpectralField::new(grid, coeffs)
        .expect("length matches grid")
        .to_real("random")
}

/// Full-spectrum white noise in `[-1, 1]`.
pub fn white_noise(grid: Grid, rng: &mut ChaCha8Rng) -> RealField {
    let values = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    RealField::new(grid, values, "noise").expect("length matches grid")
}

/// Divergence-free velocity from a random stream function.
pub fn random_divergence_free(grid: Grid, band: i64, rng: &mut ChaCha8Rng) -> (RealField, RealField) {
    let omega = random_field(grid, band, 1.0, rng).to_spectral().expect("finite").without_mean();
    let (v1, v2) = biot_savart_spectral(&omega);
    (v1.to_real("v1"), v2.to_real("v2"))
}

/// `count` pairs of a divergence-free velocity and a scalar, all limited to
/// wave index `band`.
pub fn random_pairs(grid: Grid, count: usize, band: i64, seed: u64) -> Vec<CorpusPair> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let (v1, v2) = random_divergence_free(grid, band, &mut r);
            let theta = random_field(grid, band, 1.0, &mut r);
            CorpusPair { v1, v2, theta }
        })
        .collect()
}

/// Gaussian bumps `exp(-|x - c|^2 / (2 w^2))` with widths spread
/// geometrically over `[w_min, w_max]` and centers near the origin.
pub fn gaussian_family(grid: Grid, count: usize, w_min: f64, w_max: f64, seed: u64) -> Vec<RealField> {
    let mut r = rng(seed);
    (0..count)
        .map(|k| {
            let u = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.0 };
            let w = w_min * (w_max / w_min).powf(u);
            let c = [r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5)];
            RealField::from_fn(grid, "gaussian", |x, y| {
                let d2 = (x - c[0]).powi(2) + (y - c[1]).powi(2);
                (-d2 / (2.0 * w * w)).exp()
            })
        })
        .collect()
}

/// Atoms with uniform positions in `[-radius, radius]^2` and weights in `[0, 1)`.
pub fn random_measure(count: usize, radius: f64, rng: &mut ChaCha8Rng) -> AtomicMeasure {
    let pairs: Vec<([f64; 2], f64)> = (0..count)
        .map(|_| {
            (
                [rng.gen_range(-radius..radius), rng.gen_range(-radius..radius)],
                rng.gen_range(0.0..1.0),
            )
        })
        .collect();
    AtomicMeasure::from_pairs(&pairs).expect("finite nonnegative atoms")
}
