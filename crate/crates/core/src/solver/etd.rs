//! Third-order exponential time differencing (Cox-Matthews ETDRK3).
//!
//! For `u' = L u + N(u, t)` with diagonal `L = -|k|^2`:
//!
//! ```text
//! a       = e^{hL/2} u + h/2 phi1(hL/2) N(u, t)
//! b       = e^{hL} u + h phi1(hL) (2 N(a, t + h/2) - N(u, t))
//! u(t+h)  = e^{hL} u + h [ (phi1 - 3 phi2 + 4 phi3) N_u
//!                          + 4 (phi2 - 2 phi3) N_a + (4 phi3 - phi2) N_b ]
//! ```
//!
//! Diffusion is integrated exactly, and a forcing that is constant in time
//! is integrated exactly as well (the weights sum to `phi1`).

use num_complex::Complex64;

use crate::spectral::{Grid, SpectralField};

/// `phi_k(z) = sum_m z^m / (m + k)!` for `k = 1, 2, 3`.
pub fn phi_functions(z: f64) -> [f64; 3] {
    if z.abs() < 1.0 {
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            // start at 1/(k+1)!
            let mut term = 1.0 / (1..=(k + 1)).map(|x| x as f64).product::<f64>();
            let mut sum = term;
            for m in 1..30 {
                term *= z / (m + k + 1) as f64;
                sum += term;
            }
            *slot = sum;
        }
        out
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (e - 1.0 - z) / (z * z);
        let p3 = (e - 1.0 - z - 0.5 * z * z) / (z * z * z);
        [p1, p2, p3]
    }
}

/// Per-mode weights for one step size.
#[derive(Clone, Debug)]
pub struct EtdCoefficients {
    pub h: f64,
    pub decay: Vec<f64>,
    pub half_decay: Vec<f64>,
    pub half_weight: Vec<f64>,
    pub full_weight: Vec<f64>,
    pub w_u: Vec<f64>,
    pub w_a: Vec<f64>,
    pub w_b: Vec<f64>,
}

impl EtdCoefficients {
    pub fn new(grid: &Grid, h: f64) -> Self {
        let n = grid.n();
        let len = grid.len();
        let mut c = EtdCoefficients {
            h,
            decay: Vec::with_capacity(len),
            half_decay: Vec::with_capacity(len),
            half_weight: Vec::with_capacity(len),
            full_weight: Vec::with_capacity(len),
            w_u: Vec::with_capacity(len),
            w_a: Vec::with_capacity(len),
            w_b: Vec::with_capacity(len),
        };
        for i1 in 0..n {
            for i2 in 0..n {
                let z = -grid.k_squared(i1, i2) * h;
                let [p1, p2, p3] = phi_functions(z);
                let [q1, _, _] = phi_functions(0.5 * z);
                c.decay.push(z.exp());
                c.half_decay.push((0.5 * z).exp());
                c.half_weight.push(0.5 * h * q1);
                c.full_weight.push(h * p1);
                c.w_u.push(h * (p1 - 3.0 * p2 + 4.0 * p3));
                c.w_a.push(h * 4.0 * (p2 - 2.0 * p3));
                c.w_b.push(h * (4.0 * p3 - p2));
            }
        }
        c
    }
}

fn combine(grid: &Grid, f: impl Fn(usize) -> Complex64) -> SpectralField {
    let coeffs = (0..grid.len()).map(f).collect();
    SpectralField::new(*grid, coeffs).expect("length matches grid")
}

pub fn stage_a(c: &EtdCoefficients, u: &SpectralField, n_u: &SpectralField) -> SpectralField {
    let (u, n) = (u.coefficients(), n_u.coefficients());
    combine(n_u.grid(), |i| u[i] * c.half_decay[i] + n[i] * c.half_weight[i])
}

pub fn stage_b(c: &EtdCoefficients, u: &SpectralField, n_u: &SpectralField, n_a: &SpectralField) -> SpectralField {
    let (u, nu, na) = (u.coefficients(), n_u.coefficients(), n_a.coefficients());
    combine(n_u.grid(), |i| u[i] * c.decay[i] + (na[i] * 2.0 - nu[i]) * c.full_weight[i])
}

pub fn stage_final(
    c: &EtdCoefficients,
    u: &SpectralField,
    n_u: &SpectralField,
    n_a: &SpectralField,
    n_b: &SpectralField,
) -> SpectralField {
    let (u, nu, na, nb) = (u.coefficients(), n_u.coefficients(), n_a.coefficients(), n_b.coefficients());
    combine(n_u.grid(), |i| {
        u[i] * c.decay[i] + nu[i] * c.w_u[i] + na[i] * c.w_a[i] + nb[i] * c.w_b[i]
    })
}
