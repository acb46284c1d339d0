//! Grid (Eulerian) counterpart of atom transport: `rho_t + v . grad rho = 0`
//! solved pseudo-spectrally with dealiased advection and RK4 in time.

use super::transport::step_count;
use crate::error::{BmlError, Result};
use crate::spectral::{dealias, RealField, SpectralField};
use crate::velocity::VelocityField;

/// Largest admissible `dt |v|_max / h`.
pub const CFL_CAP: f64 = 0.5;

fn advection(rho: &SpectralField, v: &(RealField, RealField)) -> Result<SpectralField> {
    let d1 = rho.partial(0).to_real("d1");
    let d2 = rho.partial(1).to_real("d2");
    let prod = v.0.mul(&d1)?.add(&v.1.mul(&d2)?)?;
    Ok(dealias(&prod.to_spectral()?).scale(-1.0))
}

fn axpy(a: &SpectralField, s: f64, b: &SpectralField) -> SpectralField {
    a.add(&b.scale(s)).expect("same grid")
}

pub fn eulerian_advect_density(rho0: &RealField, v: &dyn VelocityField, t_final: f64, dt: f64) -> Result<RealField> {
    let grid = *rho0.grid();
    let steps = step_count(0.0, t_final, dt)?;
    let mut rho = rho0.to_spectral()?;
    if steps == 0 {
        return Ok(rho0.clone());
    }
    let h = t_final / steps as f64;
    for k in 0..steps {
        let t = k as f64 * h;
        let stages = [0usize, 1, 2].map(|s| v.on_grid(t + crate::velocity::STAGE_NODES[s] * h, &grid));
        let [va, vb, vc] = stages;
        let (va, vb, vc) = (va?, vb?, vc?);
        let vmax = [&va, &vb, &vc]
            .iter()
            .map(|w| w.0.max_abs().hypot(w.1.max_abs()))
            .fold(0.0, f64::max);
        if h * vmax > CFL_CAP * grid.spacing() {
            return Err(BmlError::Cfl {
                halvings: 0,
                dt: h,
                vmax,
            });
        }
        let k1 = advection(&rho, &va)?;
        let k2 = advection(&axpy(&rho, 0.5 * h, &k1), &vb)?;
        let k3 = advection(&axpy(&rho, 0.5 * h, &k2), &vb)?;
        let k4 = advection(&axpy(&rho, h, &k3), &vc)?;
        let incr = k1.add(&k2.scale(2.0))?.add(&k3.scale(2.0))?.add(&k4)?;
        rho = axpy(&rho, h / 6.0, &incr);
        if !rho.is_finite() {
            return Err(BmlError::NonFinite(format!("advected density at t = {}", t + h)));
        }
    }
    Ok(rho.to_real(rho0.label().to_string()))
}
