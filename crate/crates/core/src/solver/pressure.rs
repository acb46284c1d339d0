//! Pressure recovery and the momentum-equation residual.
//!
//! Taking the divergence of `d_t v + v.grad v - Delta v + grad p = theta e_2`
//! gives `p = (-Delta)^{-1} div(v.grad v) - (-Delta)^{-1} d_2 theta` with the
//! mean-zero convention. A constant buoyancy cannot be balanced by a pressure
//! gradient on the torus, so the residual uses `theta` minus its mean.

use super::state::SolverState;
use crate::error::{BmlError, Result};
use crate::spectral::ops::dealias_in_place;
use crate::spectral::{RealField, SpectralField};

/// `(v.grad) v` per component, dealiased.
fn self_advection(v: &[SpectralField; 2]) -> [SpectralField; 2] {
    let real = [v[0].to_real("v1"), v[1].to_real("v2")];
    let grid = *v[0].grid();
    [0, 1].map(|c| {
        let d1 = v[c].partial(0).to_real("d1");
        let d2 = v[c].partial(1).to_real("d2");
        let values: Vec<f64> = (0..grid.len())
            .map(|i| real[0].values()[i] * d1.values()[i] + real[1].values()[i] * d2.values()[i])
            .collect();
        let mut s = RealField::new(grid, values, "adv")
            .expect("grid length")
            .to_spectral_unchecked();
        dealias_in_place(&mut s);
        s
    })
}

fn pressure_from(adv: &[SpectralField; 2], theta: &SpectralField) -> SpectralField {
    let div = adv[0].partial(0).add(&adv[1].partial(1)).expect("same grid");
    div.sub(&theta.partial(1)).expect("same grid").inverse_neg_laplacian()
}

pub fn recover_pressure_spectral(state: &SolverState) -> SpectralField {
    let (v1, v2) = state.velocity_spectral();
    let v = [v1, v2];
    let adv = self_advection(&v);
    pressure_from(&adv, &state.theta)
}

/// Mean-zero pressure of a state.
pub fn recover_pressure(state: &SolverState) -> RealField {
    recover_pressure_spectral(state).to_real("p")
}

/// `|| d_t v + v.grad v - Delta v + grad p - theta' e_2 ||_{L^2}` at the middle
/// state, with `d_t v` a centered difference over `(before, after)`.
pub fn momentum_residual(before: &SolverState, state: &SolverState, after: &SolverState) -> Result<f64> {
    let span = after.t - before.t;
    if !(span > 0.0) || !(state.t > before.t && state.t < after.t) {
        return Err(BmlError::InvalidInput("momentum residual needs three increasing times".into()));
    }
    before.grid().ensure_same(state.grid())?;
    after.grid().ensure_same(state.grid())?;
    let (a1, a2) = before.velocity_spectral();
    let (b1, b2) = after.velocity_spectral();
    let (v1, v2) = state.velocity_spectral();
    let v = [v1, v2];
    let adv = self_advection(&v);
    let p = pressure_from(&adv, &state.theta);
    let buoyancy = state.theta.without_mean();
    let dt = [b1.sub(&a1)?.scale(1.0 / span), b2.sub(&a2)?.scale(1.0 / span)];
    let mut total = 0.0;
    for c in 0..2 {
        let mut r = dt[c].add(&adv[c])?.sub(&v[c].laplacian())?.add(&p.partial(c))?;
        if c == 1 {
            r = r.sub(&buoyancy)?;
        }
        total += r.power();
    }
    Ok((total * state.grid().area()).sqrt())
}
