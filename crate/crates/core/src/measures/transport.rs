//! Push-forward of atomic measures along characteristics (classical RK4).

use rayon::prelude::*;

use super::atomic::AtomicMeasure;
use crate::error::{BmlError, Result};
use crate::velocity::VelocityField;

/// Fraction of the box half length kept free near the boundary.
pub const SAFETY_FRACTION: f64 = 0.05;

/// Checks that `p` stays inside `[-(1 - SAFETY_FRACTION) L, (1 - SAFETY_FRACTION) L]^2`.
pub fn check_inside(p: [f64; 2], half_length: Option<f64>) -> Result<()> {
    if let Some(l) = half_length {
        let limit = (1.0 - SAFETY_FRACTION) * l;
        if !(p[0].abs() <= limit && p[1].abs() <= limit) {
            return Err(BmlError::OutsideBox {
                x: p[0],
                y: p[1],
                half_length: l,
            });
        }
    }
    Ok(())
}

/// One RK4 step for a single particle. Returns the new position and the
/// largest stage speed.
pub fn rk4_particle(v: &dyn VelocityField, t: f64, h: f64, x: [f64; 2]) -> Result<([f64; 2], [f64; 4])> {
    let k1 = v.stage_velocity(t, h, 0, x)?;
    let x2 = [x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]];
    let k2 = v.stage_velocity(t, h, 1, x2)?;
    let x3 = [x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]];
    let k3 = v.stage_velocity(t, h, 1, x3)?;
    let x4 = [x[0] + h * k3[0], x[1] + h * k3[1]];
    let k4 = v.stage_velocity(t, h, 2, x4)?;
    let next = [
        x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ];
    let speed = |k: [f64; 2]| k[0].hypot(k[1]);
    Ok((next, [speed(k1), speed(k2), speed(k3), speed(k4)]))
}

/// Per-step record of a transport run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportStep {
    pub t: f64,
    pub support_radius: f64,
    /// `R_0 + sum_steps h/6 (s1 + 2 s2 + 2 s3 + s4)` with `s_i` the largest
    /// stage speed over atoms; bounds every displacement exactly.
    pub support_bound: f64,
    pub total_variation: f64,
}

/// Advances all atoms over one step `[t, t + h]`; weights are copied unchanged.
pub fn transport_step(mu: &AtomicMeasure, v: &dyn VelocityField, t: f64, h: f64) -> Result<(AtomicMeasure, f64)> {
    let results: Vec<([f64; 2], [f64; 4])> = mu
        .atoms()
        .par_iter()
        .map(|a| rk4_particle(v, t, h, a.position))
        .collect::<Result<_>>()?;
    let domain = v.domain();
    let mut max_speed = [0.0f64; 4];
    let mut positions = Vec::with_capacity(results.len());
    for (p, s) in results {
        check_inside(p, domain)?;
        for (m, x) in max_speed.iter_mut().zip(s) {
            *m = m.max(x);
        }
        positions.push(p);
    }
    let advance = h / 6.0 * (max_speed[0] + 2.0 * max_speed[1] + 2.0 * max_speed[2] + max_speed[3]);
    Ok((mu.with_positions(&positions)?, advance))
}

/// Number of equal steps of size at most `dt` covering `[t0, t1]`.
pub fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(BmlError::param("dt", format!("expected dt > 0, got {dt}")));
    }
    if !(t1 >= t0) {
        return Err(BmlError::param("t1", format!("end time {t1} precedes start {t0}")));
    }
    let steps = ((t1 - t0) / dt * (1.0 - 1e-12)).ceil();
    Ok(steps.max(0.0) as usize)
}

pub fn transport_atoms_traced(
    mu0: &AtomicMeasure,
    v: &dyn VelocityField,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<(AtomicMeasure, Vec<TransportStep>)> {
    let steps = step_count(t0, t1, dt)?;
    for a in mu0.atoms() {
        check_inside(a.position, v.domain())?;
    }
    let mut mu = mu0.clone();
    let mut bound = mu0.support_radius();
    let mut trace = vec![TransportStep {
        t: t0,
        support_radius: bound,
        support_bound: bound,
        total_variation: mu0.total_variation(),
    }];
    if steps == 0 {
        return Ok((mu, trace));
    }
    let h = (t1 - t0) / steps as f64;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let (next, advance) = transport_step(&mu, v, t, h)?;
        mu = next;
        bound += advance;
        trace.push(TransportStep {
            t: t0 + (k + 1) as f64 * h,
            support_radius: mu.support_radius(),
            support_bound: bound,
            total_variation: mu.total_variation(),
        });
    }
    Ok((mu, trace))
}

/// Moves every atom from `t0` to `t1` with RK4 steps no longer than `dt`.
pub fn transport_atoms(mu0: &AtomicMeasure, v: &dyn VelocityField, t0: f64, t1: f64, dt: f64) -> Result<AtomicMeasure> {
    Ok(transport_atoms_traced(mu0, v, t0, t1, dt)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::velocity::{ConstantVelocity, RigidRotation};

    #[test]
    fn zero_velocity_keeps_atoms() {
        let mu = AtomicMeasure::from_pairs(&[([0.5, -0.25], 1.0), ([1.0, 2.0], 0.0)]).unwrap();
        let out = transport_atoms(&mu, &ConstantVelocity([0.0, 0.0]), 0.0, 1.0, 0.1).unwrap();
        assert_eq!(out, mu);
    }

    #[test]
    fn uniform_shift() {
        let mu = AtomicMeasure::from_pairs(&[([0.5, -0.25], 1.0), ([-1.0, 2.0], 3.0)]).unwrap();
        let out = transport_atoms(&mu, &ConstantVelocity([1.0, 0.0]), 0.0, 1.0, 0.1).unwrap();
        for (a, b) in out.atoms().iter().zip(mu.atoms()) {
            assert!((a.position[0] - b.position[0] - 1.0).abs() < 1e-14);
            assert_eq!(a.position[1], b.position[1]);
            assert_eq!(a.weight.to_bits(), b.weight.to_bits());
        }
    }

    #[test]
    fn quarter_turn() {
        let mu = AtomicMeasure::dirac([1.0, 0.0], 1.0).unwrap();
        let (out, trace) =
            transport_atoms_traced(&mu, &RigidRotation { rate: 1.0 }, 0.0, std::f64::consts::FRAC_PI_2, 0.01).unwrap();
        let p = out.atoms()[0].position;
        assert!(p[0].abs() < 1e-8 && (p[1] - 1.0).abs() < 1e-8);
        for s in trace {
            assert!(s.support_radius <= s.support_bound + 1e-8);
        }
    }

    #[test]
    fn bad_step_rejected() {
        assert!(step_count(0.0, 1.0, 0.0).is_err());
        assert!(step_count(1.0, 0.0, 0.1).is_err());
        assert_eq!(step_count(0.0, 1.0, 0.1).unwrap(), 10);
    }
}
