//! One solver step: ETDRK3 for temperature and vorticity, RK4 for atoms,
//! both driven by the same three velocity samples.

use std::collections::HashMap;
use std::sync::Arc;

use super::etd::{stage_a, stage_b, stage_final, EtdCoefficients};
use super::state::{SolverState, StepConfig};
use crate::error::{BmlError, Result};
use crate::lagrangian::{chain_timeline, FlowMap};
use crate::measures::{mollify, transport_step, AtomicMeasure};
use crate::spectral::ops::dealias_in_place;
use crate::spectral::{Grid, RealField, SpectralField};
use crate::velocity::{SpectralVelocity, StepVelocity, VelocityField};

/// Receives the velocity of every accepted step, e.g. a flow map that must
/// follow the same characteristics as the atoms.
pub trait StepObserver {
    fn observe(&mut self, velocity: &StepVelocity, t: f64, h: f64) -> Result<()>;
}

impl StepObserver for FlowMap {
    fn observe(&mut self, velocity: &StepVelocity, t: f64, h: f64) -> Result<()> {
        if (self.time() - t).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(BmlError::MismatchedTimeline(format!(
                "flow map at t = {} cannot take a step starting at {t}",
                self.time()
            )));
        }
        self.advance(velocity, h)
    }
}

/// Right-hand side pieces evaluated at one stage.
struct Stage {
    velocity: SpectralVelocity,
    n_theta: SpectralField,
    n_omega: SpectralField,
    vmax: f64,
}

#[derive(Default)]
pub struct Stepper {
    cache: HashMap<(usize, u64, u64), Arc<EtdCoefficients>>,
}

fn advection(v: &(RealField, RealField), f: &SpectralField) -> SpectralField {
    let d1 = f.partial(0).to_real("d1");
    let d2 = f.partial(1).to_real("d2");
    let (v1, v2) = (v.0.values(), v.1.values());
    let values: Vec<f64> = d1
        .values()
        .iter()
        .zip(d2.values())
        .enumerate()
        .map(|(i, (a, b))| v1[i] * a + v2[i] * b)
        .collect();
    let product = RealField::new(*f.grid(), values, "advection").expect("grid length");
    let mut out = product.to_spectral_unchecked();
    dealias_in_place(&mut out);
    out
}

fn zero_velocity(grid: &Grid) -> SpectralVelocity {
    SpectralVelocity::new(SpectralField::zeros(*grid), SpectralField::zeros(*grid)).expect("same grid")
}

impl Stepper {
    pub fn new() -> Self {
        Self::default()
    }

    fn coefficients(&mut self, grid: &Grid, h: f64) -> Arc<EtdCoefficients> {
        self.cache
            .entry((grid.n(), grid.half_length().to_bits(), h.to_bits()))
            .or_insert_with(|| Arc::new(EtdCoefficients::new(grid, h)))
            .clone()
    }

    fn stage(
        &self,
        theta: &SpectralField,
        omega: &SpectralField,
        atoms: &AtomicMeasure,
        cfg: &StepConfig,
    ) -> Result<Stage> {
        let grid = *theta.grid();
        let forcing = mollify(atoms, cfg.n_mollify, &grid)?.field.to_spectral_unchecked();
        let buoyancy = theta.partial(0);
        if cfg.frozen_velocity {
            return Ok(Stage {
                velocity: zero_velocity(&grid),
                n_theta: forcing,
                n_omega: buoyancy,
                vmax: 0.0,
            });
        }
        let velocity = SpectralVelocity::from_vorticity(omega)?;
        let [s1, s2] = velocity.components();
        let v = (s1.to_real("v1"), s2.to_real("v2"));
        let vmax = v
            .0
            .values()
            .iter()
            .zip(v.1.values())
            .fold(0.0_f64, |m, (a, b)| m.max(a.hypot(*b)));
        let adv_theta = advection(&v, theta);
        let adv_omega = advection(&v, omega);
        let n_theta = forcing.sub(&adv_theta)?;
        let n_omega = buoyancy.sub(&adv_omega)?;
        Ok(Stage {
            velocity,
            n_theta,
            n_omega,
            vmax,
        })
    }

    /// Advances `state` by `cfg.dt`, halving the step while the CFL bound fails.
    pub fn step(&mut self, state: &SolverState, cfg: &StepConfig, observers: &mut [&mut dyn StepObserver]) -> Result<SolverState> {
        cfg.validate()?;
        let next = self.advance(state, cfg.dt, 0, cfg, observers)?;
        if !next.is_finite() {
            return Err(BmlError::NumericalAbort {
                t: next.t,
                reason: "non-finite values after step".into(),
                last_valid: Box::new(state.clone()),
            });
        }
        Ok(next)
    }

    fn advance(
        &mut self,
        state: &SolverState,
        h: f64,
        depth: u32,
        cfg: &StepConfig,
        observers: &mut [&mut dyn StepObserver],
    ) -> Result<SolverState> {
        let first = self.stage(&state.theta, &state.omega, &state.atoms, cfg)?;
        let cell = state.grid().spacing();
        if h * first.vmax > cfg.cfl_cap * cell {
            if depth >= cfg.max_halvings {
                return Err(BmlError::Cfl {
                    halvings: depth,
                    dt: h,
                    vmax: first.vmax,
                });
            }
            let mid = self.advance(state, 0.5 * h, depth + 1, cfg, observers)?;
            return self.advance(&mid, 0.5 * h, depth + 1, cfg, observers);
        }
        self.advance_accepted(state, h, first, cfg, observers)
    }

    fn advance_accepted(
        &mut self,
        state: &SolverState,
        h: f64,
        first: Stage,
        cfg: &StepConfig,
        observers: &mut [&mut dyn StepObserver],
    ) -> Result<SolverState> {
        let grid = *state.grid();
        let c = self.coefficients(&grid, h);
        let positions = state.atoms.positions();

        let k1: Vec<[f64; 2]> = positions
            .iter()
            .map(|&p| first.velocity.eval_value(p))
            .collect::<Result<_>>()?;
        let xa: Vec<[f64; 2]> = positions
            .iter()
            .zip(&k1)
            .map(|(p, k)| [p[0] + 0.5 * h * k[0], p[1] + 0.5 * h * k[1]])
            .collect();
        let theta_a = stage_a(&c, &state.theta, &first.n_theta);
        let omega_a = stage_a(&c, &state.omega, &first.n_omega);
        let mid = self.stage(&theta_a, &omega_a, &state.atoms.with_positions(&xa)?, cfg)?;

        let ka: Vec<[f64; 2]> = xa
            .iter()
            .map(|&p| mid.velocity.eval_value(p))
            .collect::<Result<_>>()?;
        let xb: Vec<[f64; 2]> = positions
            .iter()
            .zip(k1.iter().zip(&ka))
            .map(|(p, (k1, ka))| [p[0] + h * (2.0 * ka[0] - k1[0]), p[1] + h * (2.0 * ka[1] - k1[1])])
            .collect();
        let theta_b = stage_b(&c, &state.theta, &first.n_theta, &mid.n_theta);
        let omega_b = stage_b(&c, &state.omega, &first.n_omega, &mid.n_omega);
        let last = self.stage(&theta_b, &omega_b, &state.atoms.with_positions(&xb)?, cfg)?;

        let theta = stage_final(&c, &state.theta, &first.n_theta, &mid.n_theta, &last.n_theta);
        let omega = stage_final(&c, &state.omega, &first.n_omega, &mid.n_omega, &last.n_omega).without_mean();

        let velocity = StepVelocity {
            start: state.t,
            step: h,
            samples: [first.velocity, mid.velocity, last.velocity],
        };
        let (atoms, advance) = transport_step(&state.atoms, &velocity, state.t, h)?;
        for obs in observers.iter_mut() {
            obs.observe(&velocity, state.t, h)?;
        }
        Ok(SolverState {
            t: state.t + h,
            theta,
            omega,
            atoms,
            n_mollify: state.n_mollify,
            support_bound: state.support_bound + advance,
            timeline: chain_timeline(state.timeline, velocity.fingerprint(), state.t, h),
            steps: state.steps + 1,
        })
    }
}
