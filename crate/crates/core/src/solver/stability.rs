//! Empirical stability: the same data run at two resolutions, and growth of
//! a small velocity perturbation.

use super::run::{run, RunOptions, RunOutput};
use super::scenario::Scenario;
use super::state::{InitialData, SolverState, StepConfig};
use crate::error::{BmlError, Result};
use crate::measures::bl_distance;
use crate::spectral::{Grid, RealField, SpectralField};

/// One resolution of a comparison: grid size and time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    pub n: usize,
    pub dt: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityReport {
    pub coarse: Resolution,
    pub fine: Resolution,
    pub atoms_bl: f64,
    pub theta_l2: f64,
    pub omega_l2: f64,
}

impl StabilityReport {
    /// All three distances strictly below those of `other`.
    pub fn improves_on(&self, other: &StabilityReport) -> bool {
        self.atoms_bl < other.atoms_bl && self.theta_l2 < other.theta_l2 && self.omega_l2 < other.omega_l2
    }
}

/// L2 distance of two spectral fields, compared on the coarser grid.
pub fn l2_distance(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    let (coarse, fine) = if a.grid().n() <= b.grid().n() { (a, b) } else { (b, a) };
    let fine = fine.resample(*coarse.grid())?;
    Ok(coarse.sub(&fine)?.l2_norm())
}

pub fn compare_states(a: &SolverState, b: &SolverState) -> Result<(f64, f64, f64)> {
    Ok((
        bl_distance(&a.atoms, &b.atoms)?,
        l2_distance(&a.theta, &b.theta)?,
        l2_distance(&a.omega, &b.omega)?,
    ))
}

/// Settings shared by the runs of a comparison.
#[derive(Clone, Debug)]
pub struct StabilitySetup {
    pub scenario: Scenario,
    pub half_length: f64,
    pub n_mollify: u32,
    pub sigma: f64,
    pub t_final: f64,
}

impl StabilitySetup {
    pub fn run_at(&self, res: Resolution) -> Result<RunOutput> {
        let grid = Grid::new(res.n, self.half_length)?;
        let data = self.scenario.initial_data(grid)?;
        let opts = RunOptions::new(self.t_final, StepConfig::new(res.dt, self.n_mollify)?, self.sigma);
        run(&data, &opts)
    }
}

/// Runs both resolutions and reports the distances between final states.
pub fn stability_test(setup: &StabilitySetup, a: Resolution, b: Resolution) -> Result<StabilityReport> {
    let ra = setup.run_at(a)?;
    let rb = setup.run_at(b)?;
    let (atoms_bl, theta_l2, omega_l2) = compare_states(&ra.state, &rb.state)?;
    let (coarse, fine) = if a.n <= b.n { (a, b) } else { (b, a) };
    Ok(StabilityReport {
        coarse,
        fine,
        atoms_bl,
        theta_l2,
        omega_l2,
    })
}

/// Consecutive refinement pairs `(n, dt), (2n, dt/2), (4n, dt/4), ...`; runs
/// each resolution once.
pub fn refinement_pairs(setup: &StabilitySetup, base: Resolution, levels: usize) -> Result<Vec<StabilityReport>> {
    if levels < 2 {
        return Err(BmlError::param("levels", "need at least two resolutions"));
    }
    let resolutions: Vec<Resolution> = (0..levels)
        .map(|k| Resolution {
            n: base.n << k,
            dt: base.dt / (1u64 << k) as f64,
        })
        .collect();
    let finals: Vec<SolverState> = resolutions
        .iter()
        .map(|&r| setup.run_at(r).map(|o| o.state))
        .collect::<Result<_>>()?;
    finals
        .windows(2)
        .zip(resolutions.windows(2))
        .map(|(s, r)| {
            let (atoms_bl, theta_l2, omega_l2) = compare_states(&s[0], &s[1])?;
            Ok(StabilityReport {
                coarse: r[0],
                fine: r[1],
                atoms_bl,
                theta_l2,
                omega_l2,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthReport {
    pub initial_distance: f64,
    pub final_distance: f64,
    /// `ln(d_T / d_0) / T`.
    pub rate: f64,
}

/// Adds `epsilon` times a unit-`L2` velocity mode to the data and measures
/// how far the two solutions drift apart (velocity plus temperature, L2).
pub fn perturbation_growth(data: &InitialData, opts: &RunOptions, epsilon: f64) -> Result<GrowthReport> {
    let grid = *data.grid();
    let l = grid.half_length();
    let k = std::f64::consts::PI / l;
    let mode = RealField::from_fn(grid, "omega", |x, y| (k * x).sin() * (k * y).sin());
    let mode_state = SolverState::new(
        &InitialData {
            theta: RealField::zeros(grid, "theta"),
            omega: mode.clone(),
            atoms: crate::measures::AtomicMeasure::empty(),
        },
        opts.step.n_mollify,
    )?;
    let (m1, m2) = mode_state.velocity_spectral();
    let norm = ((m1.power() + m2.power()) * grid.area()).sqrt();
    let mut perturbed = data.clone();
    perturbed.omega = data.omega.add(&mode.scale(epsilon / norm))?;
    let a = run(data, opts)?;
    let b = run(&perturbed, opts)?;
    let distance = |x: &SolverState, y: &SolverState| -> Result<f64> {
        let (x1, x2) = x.velocity_spectral();
        let (y1, y2) = y.velocity_spectral();
        let dv = ((x1.sub(&y1)?.power() + x2.sub(&y2)?.power()) * grid.area()).sqrt();
        Ok(dv + x.theta.sub(&y.theta)?.l2_norm())
    };
    let d0 = distance(&a.initial, &b.initial)?;
    let d1 = distance(&a.state, &b.state)?;
    Ok(GrowthReport {
        initial_distance: d0,
        final_distance: d1,
        rate: (d1 / d0).ln() / opts.t_final,
    })
}
