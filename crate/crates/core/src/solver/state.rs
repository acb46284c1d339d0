use crate::error::{BmlError, Result};
use crate::measures::{mollify, AtomicMeasure, MollifiedDensity};
use crate::spectral::{biot_savart_spectral, Grid, RealField, SpectralField};

/// Initial temperature, vorticity and source atoms.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub theta: RealField,
    pub omega: RealField,
    pub atoms: AtomicMeasure,
}

impl InitialData {
    pub fn grid(&self) -> &Grid {
        self.theta.grid()
    }

    pub fn validate(&self) -> Result<()> {
        self.theta.grid().ensure_same(self.omega.grid())?;
        self.theta.ensure_finite()?;
        self.omega.ensure_finite()?;
        let min = self.theta.min();
        if min < 0.0 {
            return Err(BmlError::InvalidInput(format!(
                "initial temperature must be nonnegative; minimum is {min:e}"
            )));
        }
        Ok(())
    }
}

/// Solution at one instant. Temperature and vorticity are kept in spectral
/// form; grid fields are produced on demand.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub t: f64,
    pub theta: SpectralField,
    pub omega: SpectralField,
    pub atoms: AtomicMeasure,
    pub n_mollify: u32,
    /// `R_0 + int max |atom velocity|` accumulated by the atom integrator.
    pub support_bound: f64,
    /// Identifier of the velocity timeline that moved the atoms.
    pub timeline: u64,
    pub steps: usize,
}

impl SolverState {
    pub fn new(data: &InitialData, n_mollify: u32) -> Result<Self> {
        data.validate()?;
        crate::measures::mollify::check_resolution(n_mollify, data.grid())?;
        Ok(SolverState {
            t: 0.0,
            theta: data.theta.to_spectral()?,
            omega: data.omega.to_spectral()?.without_mean(),
            atoms: data.atoms.clone(),
            n_mollify,
            support_bound: data.atoms.support_radius(),
            timeline: 0,
            steps: 0,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.theta.grid()
    }

    pub fn theta_field(&self) -> RealField {
        self.theta.to_real("theta")
    }

    pub fn omega_field(&self) -> RealField {
        self.omega.to_real("omega")
    }

    pub fn velocity_spectral(&self) -> (SpectralField, SpectralField) {
        biot_savart_spectral(&self.omega)
    }

    pub fn velocity(&self) -> (RealField, RealField) {
        let (a, b) = self.velocity_spectral();
        (a.to_real("v1"), b.to_real("v2"))
    }

    pub fn mu_density(&self) -> Result<MollifiedDensity> {
        mollify(&self.atoms, self.n_mollify, self.grid())
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite()
            && self.omega.is_finite()
            && self
                .atoms
                .atoms()
                .iter()
                .all(|a| a.position[0].is_finite() && a.position[1].is_finite())
    }
}

/// Time-step settings.
#[derive(Clone, Debug, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub n_mollify: u32,
    /// Largest admissible `dt |v|_max / cell`.
    pub cfl_cap: f64,
    pub max_halvings: u32,
    /// Diagnostic mode: velocity forced to zero.
    pub frozen_velocity: bool,
}

impl StepConfig {
    pub fn new(dt: f64, n_mollify: u32) -> Result<Self> {
        let cfg = StepConfig {
            dt,
            n_mollify,
            cfl_cap: 0.5,
            max_halvings: 8,
            frozen_velocity: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn frozen(mut self) -> Self {
        self.frozen_velocity = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(BmlError::param("time.dt", format!("expected dt > 0, got {}", self.dt)));
        }
        if !(self.cfl_cap > 0.0) {
            return Err(BmlError::param("cfl_cap", "must be positive"));
        }
        if self.n_mollify == 0 {
            return Err(BmlError::param("mollify.n", "must be at least 1"));
        }
        Ok(())
    }
}
