//! Pseudo-spectral Boussinesq solver in vorticity form,
//!
//! ```text
//! d_t theta + v.grad theta - Delta theta = mu_n
//! d_t omega + v.grad omega - Delta omega = d_1 theta,    v = grad^perp (-Delta)^{-1} omega
//! ```
//!
//! with the atoms of `mu` carried along the same velocity.

pub mod diagnostics;
pub mod etd;
pub mod ladder;
pub mod pressure;
pub mod run;
pub mod scenario;
pub mod stability;
pub mod state;
pub mod stepper;

pub use diagnostics::{monitor_energy, monitor_mass_identity, monitor_positivity, DiagnosticsRow, Monitor};
pub use ladder::{ladder, LadderReport, LadderRun};
pub use pressure::{momentum_residual, recover_pressure};
pub use run::{gibbs_allowance, linear_temperature, run, run_with, RunOptions, RunOutput};
pub use scenario::{Scenario, StandardSetup, STANDARD};
pub use stability::{perturbation_growth, refinement_pairs, stability_test, Resolution, StabilityReport, StabilitySetup};
pub use state::{InitialData, SolverState, StepConfig};
pub use stepper::{StepObserver, Stepper};
