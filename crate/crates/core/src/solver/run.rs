use super::diagnostics::{DiagnosticsRow, Monitor};
use super::etd::phi_functions;
use super::state::{InitialData, SolverState, StepConfig};
use super::stepper::{StepObserver, Stepper};
use crate::error::{BmlError, Result};
use crate::lagrangian::{interior_lattice, FlowMap};
use crate::measures::transport::SAFETY_FRACTION;
use crate::measures::{check_inside, mollify, step_count};
use crate::spectral::{Grid, SpectralField};

/// Multiple of the measured linear undershoot granted to the positivity monitor.
pub const GIBBS_SAFETY: f64 = 10.0;

/// Time samples used to measure the linear undershoot.
const GIBBS_SAMPLES: usize = 16;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub t_final: f64,
    pub step: StepConfig,
    pub sigma: f64,
    /// Keep every `cadence`-th state (0 keeps none); the final state is always kept.
    pub cadence: usize,
    /// Co-integrate a flow map on every `stride`-th node (away from the box
    /// edge) plus the atoms.
    pub flow_stride: Option<usize>,
}

impl RunOptions {
    pub fn new(t_final: f64, step: StepConfig, sigma: f64) -> Self {
        RunOptions {
            t_final,
            step,
            sigma,
            cadence: 0,
            flow_stride: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(BmlError::param("time.T", format!("expected T > 0, got {}", self.t_final)));
        }
        if !(self.sigma > 0.0 && self.sigma < 2.0) {
            return Err(BmlError::param("sigma", format!("expected sigma in ]0, 2[, got {}", self.sigma)));
        }
        self.step.validate()
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub initial: SolverState,
    pub state: SolverState,
    pub rows: Vec<DiagnosticsRow>,
    pub snapshots: Vec<SolverState>,
    pub flow: Option<FlowMap>,
    /// Measured undershoot allowance folded into every row's `eps_pos`.
    pub gibbs: f64,
}

impl RunOutput {
    pub fn all_invariants_hold(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.positivity_ok() && r.energy_ok() && r.mass_ok() && r.support_ok())
    }
}

/// Temperature of the linearized problem (no advection, atoms fixed):
/// `e^{t Delta} theta_0 + t phi_1(-|k|^2 t) mu_n`.
pub fn linear_temperature(theta0: &SpectralField, forcing: &SpectralField, t: f64) -> SpectralField {
    let g = *theta0.grid();
    let n = g.n();
    let mut out = theta0.clone();
    let (a, f) = (theta0.coefficients(), forcing.coefficients());
    for (idx, c) in out.coefficients_mut().iter_mut().enumerate() {
        let z = -g.k_squared(idx / n, idx % n) * t;
        *c = a[idx] * z.exp() + f[idx] * (t * phi_functions(z)[0]);
    }
    out
}

/// `GIBBS_SAFETY` times the largest negative excursion of the linearized
/// temperature over `[0, T]`: the ringing of the mollified forcing under the
/// heat flow, measured once per run.
pub fn gibbs_allowance(initial: &SolverState, t_final: f64) -> Result<f64> {
    let grid: Grid = *initial.grid();
    let forcing = mollify(&initial.atoms, initial.n_mollify, &grid)?.field.to_spectral()?;
    let mut undershoot = 0.0_f64;
    for k in 1..=GIBBS_SAMPLES {
        let t = t_final * k as f64 / GIBBS_SAMPLES as f64;
        let theta = linear_temperature(&initial.theta, &forcing, t).to_real("theta");
        undershoot = undershoot.max(-theta.min());
    }
    Ok(GIBBS_SAFETY * undershoot)
}

pub fn run(data: &InitialData, opts: &RunOptions) -> Result<RunOutput> {
    run_with(data, opts, &mut |_, _| Ok(()))
}

/// Runs to `opts.t_final`, calling `on_step` after every recorded row.
pub fn run_with(
    data: &InitialData,
    opts: &RunOptions,
    on_step: &mut dyn FnMut(&SolverState, &DiagnosticsRow) -> Result<()>,
) -> Result<RunOutput> {
    opts.validate()?;
    let initial = SolverState::new(data, opts.step.n_mollify)?;
    let grid = *initial.grid();
    for a in initial.atoms.atoms() {
        check_inside(a.position, Some(grid.half_length()))?;
    }
    let gibbs = gibbs_allowance(&initial, opts.t_final)?;
    let mut monitor = Monitor::new(&initial, opts.sigma, gibbs)?;
    let steps = step_count(0.0, opts.t_final, opts.step.dt)?;
    let h = opts.t_final / steps as f64;
    let mut cfg = opts.step.clone();
    cfg.dt = h;

    let mut flow = match opts.flow_stride {
        Some(stride) => {
            let lattice = interior_lattice(&grid, stride, 2.0 * SAFETY_FRACTION * grid.half_length())?;
            Some(FlowMap::with_atoms(lattice, &initial.atoms, 0.0))
        }
        None => None,
    };
    let mut stepper = Stepper::new();
    let mut state = initial.clone();
    let first = monitor.record(&state, 0, h)?;
    on_step(&state, &first)?;
    let mut rows = vec![first];
    let mut snapshots = Vec::new();
    if opts.cadence > 0 {
        snapshots.push(state.clone());
    }
    for k in 1..=steps {
        let next = {
            let mut observers: Vec<&mut dyn StepObserver> = Vec::new();
            if let Some(fm) = flow.as_mut() {
                observers.push(fm);
            }
            stepper.step(&state, &cfg, &mut observers)?
        };
        state = next;
        let row = monitor.record(&state, k, h)?;
        on_step(&state, &row)?;
        rows.push(row);
        if opts.cadence > 0 && k % opts.cadence == 0 && k != steps {
            snapshots.push(state.clone());
        }
    }
    if opts.cadence > 0 {
        snapshots.push(state.clone());
    }
    Ok(RunOutput {
        initial,
        state,
        rows,
        snapshots,
        flow,
        gibbs,
    })
}
