//! Per-step monitors.
//!
//! On the periodic box advection and diffusion integrate to zero, so the
//! temperature integral obeys `int theta(t) = int theta_0 + t TV(mu)` with
//! the mollified forcing carrying exactly the atom mass. The energy monitor
//! checks `d/dt |omega|^2 + |grad omega|^2 <= |theta|^2` in a centered
//! discrete form: the derivative is a difference quotient over the step and
//! the other two terms are averaged over its end points, both accurate to
//! `O(dt^2)`.

use std::io::Write;

use super::state::SolverState;
use crate::error::Result;
use crate::littlewood_paley::besov::besov_norm_spectral;
use crate::littlewood_paley::BesovParams;
use crate::numfmt::sci17;
use crate::spectral::norms::lp_norm;
use crate::spectral::SpectralField;

/// Slack factor of the energy monitor: `tol_energy = ENERGY_SLACK * dt^2`.
pub const ENERGY_SLACK: f64 = 50.0;

/// Relative part of the positivity tolerance.
pub const POSITIVITY_RELATIVE: f64 = 1e-8;

/// Ceiling on the mass identity residual.
pub const MASS_TOLERANCE: f64 = 1e-6;

pub const COLUMNS: [&str; 19] = [
    "t",
    "step",
    "dt",
    "tv_mu",
    "support_radius",
    "support_bound",
    "theta_min",
    "theta_integral",
    "theta_L1",
    "theta_L2",
    "theta_Besov",
    "v_L2",
    "v_max",
    "omega_L2",
    "grad_omega_L2",
    "energy_ineq_margin",
    "L1_identity_residual",
    "eps_pos",
    "tol_energy",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub step: usize,
    pub dt: f64,
    pub tv_mu: f64,
    pub support_radius: f64,
    pub support_bound: f64,
    pub theta_min: f64,
    pub theta_integral: f64,
    pub theta_l1: f64,
    pub theta_l2: f64,
    pub theta_besov: f64,
    pub v_l2: f64,
    pub v_max: f64,
    pub omega_l2: f64,
    pub grad_omega_l2: f64,
    pub energy_margin: f64,
    pub l1_residual: f64,
    pub eps_pos: f64,
    pub tol_energy: f64,
}

impl DiagnosticsRow {
    pub fn values(&self) -> [f64; 19] {
        [
            self.t,
            self.step as f64,
            self.dt,
            self.tv_mu,
            self.support_radius,
            self.support_bound,
            self.theta_min,
            self.theta_integral,
            self.theta_l1,
            self.theta_l2,
            self.theta_besov,
            self.v_l2,
            self.v_max,
            self.omega_l2,
            self.grad_omega_l2,
            self.energy_margin,
            self.l1_residual,
            self.eps_pos,
            self.tol_energy,
        ]
    }

    pub fn positivity_ok(&self) -> bool {
        self.theta_min >= -self.eps_pos
    }

    pub fn energy_ok(&self) -> bool {
        self.energy_margin >= -self.tol_energy
    }

    pub fn mass_ok(&self) -> bool {
        self.l1_residual <= MASS_TOLERANCE
    }

    pub fn support_ok(&self) -> bool {
        self.support_radius <= self.support_bound + 1e-8
    }
}

/// Field norms of one state; history-free.
#[derive(Clone, Copy, Debug)]
struct Snapshot {
    theta_l2_sq: f64,
    omega_l2_sq: f64,
    grad_omega_sq: f64,
}

fn gradient_power(s: &SpectralField) -> f64 {
    let g = s.grid();
    let n = g.n();
    let mut sum = 0.0;
    for i1 in 0..n {
        let k1 = g.derivative_wavenumber(i1);
        for i2 in 0..n {
            let k2 = g.derivative_wavenumber(i2);
            sum += (k1 * k1 + k2 * k2) * s.coefficients()[i1 * n + i2].norm_sqr();
        }
    }
    sum * g.area()
}

/// Margin at a single instant, with `d/dt |omega|^2` read off the equation
/// instead of a difference quotient (used for the first row).
fn instantaneous_margin(state: &SolverState, snap: &Snapshot) -> f64 {
    // d/dt |omega|^2 = -2 |grad omega|^2 + 2 int omega d1 theta
    let d1 = state.theta.partial(0);
    let work: f64 = state
        .omega
        .coefficients()
        .iter()
        .zip(d1.coefficients())
        .map(|(a, b)| (a.conj() * b).re)
        .sum::<f64>()
        * state.grid().area();
    let derivative = -2.0 * snap.grad_omega_sq + 2.0 * work;
    snap.theta_l2_sq - derivative - snap.grad_omega_sq
}

/// Builds rows step by step; keeps the previous state's norms.
#[derive(Clone, Debug)]
pub struct Monitor {
    pub besov: BesovParams,
    pub eps_pos: f64,
    pub energy_slack: f64,
    theta0_integral: f64,
    tv0: f64,
    previous: Option<(f64, Snapshot)>,
}

impl Monitor {
    /// `sigma` selects the Besov monitor `B^{2 - sigma}_{4/(4 - sigma), inf}`.
    pub fn new(initial: &SolverState, sigma: f64, gibbs: f64) -> Result<Self> {
        let besov = BesovParams::new(2.0 - sigma, 4.0 / (4.0 - sigma), f64::INFINITY)?;
        Ok(Monitor {
            besov,
            eps_pos: gibbs,
            energy_slack: ENERGY_SLACK,
            theta0_integral: initial.theta.mean() * initial.grid().area(),
            tv0: initial.atoms.total_variation(),
            previous: None,
        })
    }

    pub fn record(&mut self, state: &SolverState, step: usize, dt: f64) -> Result<DiagnosticsRow> {
        let grid = *state.grid();
        let theta = state.theta_field();
        let (v1, v2) = state.velocity_spectral();
        let (r1, r2) = (v1.to_real("v1"), v2.to_real("v2"));
        let v_max = r1
            .values()
            .iter()
            .zip(r2.values())
            .fold(0.0_f64, |m, (a, b)| m.max(a.hypot(*b)));
        let snap = Snapshot {
            theta_l2_sq: state.theta.power() * grid.area(),
            omega_l2_sq: state.omega.power() * grid.area(),
            grad_omega_sq: gradient_power(&state.omega),
        };
        let energy_margin = match self.previous {
            Some((t_prev, prev)) if state.t > t_prev => {
                let h = state.t - t_prev;
                let rate = (snap.omega_l2_sq - prev.omega_l2_sq) / h;
                0.5 * (snap.theta_l2_sq + prev.theta_l2_sq) - rate - 0.5 * (snap.grad_omega_sq + prev.grad_omega_sq)
            }
            _ => instantaneous_margin(state, &snap),
        };
        self.previous = Some((state.t, snap));
        let theta_integral = state.theta.mean() * grid.area();
        let expected = self.theta0_integral + state.t * self.tv0;
        let l1_residual = (theta_integral - expected).abs() / (self.theta0_integral.abs() + state.t * self.tv0 + 1.0);
        let theta_max = theta.max_abs();
        Ok(DiagnosticsRow {
            t: state.t,
            step,
            dt,
            tv_mu: state.atoms.total_variation(),
            support_radius: state.atoms.support_radius(),
            support_bound: state.support_bound,
            theta_min: theta.min(),
            theta_integral,
            theta_l1: lp_norm(&theta, 1.0),
            theta_l2: snap.theta_l2_sq.sqrt(),
            theta_besov: besov_norm_spectral(&state.theta, self.besov)?,
            v_l2: ((v1.power() + v2.power()) * grid.area()).sqrt(),
            v_max,
            omega_l2: snap.omega_l2_sq.sqrt(),
            grad_omega_l2: snap.grad_omega_sq.sqrt(),
            energy_margin,
            l1_residual,
            eps_pos: POSITIVITY_RELATIVE * theta_max + self.eps_pos,
            tol_energy: self.energy_slack * dt * dt,
        })
    }
}

/// Residual `|int theta(t) - int theta_0 - t TV| / (int theta_0 + t TV + 1)`.
pub fn monitor_mass_identity(row: &DiagnosticsRow, theta0_integral: f64, tv0: f64) -> f64 {
    (row.theta_integral - theta0_integral - row.t * tv0).abs() / (theta0_integral.abs() + row.t * tv0 + 1.0)
}

pub fn monitor_energy(row: &DiagnosticsRow) -> f64 {
    row.energy_margin
}

pub fn monitor_positivity(row: &DiagnosticsRow) -> f64 {
    row.theta_min
}

pub fn write_csv(out: &mut impl Write, rows: &[DiagnosticsRow]) -> Result<()> {
    writeln!(out, "{}", COLUMNS.join(","))?;
    for row in rows {
        let cells: Vec<String> = row
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 1 { row.step.to_string() } else { sci17(*v) })
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
