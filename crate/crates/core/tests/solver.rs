use std::f64::consts::PI;

use bml::measures::{mollify, AtomicMeasure};
use bml::solver::diagnostics::{write_csv, COLUMNS};
use bml::solver::{
    momentum_residual, recover_pressure, run, InitialData, RunOptions, Scenario, SolverState, StepConfig, Stepper,
};
use bml::spectral::{Grid, RealField, SpectralField};
use bml::BmlError;
use num_complex::Complex64;
use proptest::prelude::*;

fn opts(t: f64, dt: f64, n_mollify: u32) -> RunOptions {
    RunOptions::new(t, StepConfig::new(dt, n_mollify).unwrap(), 0.5)
}

#[test]
fn single_mode_closed_form() {
    // theta = 1 + cos(k x1) never meets the advection: v = (0, v2(x1)) is
    // orthogonal to grad theta and grad omega, so the coupled problem is
    // linear with theta = 1 + e^{-k^2 t} cos(k x1), omega = -k t e^{-k^2 t} sin(k x1)
    let g = Grid::new(64, PI).unwrap();
    let k = 2.0;
    let data = InitialData {
        theta: RealField::from_fn(g, "theta", |x, _| 1.0 + (k * x).cos()),
        omega: RealField::zeros(g, "omega"),
        atoms: AtomicMeasure::empty(),
    };
    let out = run(&data, &opts(0.5, 0.01, 1)).unwrap();
    let t = out.state.t;
    assert!((t - 0.5).abs() < 1e-12);
    let decay = (-k * k * t).exp();
    let theta = RealField::from_fn(g, "e", |x, _| 1.0 + decay * (k * x).cos());
    let omega = RealField::from_fn(g, "e", |x, _| -k * t * decay * (k * x).sin());
    assert!(out.state.theta_field().sub(&theta).unwrap().max_abs() < 1e-8);
    assert!(out.state.omega_field().sub(&omega).unwrap().max_abs() < 1e-8);
}

/// Per-mode Duhamel solution with fixed atoms and no velocity:
/// `theta^ = a e^{-k^2 t} + m (1 - e^{-k^2 t}) / k^2` and
/// `omega^ = i k1 [ (a - m / k^2) t e^{-k^2 t} + (m / k^2)(1 - e^{-k^2 t}) / k^2 ]`.
fn duhamel(theta0: &SpectralField, forcing: &SpectralField, t: f64) -> (SpectralField, SpectralField) {
    let g = *theta0.grid();
    let n = g.n();
    let mut th = vec![Complex64::new(0.0, 0.0); g.len()];
    let mut om = th.clone();
    for i1 in 0..n {
        for i2 in 0..n {
            let idx = g.index(i1, i2);
            let (a, m) = (theta0.coefficients()[idx], forcing.coefficients()[idx]);
            let k1 = if i1 == n / 2 { 0.0 } else { g.wave_index(i1) as f64 * PI / g.half_length() };
            let k2 = g.k_squared(i1, i2);
            if k2 == 0.0 {
                th[idx] = a + m * t;
                continue;
            }
            let e = (-k2 * t).exp();
            let b = m / k2;
            th[idx] = a * e + b * (1.0 - e);
            om[idx] = Complex64::new(0.0, k1) * ((a - b) * (t * e) + b * ((1.0 - e) / k2));
        }
    }
    (SpectralField::new(g, th).unwrap(), SpectralField::new(g, om).unwrap())
}

#[test]
fn frozen_velocity_matches_duhamel() {
    let g = Grid::new(64, 4.0).unwrap();
    let atoms = AtomicMeasure::from_pairs(&[([0.3, -0.2], 1.0), ([-1.0, 1.0], 0.5)]).unwrap();
    let data = InitialData {
        theta: RealField::from_fn(g, "theta", |x, y| (-(x * x + 2.0 * y * y)).exp()),
        omega: RealField::zeros(g, "omega"),
        atoms: atoms.clone(),
    };
    let mut o = opts(0.25, 0.005, 2);
    o.step = o.step.frozen();
    let out = run(&data, &o).unwrap();
    assert_eq!(out.state.atoms, atoms);
    let forcing = mollify(&atoms, 2, &g).unwrap().field.to_spectral().unwrap();
    let (theta, omega) = duhamel(&data.theta.to_spectral().unwrap(), &forcing, out.state.t);
    let scale = theta.to_real("t").max_abs();
    assert!(out.state.theta_field().sub(&theta.to_real("t")).unwrap().max_abs() < 1e-8 * scale);
    assert!(out.state.omega_field().sub(&omega.to_real("w")).unwrap().max_abs() < 1e-8 * scale);
}

#[test]
fn zero_data_stays_zero() {
    let g = Grid::new(32, 4.0).unwrap();
    let data = InitialData {
        theta: RealField::zeros(g, "theta"),
        omega: RealField::zeros(g, "omega"),
        atoms: AtomicMeasure::empty(),
    };
    let out = run(&data, &opts(0.5, 0.05, 1)).unwrap();
    assert!(out.state.theta.coefficients().iter().all(|c| c.norm() == 0.0));
    assert!(out.state.omega.coefficients().iter().all(|c| c.norm() == 0.0));
}

#[test]
fn temperature_integral_grows_by_the_source_mass() {
    let g = Grid::new(64, 8.0).unwrap();
    let data = Scenario::TwoAtom.initial_data(g).unwrap();
    let out = run(&data, &opts(0.5, 0.02, 1)).unwrap();
    let i0 = data.theta.integral();
    // integral of 0.5 exp(-|x|^2) over the plane
    assert!((i0 - 0.5 * PI).abs() < 1e-10);
    let tv = data.atoms.total_variation();
    for row in &out.rows {
        assert!(row.l1_residual <= 1e-6);
        assert!((row.theta_integral - (i0 + row.t * tv)).abs() < 1e-9);
    }
    let last = out.state.theta_field().integral();
    assert!((last - (i0 + out.state.t * tv)).abs() < 1e-9);
    assert!(out.all_invariants_hold());
}

#[test]
fn two_atom_run_is_mirror_symmetric() {
    let g = Grid::new(64, 8.0).unwrap();
    let data = Scenario::TwoAtom.initial_data(g).unwrap();
    let out = run(&data, &opts(0.3, 0.02, 1)).unwrap();
    let (theta, omega) = (out.state.theta_field(), out.state.omega_field());
    let n = g.n();
    let mut worst: f64 = 0.0;
    for i1 in 0..n {
        let m1 = (n - i1) % n;
        for i2 in 0..n {
            worst = worst.max((theta.at(i1, i2) - theta.at(m1, i2)).abs());
            worst = worst.max((omega.at(i1, i2) + omega.at(m1, i2)).abs());
        }
    }
    assert!(worst < 1e-12 * (1.0 + theta.max_abs()), "asymmetry {worst:e}");
    let p = out.state.atoms.positions();
    assert!((p[0][0] + p[1][0]).abs() < 1e-12 && (p[0][1] - p[1][1]).abs() < 1e-12);
}

#[test]
fn negative_initial_temperature_rejected() {
    let g = Grid::new(32, 4.0).unwrap();
    let data = InitialData {
        theta: RealField::from_fn(g, "theta", |x, _| x.sin()),
        omega: RealField::zeros(g, "omega"),
        atoms: AtomicMeasure::empty(),
    };
    assert!(matches!(run(&data, &opts(0.1, 0.01, 1)), Err(BmlError::InvalidInput(_))));
}

#[test]
fn under_resolved_mollifier_rejected() {
    let g = Grid::new(32, 8.0).unwrap();
    let data = Scenario::SingleAtom.initial_data(g).unwrap();
    assert!(matches!(
        run(&data, &opts(0.1, 0.01, 4)),
        Err(BmlError::UnderResolvedMollifier { .. })
    ));
}

#[test]
fn cfl_violation_without_halvings_is_an_error() {
    let g = Grid::new(64, 8.0).unwrap();
    let data = Scenario::RotationTest.initial_data(g).unwrap();
    let mut step = StepConfig::new(1.0, 1).unwrap();
    step.max_halvings = 0;
    assert!(matches!(run(&data, &RunOptions::new(1.0, step, 0.5)), Err(BmlError::Cfl { .. })));
    // with halvings allowed the same step is subdivided and succeeds
    let state = SolverState::new(&data, 1).unwrap();
    let next = Stepper::new().step(&state, &StepConfig::new(1.0, 1).unwrap(), &mut []).unwrap();
    assert!((next.t - 1.0).abs() < 1e-12);
}

#[test]
fn hydrostatic_pressure() {
    // v = 0 and theta = 1 + cos(k x2): grad p balances the varying part of the buoyancy
    let g = Grid::new(32, PI).unwrap();
    let k = 3.0;
    let data = InitialData {
        theta: RealField::from_fn(g, "theta", |_, y| 1.0 + (k * y).cos()),
        omega: RealField::zeros(g, "omega"),
        atoms: AtomicMeasure::empty(),
    };
    let state = SolverState::new(&data, 1).unwrap();
    let p = recover_pressure(&state);
    let exact = RealField::from_fn(g, "p", |_, y| (k * y).sin() / k);
    assert!(p.sub(&exact).unwrap().max_abs() < 1e-13);
}

#[test]
fn taylor_green_pressure() {
    // v = (sin x cos y, -cos x sin y), omega = 2 sin x sin y, p = (cos 2x + cos 2y) / 4
    let g = Grid::new(32, PI).unwrap();
    let data = InitialData {
        theta: RealField::zeros(g, "theta"),
        omega: RealField::from_fn(g, "omega", |x, y| 2.0 * x.sin() * y.sin()),
        atoms: AtomicMeasure::empty(),
    };
    let state = SolverState::new(&data, 1).unwrap();
    let (v1, _) = state.velocity();
    assert!(v1.sub(&RealField::from_fn(g, "v1", |x, y| x.sin() * y.cos())).unwrap().max_abs() < 1e-13);
    let p = recover_pressure(&state);
    let exact = RealField::from_fn(g, "p", |x, y| ((2.0 * x).cos() + (2.0 * y).cos()) / 4.0);
    assert!(p.sub(&exact).unwrap().max_abs() < 1e-13);
}

fn residual_at(dt: f64) -> f64 {
    let g = Grid::new(64, 8.0).unwrap();
    let data = Scenario::RotationTest.initial_data(g).unwrap();
    let cfg = StepConfig::new(dt, 1).unwrap();
    let mut stepper = Stepper::new();
    let mut states = vec![SolverState::new(&data, 1).unwrap()];
    let steps = (0.2 / dt).round() as usize;
    for _ in 0..steps {
        let next = stepper.step(states.last().unwrap(), &cfg, &mut []).unwrap();
        states.push(next);
    }
    let m = states.len() / 2;
    momentum_residual(&states[m - 1], &states[m], &states[m + 1]).unwrap()
}

#[test]
fn momentum_residual_is_second_order() {
    let r: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| residual_at(dt)).collect();
    for w in r.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.8, "observed order {order} from {r:?}");
    }
}

#[test]
fn identical_runs_write_identical_bytes() {
    let g = Grid::new(64, 8.0).unwrap();
    let data = Scenario::RotationTest.initial_data(g).unwrap();
    let bytes = || {
        let out = run(&data, &opts(0.2, 0.02, 1)).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &out.rows).unwrap();
        buf
    };
    let a = bytes();
    assert_eq!(a, bytes());
    let text = String::from_utf8(a).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, COLUMNS.join(","));
    assert_eq!(text.lines().count(), 12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn source_mass_identity_for_random_atoms(
        x in -2.0f64..2.0, y in -2.0f64..2.0, w in 0.1f64..3.0, w2 in 0.0f64..1.0,
    ) {
        let g = Grid::new(32, 4.0).unwrap();
        let atoms = AtomicMeasure::from_pairs(&[([x, y], w), ([-y, x], w2)]).unwrap();
        let data = InitialData {
            theta: RealField::zeros(g, "theta"),
            omega: RealField::zeros(g, "omega"),
            atoms,
        };
        let out = run(&data, &opts(0.2, 0.02, 1)).unwrap();
        for row in &out.rows {
            prop_assert!(row.l1_residual <= 1e-6);
            prop_assert_eq!(row.tv_mu.to_bits(), (w + w2).to_bits());
            prop_assert!(row.support_radius <= row.support_bound + 1e-8);
        }
    }
}
