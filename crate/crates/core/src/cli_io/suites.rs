//! Verification suites behind `bml verify`.
//!
//! Each suite records named margins (nonnegative means satisfied) and fails
//! when any margin is negative. Corpora come from the configured seed.

use std::path::Path;
use std::time::Instant;

use super::config::{RunConfig, Suite};
use super::manifest::{Manifest, SuiteResult};
use super::output::{write_diagnostics, write_verify_csv, VerifyRow};
use crate::corpus::{gaussian_family, random_divergence_free, random_field, random_measure, random_pairs, rng};
use crate::error::Result;
use crate::lagrangian::{
    gradient_bound_check, integrate_flow, interior_lattice, lagrangian_source_check, neumann_inverse, TransportRecord,
    DEFAULT_TERMS,
};
use crate::littlewood_paley::estimates::ratio;
use crate::littlewood_paley::{
    bony_terms_all, decompose_default, direct_block, heat_smoothing_check, interpolation_index, log_interp_check,
    verify_product_estimate, BesovParams, BonyFault, CorpusPair, DyadicPartition, ForcingTimeline, ProductVariant,
};
use crate::measures::{bl_distance, transport_atoms_traced, AtomicMeasure};
use crate::solver::{
    ladder, perturbation_growth, refinement_pairs, run, LadderReport, Resolution, RunOptions, RunOutput, Scenario, StabilitySetup, StepConfig,
};
use crate::spectral::{dealiased_product, Grid, RealField};
use crate::velocity::SpectralVelocity;

/// Deliberate defects for testing the harness itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Flips the sign of the remainder term in the Bony regrouping.
    BonyRemainderSign,
}

/// Interpolation and product parameters tied to `sigma`: `s = sigma`,
/// `p = 4 / (4 - sigma)`.
fn indices(cfg: &RunConfig) -> (f64, f64) {
    let s = cfg.sigma.min(0.99);
    (s, 4.0 / (4.0 - cfg.sigma))
}

fn refinement_margin(c_coarse: f64, c_fine: f64) -> f64 {
    if !(c_coarse.is_finite() && c_fine.is_finite()) || c_coarse <= 0.0 || c_fine <= 0.0 {
        return -1.0;
    }
    2.0 - (c_coarse / c_fine).max(c_fine / c_coarse)
}

fn partition_suite(cfg: &RunConfig, r: &mut SuiteResult) -> Result<()> {
    let mut grids = vec![64, cfg.verify.grids[0], cfg.verify.grids[1]];
    grids.dedup();
    let mut gen = rng(cfg.seed);
    let mut worst_defect: f64 = 0.0;
    let mut worst_rec: f64 = 0.0;
    for n in grids {
        let g = Grid::new(n, cfg.grid.half_length)?;
        worst_defect = worst_defect.max(DyadicPartition::for_grid(&g)?.partition_defect());
        for _ in 0..cfg.verify.fields {
            let f = random_field(g, n as i64 / 2, 0.5, &mut gen);
            let rec = decompose_default(&f)?.reconstruct();
            let err = rec.sub(&f)?.to_spectral()?.l2_norm() / f.to_spectral()?.l2_norm();
            worst_rec = worst_rec.max(err);
        }
    }
    r.check("partition_defect", 1e-12 - worst_defect);
    r.check("reconstruction", 1e-10 - worst_rec);
    Ok(())
}

fn bony_suite(cfg: &RunConfig, fault: Fault, r: &mut SuiteResult) -> Result<()> {
    let g = Grid::new(cfg.verify.grids[0], cfg.grid.half_length)?;
    let fault = match fault {
        Fault::BonyRemainderSign => BonyFault::FlipRemainder,
        Fault::None => BonyFault::None,
    };
    let band = g.n() as i64 / 4;
    let mut worst: f64 = 0.0;
    for pair in random_pairs(g, cfg.verify.corpus, band, cfg.seed ^ 0xB0) {
        let v = (&pair.v1, &pair.v2);
        let scale = {
            let a = dealiased_product(&pair.v1, &crate::spectral::gradient(&pair.theta)?.0)?;
            let b = dealiased_product(&pair.v2, &crate::spectral::gradient(&pair.theta)?.1)?;
            a.add(&b)?.l2_norm()
        };
        for terms in bony_terms_all(v, &pair.theta, fault)? {
            let direct = direct_block(v, &pair.theta, terms.q)?;
            let err = terms.sum().sub(&direct)?.to_spectral()?.l2_norm();
            worst = worst.max(err / scale);
        }
    }
    r.check("bony_identity", 1e-9 - worst);
    Ok(())
}

fn product_suite(cfg: &RunConfig, r: &mut SuiteResult, rows: &mut Vec<VerifyRow>) -> Result<()> {
    let (s, p) = indices(cfg);
    let coarse = Grid::new(cfg.verify.grids[0], cfg.grid.half_length)?;
    let fine = Grid::new(cfg.verify.grids[1], cfg.grid.half_length)?;
    let corpus = random_pairs(coarse, cfg.verify.corpus, coarse.n() as i64 / 6, cfg.seed ^ 0x9D);
    let refined: Vec<CorpusPair> = corpus
        .iter()
        .map(|c| {
            let up = |f: &RealField| f.to_spectral().and_then(|x| x.resample(fine)).map(|x| x.to_real(f.label().to_string()));
            Ok(CorpusPair {
                v1: up(&c.v1)?,
                v2: up(&c.v2)?,
                theta: up(&c.theta)?,
            })
        })
        .collect::<Result<_>>()?;
    for variant in [ProductVariant::Negative, ProductVariant::Positive, ProductVariant::SelfAdvection] {
        let a = verify_product_estimate(&corpus, variant, s, p)?;
        let b = verify_product_estimate(&refined, variant, s, p)?;
        rows.extend(a.rows.iter().chain(&b.rows).map(VerifyRow::from));
        let k = variant.number();
        r.note(&format!("product{k}_constant_coarse"), a.fitted_constant);
        r.note(&format!("product{k}_constant_fine"), b.fitted_constant);
        r.check(&format!("product{k}_refinement"), refinement_margin(a.fitted_constant, b.fitted_constant));
    }
    Ok(())
}

fn log_interp_suite(cfg: &RunConfig, r: &mut SuiteResult, rows: &mut Vec<VerifyRow>) -> Result<()> {
    let (s, p) = indices(cfg);
    let d = 2.0;
    let a = 2.0 + d - s - d / p;
    let first = interpolation_index(1.0, 1.0, s, p, d) == 2;
    let boundary = interpolation_index(1.0, 2f64.powf(a), s, p, d) == 2;
    r.check("n_first_branch", if first { 0.0 } else { -1.0 });
    r.check("n_branch_boundary", if boundary { 0.0 } else { -1.0 });
    let mut constants = Vec::new();
    for &n in &cfg.verify.grids {
        let g = Grid::new(n, cfg.grid.half_length)?;
        let mut c: f64 = 0.0;
        for (id, f) in gaussian_family(g, cfg.verify.gaussians, 0.4, 2.0, cfg.seed ^ 0x16).iter().enumerate() {
            let rep = log_interp_check(f, s, p)?;
            c = c.max(rep.ratio());
            rows.push(VerifyRow {
                id,
                variant: "log_interp".into(),
                lhs: rep.lhs,
                rhs: rep.rhs,
                ratio: rep.ratio(),
                grid_n: n,
            });
        }
        constants.push(c);
    }
    r.note("log_interp_constant_coarse", constants[0]);
    r.note("log_interp_constant_fine", constants[1]);
    r.check("log_interp_refinement", refinement_margin(constants[0], constants[1]));
    Ok(())
}

fn heat_suite(cfg: &RunConfig, r: &mut SuiteResult, rows: &mut Vec<VerifyRow>) -> Result<()> {
    let (s, p) = (1.0 - cfg.sigma.min(0.99), 4.0 / (4.0 - cfg.sigma));
    let t_final = 1.0;
    let l = cfg.grid.half_length;
    let g = Grid::new(cfg.verify.grids[0], l)?;
    let k = 3.0 * std::f64::consts::PI / l;
    // free decay of one mode: the norm scales by exp(-k^2 t), largest at t = 0
    let mode = RealField::from_fn(g, "u0", |x, _| (k * x).cos());
    let zero = RealField::zeros(g, "f");
    let free = heat_smoothing_check(&mode, &ForcingTimeline { pieces: vec![zero.clone()] }, s, p, t_final, 8)?;
    let b0 = free.samples[0].1;
    let closed = free
        .samples
        .iter()
        .map(|&(t, b)| (b - b0 * (-k * k * t).exp()).abs() / b0)
        .fold(0.0, f64::max);
    r.check("free_decay_closed_form", 1e-8 - closed);
    r.check("free_decay_ratio", 1.0 + 1e-12 - free.ratio);
    // constant forcing of one mode from rest: u(t) = (1 - e^{-k^2 t}) / k^2 f
    let forced = heat_smoothing_check(&zero, &ForcingTimeline { pieces: vec![mode.clone()] }, s, p, t_final, 8)?;
    let bf = crate::littlewood_paley::besov_norm(&mode, BesovParams::new(s, p, f64::INFINITY)?)?;
    let closed = forced
        .samples
        .iter()
        .map(|&(t, b)| (b - bf * (1.0 - (-k * k * t).exp()) / (k * k)).abs() / bf)
        .fold(0.0, f64::max);
    r.check("forced_mode_closed_form", 1e-8 - closed);
    let mut constants = Vec::new();
    for &n in &cfg.verify.grids {
        let g = Grid::new(n, l)?;
        let coarse = Grid::new(cfg.verify.grids[0], l)?;
        let mut gen = rng(cfg.seed ^ 0x4EA7);
        let mut c: f64 = 0.0;
        for id in 0..cfg.verify.corpus.min(10) {
            let band = coarse.n() as i64 / 6;
            let mut draw = || -> Result<RealField> {
                let f = random_field(coarse, band, 1.0, &mut gen);
                Ok(f.to_spectral()?.resample(g)?.to_real("f"))
            };
            let u0 = draw()?;
            let pieces = (0..4).map(|_| draw()).collect::<Result<Vec<_>>>()?;
            let rep = heat_smoothing_check(&u0, &ForcingTimeline { pieces }, s, p, t_final, 4)?;
            c = c.max(rep.ratio);
            rows.push(VerifyRow {
                id,
                variant: "heat".into(),
                lhs: rep.lhs,
                rhs: rep.rhs,
                ratio: ratio(rep.lhs, rep.rhs),
                grid_n: n,
            });
        }
        constants.push(c);
    }
    r.note("heat_constant_coarse", constants[0]);
    r.note("heat_constant_fine", constants[1]);
    r.check("heat_refinement", refinement_margin(constants[0], constants[1]));
    Ok(())
}

fn measures_suite(cfg: &RunConfig, r: &mut SuiteResult) -> Result<()> {
    let mut gen = rng(cfg.seed ^ 0x3E);
    let g = Grid::new(64, 8.0)?;
    let (v1, v2) = random_divergence_free(g, 6, &mut gen);
    let v = SpectralVelocity::from_fields(&v1, &v2)?;
    let mu0 = random_measure(8, 2.0, &mut gen);
    let (_, trace) = transport_atoms_traced(&mu0, &v, 0.0, 1.0, 0.01)?;
    let tv0 = mu0.total_variation().to_bits();
    let bitwise = trace.iter().all(|s| s.total_variation.to_bits() == tv0);
    r.check("tv_bitwise", if bitwise { 0.0 } else { -1.0 });
    let support = trace
        .iter()
        .map(|s| s.support_bound + 1e-8 - s.support_radius)
        .fold(f64::INFINITY, f64::min);
    r.check("support_bound", support);

    let mut symmetric = true;
    let mut identity: f64 = 0.0;
    let mut triangle = f64::INFINITY;
    for _ in 0..cfg.verify.triples {
        let a = random_measure(gen_count(&mut gen), 1.5, &mut gen);
        let b = random_measure(gen_count(&mut gen), 1.5, &mut gen);
        let c = random_measure(gen_count(&mut gen), 1.5, &mut gen);
        let ab = bl_distance(&a, &b)?;
        symmetric &= ab.to_bits() == bl_distance(&b, &a)?.to_bits();
        identity = identity.max(bl_distance(&a, &a)?);
        let ac = bl_distance(&a, &c)?;
        let bc = bl_distance(&b, &c)?;
        triangle = triangle.min(ab + bc + 1e-9 - ac);
    }
    r.check("bl_symmetry", if symmetric { 0.0 } else { -1.0 });
    r.check("bl_identity", -identity);
    r.check("bl_triangle", triangle);
    let mut dirac: f64 = 0.0;
    for _ in 0..20 {
        let x = [rand::Rng::gen_range(&mut gen, -2.0..2.0), rand::Rng::gen_range(&mut gen, -2.0..2.0)];
        let y = [rand::Rng::gen_range(&mut gen, -2.0..2.0), rand::Rng::gen_range(&mut gen, -2.0..2.0)];
        let d = bl_distance(&AtomicMeasure::dirac(x, 1.0)?, &AtomicMeasure::dirac(y, 1.0)?)?;
        let exact = (x[0] - y[0]).hypot(x[1] - y[1]).min(2.0);
        dirac = dirac.max((d - exact).abs());
    }
    r.check("bl_dirac", 1e-9 - dirac);
    Ok(())
}

fn gen_count(gen: &mut rand_chacha::ChaCha8Rng) -> usize {
    rand::Rng::gen_range(gen, 1..6)
}

fn flowmap_suite(cfg: &RunConfig, r: &mut SuiteResult) -> Result<()> {
    let mut gen = rng(cfg.seed ^ 0xF1);
    let g = Grid::new(64, 8.0)?;
    let (v1, v2) = random_divergence_free(g, 6, &mut gen);
    let v = SpectralVelocity::from_fields(&v1, &v2)?;
    // keep the integrated smallness near 0.3
    let t_final = (0.3 / v.grid_gradient_sup()).min(1.0);
    let seeds = interior_lattice(&g, 8, 2.0)?;
    let fm = integrate_flow(&v, seeds, t_final, t_final / 50.0)?;
    r.check("det_defect", 1e-6 - fm.max_det_defect());
    r.check("gradient_bound", gradient_bound_check(&fm).margin);
    let inv = neumann_inverse(&fm, DEFAULT_TERMS)?;
    r.note("smallness", inv.smallness);
    r.check("neumann_residual", inv.residual_margin());
    r.check("inverse_deviation", inv.deviation_margin());
    Ok(())
}

fn solver_suite(cfg: &RunConfig, out_dir: &Path, r: &mut SuiteResult) -> Result<()> {
    let grid = Grid::new(cfg.grid.n, cfg.grid.half_length)?;
    let data = cfg.scenario.initial_data(grid)?;
    let step = StepConfig::new(cfg.time.dt, cfg.mollify.n)?;
    let opts = RunOptions::new(cfg.time.t_final, step, cfg.sigma);
    let out = run(&data, &opts)?;
    write_diagnostics(&out_dir.join("diagnostics.csv"), &out.rows)?;
    let rows = &out.rows;
    let min = |f: &dyn Fn(&crate::solver::DiagnosticsRow) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
    r.check("l1_identity", min(&|x| 1e-6 - x.l1_residual));
    r.check("positivity", min(&|x| x.theta_min + x.eps_pos));
    r.check("energy", min(&|x| x.energy_margin + x.tol_energy));
    r.check("support", min(&|x| x.support_bound + 1e-8 - x.support_radius));
    let tv0 = rows[0].tv_mu.to_bits();
    r.check("tv_bitwise", if rows.iter().all(|x| x.tv_mu.to_bits() == tv0) { 0.0 } else { -1.0 });

    // Richardson order from three halvings of a coarse step
    let coarse = cfg.time.t_final / 10.0;
    let states = (0..3)
        .map(|k| {
            let o = RunOptions::new(cfg.time.t_final, StepConfig::new(coarse / (1 << k) as f64, cfg.mollify.n)?, cfg.sigma);
            run(&data, &o).map(|x| x.state)
        })
        .collect::<Result<Vec<_>>>()?;
    let e1 = states[0].theta.sub(&states[1].theta)?.l2_norm() + states[0].omega.sub(&states[1].omega)?.l2_norm();
    let e2 = states[1].theta.sub(&states[2].theta)?.l2_norm() + states[1].omega.sub(&states[2].omega)?.l2_norm();
    let order = (e1 / e2).log2();
    r.note("richardson_order", order);
    r.check("richardson_order", order - 1.8);

    let flow_start = Instant::now();
    let flow_run = flow_study(cfg)?;
    let fm = flow_run.flow.as_ref().expect("flow requested");
    r.check("flow_det_defect", 1e-6 - fm.max_det_defect());
    r.check("flow_gradient_bound", gradient_bound_check(fm).margin);
    let record = TransportRecord {
        measure: flow_run.state.atoms.clone(),
        time: flow_run.state.t,
        timeline: flow_run.state.timeline,
    };
    let src = lagrangian_source_check(fm, &data.atoms, &record)?;
    r.check("lagrangian_source", 1e-7 - src.max_discrepancy);
    if fm.smallness() <= crate::lagrangian::neumann::SMALLNESS_LIMIT {
        r.check("flow_neumann_residual", neumann_inverse(fm, DEFAULT_TERMS)?.residual_margin());
    }
    r.note("flow_seconds", flow_start.elapsed().as_secs_f64());
    Ok(())
}

/// Solver run of the configured scenario carrying a flow map on every
/// `verify.flow_stride`-th node, over `verify.flow_t` with step `verify.flow_dt`.
pub fn flow_study(cfg: &RunConfig) -> Result<RunOutput> {
    let grid = Grid::new(cfg.grid.n, cfg.grid.half_length)?;
    let data = cfg.scenario.initial_data(grid)?;
    let mut opts = RunOptions::new(cfg.verify.flow_t, StepConfig::new(cfg.verify.flow_dt, cfg.mollify.n)?, cfg.sigma);
    opts.flow_stride = Some(cfg.verify.flow_stride);
    run(&data, &opts)
}

fn stability_suite(cfg: &RunConfig, out_dir: &Path, r: &mut SuiteResult) -> Result<()> {
    let setup = StabilitySetup {
        scenario: cfg.scenario,
        half_length: cfg.grid.half_length,
        n_mollify: 1,
        sigma: cfg.sigma,
        t_final: cfg.verify.stability_t,
    };
    let base = Resolution {
        n: cfg.verify.stability_n,
        dt: cfg.verify.stability_dt,
    };
    let pairs = refinement_pairs(&setup, base, 3)?;
    let mut text = String::from("coarse_n,coarse_dt,fine_n,fine_dt,atoms_bl,theta_l2,omega_l2\n");
    for p in &pairs {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.coarse.n,
            crate::numfmt::sci17(p.coarse.dt),
            p.fine.n,
            crate::numfmt::sci17(p.fine.dt),
            crate::numfmt::sci17(p.atoms_bl),
            crate::numfmt::sci17(p.theta_l2),
            crate::numfmt::sci17(p.omega_l2)
        ));
    }
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("stability.csv"), text)?;
    r.check("refinement_decrease", if pairs[1].improves_on(&pairs[0]) { 0.0 } else { -1.0 });

    // determinism: identical runs give identical bytes
    let grid = Grid::new(base.n, cfg.grid.half_length)?;
    let data = cfg.scenario.initial_data(grid)?;
    let opts = RunOptions::new(setup.t_final, StepConfig::new(base.dt, 1)?, cfg.sigma);
    let bytes = |o: &RunOptions| -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        crate::solver::diagnostics::write_csv(&mut buf, &run(&data, o)?.rows)?;
        Ok(buf)
    };
    r.check("determinism", if bytes(&opts)? == bytes(&opts)? { 0.0 } else { -1.0 });
    let growth = perturbation_growth(&data, &opts, 1e-6)?;
    r.note("perturbation_rate", growth.rate);
    r.check("perturbation_finite", if growth.rate.is_finite() { 0.0 } else { -1.0 });
    Ok(())
}

/// Mollification ladder for `single_atom` in a unit box, written to
/// `ladder.csv` under `out_dir`.
pub fn ladder_study(cfg: &RunConfig, out_dir: &Path) -> Result<LadderReport> {
    let grid = Grid::new(cfg.verify.ladder_n, 1.0)?;
    let data = Scenario::SingleAtom.initial_data(grid)?;
    let every = ((cfg.verify.ladder_t / cfg.verify.ladder_dt) / 10.0).round().max(1.0) as usize;
    let rep = ladder(&data, &cfg.verify.ladder_mollify, cfg.verify.ladder_t, cfg.verify.ladder_dt, cfg.sigma, every)?;
    let mut text = String::from("n,sup_distance\n");
    for (n, d) in &rep.cauchy {
        text.push_str(&format!("{n},{}\n", crate::numfmt::sci17(*d)));
    }
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("ladder.csv"), text)?;
    Ok(rep)
}

fn ladder_suite(cfg: &RunConfig, out_dir: &Path, r: &mut SuiteResult) -> Result<()> {
    let rep = ladder_study(cfg, out_dir)?;
    for (n, d) in &rep.cauchy {
        r.note(&format!("cauchy_{n}"), *d);
    }
    let decrease = rep
        .cauchy
        .windows(2)
        .map(|w| w[0].1 - w[1].1)
        .fold(f64::INFINITY, f64::min);
    r.check("cauchy_decrease", if rep.cauchy_decreasing() { decrease } else { decrease.min(-f64::MIN_POSITIVE) });
    r.check("equicontinuity", -rep.equicontinuity_excess);
    Ok(())
}

/// Runs one suite; errors inside the suite count as failures.
pub fn run_suite(suite: Suite, cfg: &RunConfig, fault: Fault, out_dir: &Path, rows: &mut Vec<VerifyRow>) -> SuiteResult {
    let mut r = SuiteResult::new(suite.name());
    let start = Instant::now();
    let outcome = match suite {
        Suite::Partition => partition_suite(cfg, &mut r),
        Suite::Bony => bony_suite(cfg, fault, &mut r),
        Suite::Product => product_suite(cfg, &mut r, rows),
        Suite::LogInterp => log_interp_suite(cfg, &mut r, rows),
        Suite::Heat => heat_suite(cfg, &mut r, rows),
        Suite::Measures => measures_suite(cfg, &mut r),
        Suite::Flowmap => flowmap_suite(cfg, &mut r),
        Suite::Solver => solver_suite(cfg, out_dir, &mut r),
        Suite::Stability => stability_suite(cfg, out_dir, &mut r),
        Suite::Ladder => ladder_suite(cfg, out_dir, &mut r),
    };
    if let Err(e) = outcome {
        r.passed = false;
        r.detail = format!("error: {e}");
    }
    r.seconds = start.elapsed().as_secs_f64();
    r
}

/// Runs every selected suite, writes `verify.csv`, `margins.csv` and
/// `manifest.json` under `out_dir`, and returns the manifest.
pub fn verify_all(cfg: &RunConfig, config_text: &str, fault: Fault, out_dir: &Path) -> Result<Manifest> {
    let mut manifest = Manifest::new(config_text);
    let mut rows = Vec::new();
    for suite in cfg.selected_suites() {
        manifest.push(run_suite(suite, cfg, fault, out_dir, &mut rows));
    }
    manifest.finish();
    write_verify_csv(&out_dir.join("verify.csv"), &rows)?;
    super::output::write_margins_csv(&out_dir.join("margins.csv"), &manifest)?;
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(manifest)
}
