//! Mollification ladder: the same data forced by `mu_n` for increasing `n`.
//!
//! Each run co-evolves its atoms with its own velocity, so the atom measures
//! of neighbouring rungs differ only through the forcing width. The report
//! holds the sup over output times of the bounded-Lipschitz distance between
//! rungs `n` and `2n`, and checks the equicontinuity bound
//! `d(mu(s1), mu(s2)) <= TV int_{s1}^{s2} max |v(atom)|` along every run.

use super::run::{run_with, RunOptions};
use super::state::{InitialData, StepConfig};
use crate::error::{BmlError, Result};
use crate::measures::{bl_distance, AtomicMeasure};

/// Slack added to the equicontinuity bound (LP tolerance).
pub const EQUICONTINUITY_SLACK: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct LadderRun {
    pub n_mollify: u32,
    pub times: Vec<f64>,
    pub measures: Vec<AtomicMeasure>,
    /// `int_0^t max |v(atom)|` at each output time (RK4 stage bound).
    pub travel: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LadderReport {
    pub runs: Vec<LadderRun>,
    /// `(n, sup_t d(mu_n(t), mu_2n(t)))` for consecutive rungs.
    pub cauchy: Vec<(u32, f64)>,
    /// Largest `d(mu(s1), mu(s2)) - bound` over runs and output-time pairs.
    pub equicontinuity_excess: f64,
}

impl LadderReport {
    pub fn cauchy_decreasing(&self) -> bool {
        self.cauchy.windows(2).all(|w| w[1].1 < w[0].1)
    }

    pub fn equicontinuity_holds(&self) -> bool {
        self.equicontinuity_excess <= 0.0
    }
}

pub fn ladder_run(data: &InitialData, n_mollify: u32, t_final: f64, dt: f64, sigma: f64, every: usize) -> Result<LadderRun> {
    let opts = RunOptions::new(t_final, StepConfig::new(dt, n_mollify)?, sigma);
    let r0 = data.atoms.support_radius();
    let mut out = LadderRun {
        n_mollify,
        times: Vec::new(),
        measures: Vec::new(),
        travel: Vec::new(),
    };
    let every = every.max(1);
    run_with(data, &opts, &mut |state, row| {
        if row.step % every == 0 {
            out.times.push(state.t);
            out.measures.push(state.atoms.clone());
            out.travel.push(state.support_bound - r0);
        }
        Ok(())
    })?;
    Ok(out)
}

fn equicontinuity_excess(run: &LadderRun) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..run.measures.len() {
        let tv = run.measures[i].total_variation();
        for j in (i + 1)..run.measures.len() {
            let d = bl_distance(&run.measures[i], &run.measures[j])?;
            let bound = tv * (run.travel[j] - run.travel[i]) + EQUICONTINUITY_SLACK;
            worst = worst.max(d - bound);
        }
    }
    Ok(worst)
}

/// Runs every rung in `ns` (each double the previous) and compares neighbours.
pub fn ladder(data: &InitialData, ns: &[u32], t_final: f64, dt: f64, sigma: f64, every: usize) -> Result<LadderReport> {
    if ns.len() < 2 || ns.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(BmlError::param("ladder", "expected a doubling sequence of at least two values"));
    }
    let runs: Vec<LadderRun> = ns
        .iter()
        .map(|&n| ladder_run(data, n, t_final, dt, sigma, every))
        .collect::<Result<_>>()?;
    let mut cauchy = Vec::new();
    for w in runs.windows(2) {
        let mut sup = 0.0_f64;
        for (a, b) in w[0].measures.iter().zip(&w[1].measures) {
            sup = sup.max(bl_distance(a, b)?);
        }
        cauchy.push((w[0].n_mollify, sup));
    }
    let mut excess = f64::NEG_INFINITY;
    for r in &runs {
        excess = excess.max(equicontinuity_excess(r)?);
    }
    Ok(LadderReport {
        runs,
        cauchy,
        equicontinuity_excess: excess,
    })
}
