//! Flow maps `X(t, y)` and their Jacobians `G = grad_y X`, integrated with
//! classical RK4 on the coupled system `X' = v(t, X)`, `G' = (grad v)(t, X) G`.

use std::hash::{Hash, Hasher};

use rayon::prelude::*;

use crate::error::{BmlError, Result};
use crate::measures::transport::{check_inside, step_count};
use crate::measures::AtomicMeasure;
use crate::spectral::Grid;
use crate::velocity::{mat_mul, operator_norm, Mat2, VelocityField, IDENTITY};

#[derive(Clone, Debug)]
pub struct FlowMap {
    seeds: Vec<[f64; 2]>,
    positions: Vec<[f64; 2]>,
    grads: Vec<Mat2>,
    atom_seeds: Vec<usize>,
    start_time: f64,
    time: f64,
    /// `sum_steps h sum_s b_s sup |grad v|` over RK4 stages.
    gradient_integral: f64,
    /// `sum_steps h sum_s b_s max_seeds |(grad v)(X) G|`.
    smallness: f64,
    /// Per-seed version of `smallness`; bounds `|G - Id|` exactly.
    seed_smallness: Vec<f64>,
    timeline: u64,
    steps: usize,
}

/// Chains a step's velocity fingerprint into a timeline identifier.
pub fn chain_timeline(previous: u64, velocity: u64, t: f64, h: f64) -> u64 {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    previous.hash(&mut hasher);
    velocity.hash(&mut hasher);
    t.to_bits().hash(&mut hasher);
    h.to_bits().hash(&mut hasher);
    hasher.finish()
}

/// Every `stride`-th grid node in both directions.
pub fn seed_lattice(grid: &Grid, stride: usize) -> Result<Vec<[f64; 2]>> {
    if stride == 0 || stride > grid.n() {
        return Err(BmlError::param("stride", format!("seed stride must lie in [1, {}]", grid.n())));
    }
    let mut seeds = Vec::new();
    for i1 in (0..grid.n()).step_by(stride) {
        for i2 in (0..grid.n()).step_by(stride) {
            seeds.push([grid.node(i1), grid.node(i2)]);
        }
    }
    Ok(seeds)
}

/// Lattice seeds that keep the safety margin of the box.
pub fn interior_lattice(grid: &Grid, stride: usize, margin: f64) -> Result<Vec<[f64; 2]>> {
    let limit = grid.half_length() - margin;
    Ok(seed_lattice(grid, stride)?
        .into_iter()
        .filter(|p| p[0].abs() <= limit && p[1].abs() <= limit)
        .collect())
}

struct SeedStep {
    position: [f64; 2],
    grad: Mat2,
    increment_bound: f64,
    stage_rates: [f64; 4],
    stage_gradients: [f64; 4],
}

fn add_scaled(x: [f64; 2], h: f64, k: [f64; 2]) -> [f64; 2] {
    [x[0] + h * k[0], x[1] + h * k[1]]
}

fn add_scaled_mat(g: &Mat2, h: f64, k: &Mat2) -> Mat2 {
    [add_scaled(g[0], h, k[0]), add_scaled(g[1], h, k[1])]
}

fn rk4_seed(v: &dyn VelocityField, t: f64, h: f64, x: [f64; 2], g: &Mat2) -> Result<SeedStep> {
    let (k1, j1) = v.stage_velocity_and_gradient(t, h, 0, x)?;
    let m1 = mat_mul(&j1, g);
    let (x2, g2) = (add_scaled(x, 0.5 * h, k1), add_scaled_mat(g, 0.5 * h, &m1));
    let (k2, j2) = v.stage_velocity_and_gradient(t, h, 1, x2)?;
    let m2 = mat_mul(&j2, &g2);
    let (x3, g3) = (add_scaled(x, 0.5 * h, k2), add_scaled_mat(g, 0.5 * h, &m2));
    let (k3, j3) = v.stage_velocity_and_gradient(t, h, 1, x3)?;
    let m3 = mat_mul(&j3, &g3);
    let (x4, g4) = (add_scaled(x, h, k3), add_scaled_mat(g, h, &m3));
    let (k4, j4) = v.stage_velocity_and_gradient(t, h, 2, x4)?;
    let m4 = mat_mul(&j4, &g4);
    let w = h / 6.0;
    let position = [
        x[0] + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ];
    let mut grad = *g;
    for r in 0..2 {
        for c in 0..2 {
            grad[r][c] += w * (m1[r][c] + 2.0 * m2[r][c] + 2.0 * m3[r][c] + m4[r][c]);
        }
    }
    let rates = [&m1, &m2, &m3, &m4].map(operator_norm);
    Ok(SeedStep {
        position,
        grad,
        increment_bound: w * (rates[0] + 2.0 * rates[1] + 2.0 * rates[2] + rates[3]),
        stage_rates: rates,
        stage_gradients: [&j1, &j2, &j3, &j4].map(operator_norm),
    })
}

impl FlowMap {
    /// Identity map at time `t0`.
    pub fn new(seeds: Vec<[f64; 2]>, t0: f64) -> Self {
        let count = seeds.len();
        FlowMap {
            positions: seeds.clone(),
            grads: vec![IDENTITY; count],
            seeds,
            atom_seeds: Vec::new(),
            start_time: t0,
            time: t0,
            gradient_integral: 0.0,
            smallness: 0.0,
            seed_smallness: vec![0.0; count],
            timeline: 0,
            steps: 0,
        }
    }

    /// Lattice seeds followed by the atom locations of `mu`.
    pub fn with_atoms(lattice: Vec<[f64; 2]>, mu: &AtomicMeasure, t0: f64) -> Self {
        let first = lattice.len();
        let mut seeds = lattice;
        seeds.extend(mu.positions());
        let mut fm = FlowMap::new(seeds, t0);
        fm.atom_seeds = (first..fm.seeds.len()).collect();
        fm
    }

    /// Advances every seed over `[time, time + h]`.
    pub fn advance(&mut self, v: &dyn VelocityField, h: f64) -> Result<()> {
        let t = self.time;
        let steps: Vec<SeedStep> = self
            .positions
            .par_iter()
            .zip(self.grads.par_iter())
            .map(|(x, g)| rk4_seed(v, t, h, *x, g))
            .collect::<Result<_>>()?;
        let domain = v.domain();
        let mut rate_max = [0.0f64; 4];
        let mut grad_max = [0.0f64; 4];
        for (i, s) in steps.iter().enumerate() {
            check_inside(s.position, domain)?;
            for k in 0..4 {
                rate_max[k] = rate_max[k].max(s.stage_rates[k]);
                grad_max[k] = grad_max[k].max(s.stage_gradients[k]);
            }
            self.positions[i] = s.position;
            self.grads[i] = s.grad;
            self.seed_smallness[i] += s.increment_bound;
        }
        let sups = [
            v.stage_gradient_sup(t, h, 0)?,
            v.stage_gradient_sup(t, h, 1)?,
            v.stage_gradient_sup(t, h, 1)?,
            v.stage_gradient_sup(t, h, 2)?,
        ];
        let sup = |k: usize| sups[k].max(grad_max[k]);
        let w = h / 6.0;
        self.gradient_integral += w * (sup(0) + 2.0 * sup(1) + 2.0 * sup(2) + sup(3));
        self.smallness += w * (rate_max[0] + 2.0 * rate_max[1] + 2.0 * rate_max[2] + rate_max[3]);
        self.timeline = chain_timeline(self.timeline, v.fingerprint(), t, h);
        self.time = t + h;
        self.steps += 1;
        Ok(())
    }

    pub fn seeds(&self) -> &[[f64; 2]] {
        &self.seeds
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn grads(&self) -> &[Mat2] {
        &self.grads
    }

    pub fn atom_seeds(&self) -> &[usize] {
        &self.atom_seeds
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn gradient_integral(&self) -> f64 {
        self.gradient_integral
    }

    pub fn smallness(&self) -> f64 {
        self.smallness
    }

    pub fn seed_smallness(&self) -> &[f64] {
        &self.seed_smallness
    }

    pub fn timeline(&self) -> u64 {
        self.timeline
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn determinant(&self, i: usize) -> f64 {
        let g = &self.grads[i];
        g[0][0] * g[1][1] - g[0][1] * g[1][0]
    }

    /// `max_seeds |det G - 1|`.
    pub fn max_det_defect(&self) -> f64 {
        (0..self.grads.len())
            .map(|i| (self.determinant(i) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_grad_norm(&self) -> f64 {
        self.grads.iter().map(operator_norm).fold(0.0, f64::max)
    }
}

/// Flow from `t = 0` to `t_final` with RK4 steps no longer than `dt`.
pub fn integrate_flow(v: &dyn VelocityField, seeds: Vec<[f64; 2]>, t_final: f64, dt: f64) -> Result<FlowMap> {
    integrate_flow_from(v, FlowMap::new(seeds, 0.0), t_final, dt)
}

/// Continues an existing flow map up to `t_final`.
pub fn integrate_flow_from(v: &dyn VelocityField, mut fm: FlowMap, t_final: f64, dt: f64) -> Result<FlowMap> {
    for p in fm.positions() {
        check_inside(*p, v.domain())?;
    }
    let steps = step_count(fm.time, t_final, dt)?;
    if steps == 0 {
        return Ok(fm);
    }
    let h = (t_final - fm.time) / steps as f64;
    for _ in 0..steps {
        fm.advance(v, h)?;
    }
    Ok(fm)
}
