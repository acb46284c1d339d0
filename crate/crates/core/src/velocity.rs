//! Velocity fields sampled by the particle integrators.
//!
//! Integrators step through [`VelocityField::stage_velocity`] with the
//! classical RK4 nodes `0, 1/2, 1`. Sampled timelines override it so a step
//! that ends on a sample boundary uses the sample stored for that step rather
//! than the one starting the next step.

use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use crate::error::{BmlError, Result};
use crate::spectral::interp::value_and_gradient;
use crate::spectral::{biot_savart_spectral, Grid, RealField, SpectralField};

pub type Mat2 = [[f64; 2]; 2];

/// RK4 stage nodes.
pub const STAGE_NODES: [f64; 3] = [0.0, 0.5, 1.0];

pub fn operator_norm(m: &Mat2) -> f64 {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
    (0.5 * (s + disc)).sqrt()
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub trait VelocityField: Sync {
    fn velocity(&self, t: f64, p: [f64; 2]) -> Result<[f64; 2]>;

    /// Velocity and Jacobian `J[i][j] = d v_i / d x_j`.
    fn velocity_and_gradient(&self, t: f64, p: [f64; 2]) -> Result<([f64; 2], Mat2)>;

    /// Upper estimate of `sup_x |grad v(t, x)|` in operator norm.
    fn gradient_sup(&self, t: f64) -> Result<f64>;

    /// Half length of the periodic box the field lives on, if any.
    fn domain(&self) -> Option<f64> {
        None
    }

    /// Velocity components sampled on the nodes of `grid`.
    fn on_grid(&self, t: f64, grid: &Grid) -> Result<(RealField, RealField)> {
        let n = grid.n();
        let mut v1 = Vec::with_capacity(grid.len());
        let mut v2 = Vec::with_capacity(grid.len());
        for i1 in 0..n {
            for i2 in 0..n {
                let v = self.velocity(t, [grid.node(i1), grid.node(i2)])?;
                v1.push(v[0]);
                v2.push(v[1]);
            }
        }
        Ok((RealField::new(*grid, v1, "v1")?, RealField::new(*grid, v2, "v2")?))
    }

    /// Identifies the timeline; integrations that must agree compare it.
    fn fingerprint(&self) -> u64;

    /// Velocity at RK4 node `stage` (index into [`STAGE_NODES`]) of the step `[t, t + h]`.
    fn stage_velocity(&self, t: f64, h: f64, stage: usize, p: [f64; 2]) -> Result<[f64; 2]> {
        self.velocity(t + STAGE_NODES[stage] * h, p)
    }

    fn stage_velocity_and_gradient(&self, t: f64, h: f64, stage: usize, p: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        self.velocity_and_gradient(t + STAGE_NODES[stage] * h, p)
    }

    fn stage_gradient_sup(&self, t: f64, h: f64, stage: usize) -> Result<f64> {
        self.gradient_sup(t + STAGE_NODES[stage] * h)
    }
}

fn hash_f64s(tag: &str, values: &[f64]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    tag.hash(&mut h);
    for v in values {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Spatially uniform, time-independent velocity.
#[derive(Clone, Copy, Debug)]
pub struct ConstantVelocity(pub [f64; 2]);

impl VelocityField for ConstantVelocity {
    fn velocity(&self, _t: f64, p: [f64; 2]) -> Result<[f64; 2]> {
        check_point(p)?;
        Ok(self.0)
    }

    fn velocity_and_gradient(&self, _t: f64, p: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        check_point(p)?;
        Ok((self.0, [[0.0; 2]; 2]))
    }

    fn gradient_sup(&self, _t: f64) -> Result<f64> {
        Ok(0.0)
    }

    fn fingerprint(&self) -> u64 {
        hash_f64s("constant", &self.0)
    }
}

/// Rigid rotation `v = rate * (-x2, x1)`.
#[derive(Clone, Copy, Debug)]
pub struct RigidRotation {
    pub rate: f64,
}

impl VelocityField for RigidRotation {
    fn velocity(&self, _t: f64, p: [f64; 2]) -> Result<[f64; 2]> {
        check_point(p)?;
        Ok([-self.rate * p[1], self.rate * p[0]])
    }

    fn velocity_and_gradient(&self, t: f64, p: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        Ok((self.velocity(t, p)?, [[0.0, -self.rate], [self.rate, 0.0]]))
    }

    fn gradient_sup(&self, _t: f64) -> Result<f64> {
        Ok(self.rate.abs())
    }

    fn fingerprint(&self) -> u64 {
        hash_f64s("rotation", &[self.rate])
    }
}

fn check_point(p: [f64; 2]) -> Result<()> {
    if p[0].is_finite() && p[1].is_finite() {
        Ok(())
    } else {
        Err(BmlError::NonFinite(format!("sample point ({}, {})", p[0], p[1])))
    }
}

/// Steady spectral velocity on a periodic grid.
#[derive(Clone, Debug)]
pub struct SpectralVelocity {
    v: [SpectralField; 2],
    gradient_sup: OnceLock<f64>,
    fingerprint: OnceLock<u64>,
}

impl SpectralVelocity {
    pub fn new(v1: SpectralField, v2: SpectralField) -> Result<Self> {
        v1.grid().ensure_same(v2.grid())?;
        Ok(SpectralVelocity {
            v: [v1, v2],
            gradient_sup: OnceLock::new(),
            fingerprint: OnceLock::new(),
        })
    }

    pub fn from_fields(v1: &RealField, v2: &RealField) -> Result<Self> {
        Self::new(v1.to_spectral()?, v2.to_spectral()?)
    }

    /// Velocity of a vorticity field through the Biot-Savart law.
    pub fn from_vorticity(omega: &SpectralField) -> Result<Self> {
        let (v1, v2) = biot_savart_spectral(&omega.without_mean());
        Self::new(v1, v2)
    }

    pub fn grid(&self) -> &Grid {
        self.v[0].grid()
    }

    pub fn components(&self) -> &[SpectralField; 2] {
        &self.v
    }

    /// Largest operator norm of the Jacobian over grid nodes.
    pub fn grid_gradient_sup(&self) -> f64 {
        *self.gradient_sup.get_or_init(|| {
            let [v1, v2] = &self.v;
            let grads = [v1.partial(0), v1.partial(1), v2.partial(0), v2.partial(1)].map(|s| s.to_real("g"));
            (0..v1.grid().len())
                .map(|i| {
                    operator_norm(&[
                        [grads[0].values()[i], grads[1].values()[i]],
                        [grads[2].values()[i], grads[3].values()[i]],
                    ])
                })
                .fold(0.0, f64::max)
        })
    }

    pub fn eval(&self, p: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        let (a, ga) = value_and_gradient(&self.v[0], p)?;
        let (b, gb) = value_and_gradient(&self.v[1], p)?;
        Ok(([a, b], [ga, gb]))
    }

    pub fn eval_value(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        Ok([
            crate::spectral::interp::value_at(&self.v[0], p)?,
            crate::spectral::interp::value_at(&self.v[1], p)?,
        ])
    }
}

impl VelocityField for SpectralVelocity {
    fn velocity(&self, _t: f64, p: [f64; 2]) -> Result<[f64; 2]> {
        self.eval_value(p)
    }

    fn velocity_and_gradient(&self, _t: f64, p: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        self.eval(p)
    }

    fn gradient_sup(&self, _t: f64) -> Result<f64> {
        Ok(self.grid_gradient_sup())
    }

    fn domain(&self) -> Option<f64> {
        Some(self.grid().half_length())
    }

    fn on_grid(&self, _t: f64, grid: &Grid) -> Result<(RealField, RealField)> {
        self.grid().ensure_same(grid)?;
        Ok((self.v[0].to_real("v1"), self.v[1].to_real("v2")))
    }

    fn fingerprint(&self) -> u64 {
        *self.fingerprint.get_or_init(|| {
            let mut bits: Vec<f64> = Vec::with_capacity(4 * self.grid().len());
            for s in &self.v {
                for c in s.coefficients() {
                    bits.push(c.re);
                    bits.push(c.im);
                }
            }
            hash_f64s("spectral", &bits)
        })
    }
}

/// Velocity over one time step, stored at the RK4 nodes `t, t + h/2, t + h`
/// and interpolated linearly between them.
#[derive(Clone, Debug)]
pub struct StepVelocity {
    pub start: f64,
    pub step: f64,
    pub samples: [SpectralVelocity; 3],
}

impl StepVelocity {
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let end = self.start + self.step;
        let eps = 1e-12 * end.abs().max(1.0);
        if t < self.start - eps || t > end + eps {
            return Err(BmlError::OutsideTimeline {
                t,
                start: self.start,
                end,
            });
        }
        let u = ((t - self.start) / self.step).clamp(0.0, 1.0);
        if u <= 0.5 {
            Ok((0, 2.0 * u))
        } else {
            Ok((1, 2.0 * u - 1.0))
        }
    }

    fn stage_index(&self, t: f64, h: f64, stage: usize) -> Option<usize> {
        let eps = 1e-12 * self.step.max(f64::MIN_POSITIVE);
        if (t - self.start).abs() <= eps && (h - self.step).abs() <= eps {
            Some(stage)
        } else {
            None
        }
    }
}

fn lerp2(a: [f64; 2], b: [f64; 2], w: f64) -> [f64; 2] {
    [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
}

fn lerp_mat(a: &Mat2, b: &Mat2, w: f64) -> Mat2 {
    [lerp2(a[0], b[0], w), lerp2(a[1], b[1], w)]
}

impl VelocityField for StepVelocity {
    fn velocity(&self, t: f64, p: [f64; 2]) -> Result<[f64; 2]> {
        let (k, w) = self.locate(t)?;
        let a = self.samples[k].eval_value(p)?;
        if w == 0.0 {
            return Ok(a);
        }
        Ok(lerp2(a, self.samples[k + 1].eval_value(p)?, w))
    }

    fn velocity_and_gradient(&self, t: f64, p: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        let (k, w) = self.locate(t)?;
        let (a, ga) = self.samples[k].eval(p)?;
        if w == 0.0 {
            return Ok((a, ga));
        }
        let (b, gb) = self.samples[k + 1].eval(p)?;
        Ok((lerp2(a, b, w), lerp_mat(&ga, &gb, w)))
    }

    fn gradient_sup(&self, t: f64) -> Result<f64> {
        let (k, w) = self.locate(t)?;
        // a convex combination is bounded by the larger endpoint
        let a = self.samples[k].grid_gradient_sup();
        Ok(if w == 0.0 { a } else { a.max(self.samples[k + 1].grid_gradient_sup()) })
    }

    fn domain(&self) -> Option<f64> {
        Some(self.samples[0].grid().half_length())
    }

    fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        "step".hash(&mut h);
        self.start.to_bits().hash(&mut h);
        self.step.to_bits().hash(&mut h);
        for s in &self.samples {
            s.fingerprint().hash(&mut h);
        }
        h.finish()
    }

    fn stage_velocity(&self, t: f64, h: f64, stage: usize, p: [f64; 2]) -> Result<[f64; 2]> {
        match self.stage_index(t, h, stage) {
            Some(k) => self.samples[k].eval_value(p),
            None => self.velocity(t + STAGE_NODES[stage] * h, p),
        }
    }

    fn stage_velocity_and_gradient(&self, t: f64, h: f64, stage: usize, p: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        match self.stage_index(t, h, stage) {
            Some(k) => self.samples[k].eval(p),
            None => self.velocity_and_gradient(t + STAGE_NODES[stage] * h, p),
        }
    }

    fn stage_gradient_sup(&self, t: f64, h: f64, stage: usize) -> Result<f64> {
        match self.stage_index(t, h, stage) {
            Some(k) => Ok(self.samples[k].grid_gradient_sup()),
            None => self.gradient_sup(t + STAGE_NODES[stage] * h),
        }
    }
}

/// A whole run's velocity as consecutive [`StepVelocity`] segments.
///
/// Memory grows with the number of steps; use it for short or coarse runs.
#[derive(Clone, Debug, Default)]
pub struct VelocityTimeline {
    steps: Vec<StepVelocity>,
}

impl VelocityTimeline {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: StepVelocity) -> Result<()> {
        if let Some(last) = self.steps.last() {
            let end = last.start + last.step;
            if (step.start - end).abs() > 1e-12 * end.abs().max(1.0) {
                return Err(BmlError::MismatchedTimeline(format!(
                    "segment starting at {} does not continue the timeline ending at {end}",
                    step.start
                )));
            }
        }
        self.steps.push(step);
        Ok(())
    }

    pub fn segments(&self) -> &[StepVelocity] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.steps.first().map_or(0.0, |s| s.start)
    }

    pub fn end(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.start + s.step)
    }

    /// Segment owning the step `[t, t + h]`: the one containing `t` as a
    /// left-closed interval.
    fn segment_for(&self, t: f64) -> Result<&StepVelocity> {
        let err = || BmlError::OutsideTimeline {
            t,
            start: self.start(),
            end: self.end(),
        };
        if self.steps.is_empty() {
            return Err(err());
        }
        let idx = self.steps.partition_point(|s| {
            let eps = 1e-12 * s.start.abs().max(1.0);
            s.start <= t + eps
        });
        if idx == 0 {
            return Err(err());
        }
        let seg = &self.steps[idx - 1];
        let end = seg.start + seg.step;
        // t sitting on the final end point belongs to the last segment
        if t > end + 1e-12 * end.abs().max(1.0) {
            return Err(err());
        }
        Ok(seg)
    }
}

impl VelocityField for VelocityTimeline {
    fn velocity(&self, t: f64, p: [f64; 2]) -> Result<[f64; 2]> {
        self.segment_for(t)?.velocity(t, p)
    }

    fn velocity_and_gradient(&self, t: f64, p: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        self.segment_for(t)?.velocity_and_gradient(t, p)
    }

    fn gradient_sup(&self, t: f64) -> Result<f64> {
        self.segment_for(t)?.gradient_sup(t)
    }

    fn domain(&self) -> Option<f64> {
        self.steps.first().and_then(|s| s.domain())
    }

    fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        "timeline".hash(&mut h);
        for s in &self.steps {
            s.fingerprint().hash(&mut h);
        }
        h.finish()
    }

    fn stage_velocity(&self, t: f64, h: f64, stage: usize, p: [f64; 2]) -> Result<[f64; 2]> {
        let seg = self.segment_for(t)?;
        let tau = t + STAGE_NODES[stage] * h;
        if tau <= seg.start + seg.step + 1e-12 * tau.abs().max(1.0) {
            seg.stage_velocity(t, h, stage, p)
        } else {
            self.velocity(tau, p)
        }
    }

    fn stage_velocity_and_gradient(&self, t: f64, h: f64, stage: usize, p: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        let seg = self.segment_for(t)?;
        let tau = t + STAGE_NODES[stage] * h;
        if tau <= seg.start + seg.step + 1e-12 * tau.abs().max(1.0) {
            seg.stage_velocity_and_gradient(t, h, stage, p)
        } else {
            self.velocity_and_gradient(tau, p)
        }
    }

    fn stage_gradient_sup(&self, t: f64, h: f64, stage: usize) -> Result<f64> {
        let seg = self.segment_for(t)?;
        let tau = t + STAGE_NODES[stage] * h;
        if tau <= seg.start + seg.step + 1e-12 * tau.abs().max(1.0) {
            seg.stage_gradient_sup(t, h, stage)
        } else {
            self.gradient_sup(tau)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_norm_of_rotation_and_shear() {
        let r = [[0.0, -1.0], [1.0, 0.0]];
        assert!((operator_norm(&r) - 1.0).abs() < 1e-15);
        let s = [[1.0, 1.0], [0.0, 1.0]];
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((operator_norm(&s) - golden).abs() < 1e-14);
    }

    #[test]
    fn step_velocity_picks_stored_stages() {
        let g = Grid::new(16, 1.0).unwrap();
        let make = |c: f64| {
            SpectralVelocity::from_fields(&RealField::constant(g, c, "v1"), &RealField::zeros(g, "v2")).unwrap()
        };
        let seg = StepVelocity {
            start: 1.0,
            step: 0.5,
            samples: [make(1.0), make(2.0), make(4.0)],
        };
        let v = seg.stage_velocity(1.0, 0.5, 2, [0.1, 0.2]).unwrap();
        assert!((v[0] - 4.0).abs() < 1e-14);
        let mid = seg.velocity(1.375, [0.0, 0.0]).unwrap();
        assert!((mid[0] - 3.0).abs() < 1e-14);
        assert!(seg.velocity(2.0, [0.0, 0.0]).is_err());
    }
}
