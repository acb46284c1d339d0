use serde::Serialize;

use super::flow::FlowMap;
use crate::error::{BmlError, Result};
use crate::measures::AtomicMeasure;

/// Relative slack allowed on the exponential gradient bound.
pub const GRADIENT_BOUND_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientBoundReport {
    pub max_grad_norm: f64,
    pub bound: f64,
    /// `bound (1 + slack) - max_grad_norm`; nonnegative when the bound holds.
    pub margin: f64,
}

/// `max_seeds |grad X(t)| <= exp(int_0^t |grad v|_inf)`.
pub fn gradient_bound_check(fm: &FlowMap) -> GradientBoundReport {
    let max_grad_norm = fm.max_grad_norm();
    let bound = fm.gradient_integral().exp();
    GradientBoundReport {
        max_grad_norm,
        bound,
        margin: bound * (1.0 + GRADIENT_BOUND_SLACK) - max_grad_norm,
    }
}

/// Atoms moved by the measure transport, tagged with the velocity timeline
/// that moved them.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportRecord {
    pub measure: AtomicMeasure,
    pub time: f64,
    pub timeline: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SourceCheckReport {
    pub max_discrepancy: f64,
    pub atoms: usize,
}

/// Compares transported atoms with the flow map evaluated at the atom seeds:
/// the source is constant along characteristics, so both must agree.
pub fn lagrangian_source_check(fm: &FlowMap, mu0: &AtomicMeasure, transported: &TransportRecord) -> Result<SourceCheckReport> {
    if fm.timeline() != transported.timeline {
        return Err(BmlError::MismatchedTimeline(format!(
            "flow map timeline {:016x} differs from transport timeline {:016x}",
            fm.timeline(),
            transported.timeline
        )));
    }
    if fm.time() != transported.time {
        return Err(BmlError::MismatchedTimeline(format!(
            "flow map at t = {} but atoms at t = {}",
            fm.time(),
            transported.time
        )));
    }
    let seeds = fm.atom_seeds();
    if seeds.len() != mu0.len() || transported.measure.len() != mu0.len() {
        return Err(BmlError::MismatchedTimeline("atom counts differ".into()));
    }
    let mut max_discrepancy: f64 = 0.0;
    for ((&i, a0), a) in seeds.iter().zip(mu0.atoms()).zip(transported.measure.atoms()) {
        if fm.seeds()[i] != a0.position || a.weight.to_bits() != a0.weight.to_bits() {
            return Err(BmlError::MismatchedTimeline(format!("seed {i} does not match the initial atom")));
        }
        let x = fm.positions()[i];
        max_discrepancy = max_discrepancy.max((x[0] - a.position[0]).hypot(x[1] - a.position[1]));
    }
    Ok(SourceCheckReport {
        max_discrepancy,
        atoms: mu0.len(),
    })
}
