//! Flow maps, their Jacobians, and the inverse-Jacobian series.

pub mod checks;
pub mod flow;
pub mod neumann;

pub use checks::{gradient_bound_check, lagrangian_source_check, GradientBoundReport, SourceCheckReport, TransportRecord};
pub use flow::{chain_timeline, integrate_flow, integrate_flow_from, interior_lattice, seed_lattice, FlowMap};
pub use neumann::{neumann_inverse, neumann_series, InverseGradient, DEFAULT_TERMS};
