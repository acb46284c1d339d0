//! Finite atomic measures: total variation, support, mollification,
//! transport and the bounded-Lipschitz metric.

pub mod atomic;
pub mod distance;
pub mod eulerian;
pub mod io;
pub mod mollify;
pub mod transport;

pub use atomic::{support_radius, total_variation, Atom, AtomicMeasure};
pub use distance::{bl_distance, bl_distance_densities, bl_dual};
pub use eulerian::eulerian_advect_density;
pub use io::{read_measure, write_measure};
pub use mollify::{mollifier, mollify, scaled_mollifier, MollifiedDensity, MOLLIFIER_MASS};
pub use transport::{check_inside, step_count, transport_atoms, transport_atoms_traced, transport_step, TransportStep};
