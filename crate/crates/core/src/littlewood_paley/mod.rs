//! Dyadic frequency decomposition, Besov norms and the inequality checks
//! built on them.

pub mod besov;
pub mod bony;
pub mod estimates;
pub mod partition;

pub use besov::{
    besov_norm, besov_norm_vector, decompose, decompose_default, shell_norms, weighted_shell_sequence,
    weighted_sup, BesovParams, ShellDecomposition,
};
pub use bony::{bony_terms, bony_terms_all, bony_terms_with_fault, direct_block, BonyFault, BonyTerms};
pub use estimates::{
    heat_smoothing_check, heat_step, interpolation_index, log_interp_check, product_estimate, verify_product_estimate,
    CorpusPair, EstimateRow, ForcingTimeline, HeatReport, LogInterpReport, MarginReport, ProductVariant,
};
pub use partition::DyadicPartition;
