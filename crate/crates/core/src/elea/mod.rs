//! Transmission-map estimation by weighted-L1 contextual regularization of
//! the LPE map, and recovery of the ELEA image from it.

mod diff;
mod solver;

pub use diff::{
    build_diff_bank, compute_weights, default_stencils, DiffFilterBank, Stencil, WeightMaps,
};
pub use solver::{
    elea_unnormalized, objective_value, recover_elea, shrink, solve_transmission,
    solve_transmission_traced, EleaParams, HqsSolver, RhoMode, TraceEntry, TransmissionMap,
    TransmissionSolution,
};
