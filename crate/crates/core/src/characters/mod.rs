//! Trace constructions for finite-dimensional representations.
//!
//! Clock-and-shift pairs realize the rational rotation representations of
//! the discrete Heisenberg group, tensor powers of `π ⊕ 1` push traces
//! towards `δ_e`, block sums with rational multiplicities give convex
//! combinations of traces, and representations induced from central
//! subgroups of finite groups have traces supported on the subgroup.

mod group;
mod heisenberg;
mod mixing;

pub use group::{
    induced_central_trace, induced_representation, verify_induced_trace, CentralCharacterSpec,
    FiniteGroup, GroupFile, MonomialMatrix, MAX_GROUP_ORDER, MAX_TABLE_ORDER,
};
pub use heisenberg::{
    clock_shift_rep, clock_shift_twisted, convergents, heisenberg_word_matrix,
    heisenberg_word_trace, heisenberg_word_trace_twisted,
};
pub use mixing::{
    mix_traces, nearest_root_phase, parse_rational, root_net_bound, tensor_power_delta,
    with_trivial_summand, DeltaApproximation, ExactComplex, Mixture,
};
