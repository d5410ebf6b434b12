//! Analytic rank, partition rank, degeneracy, forcing, and tower bounds.

pub mod bias;
pub mod degeneracy;
pub mod forcing;
pub mod prank;
pub mod tower;

pub use bias::{arank, bias_charsum_crosscheck, bias_exact, bias_exact_slice_mode, AnalyticRank, ExactBias};
pub use degeneracy::{
    degenerate_decompose, degenerate_sample, membership_subspace_sum, nonempty_subsets, DegeneracyComponent,
    DegeneracyWitness, Membership, ModeSet, SubspaceSum,
};
pub use forcing::{forcing_check, ForcingInstance, ForcingVerdict};
pub use prank::{prank_bounds, prank_one_check, slice_decomposition, PrankBounds, PrankCertificate, PrankStatus, Summand};
pub use tower::{tower_bound, TowerBound};
