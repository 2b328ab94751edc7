//! Computational clone theory on finite operation tables and on windowed
//! operations over `Y x Z` with the shift map.

pub mod dot;
pub mod engine;
pub mod filter;
pub mod ops;
pub mod semilattice;
pub mod shift;
pub mod verify;

pub use dot::{emit_lattice_dot, DotError};
pub use engine::{
    clone_leq_upto, contains, generate_clone, interpolates, pol_member, Budget, CloneError,
    CloneSpec, ClosureResult, Interpolation, Membership, Predicate,
};
pub use filter::{cf_member, filter_lattice, membership_by_certificate, FilterError, PrincipalFilter};
pub use ops::{
    compose, diagonal, evaluate_tree, evaluate_tree_on, fix_set, nix_set, projection, Certificate,
    CompositionTree, OpError, OpTable, Subset,
};
pub use semilattice::{Congruence, CongruenceOrder, Semilattice, SemilatticeError};
pub use shift::{pol_sn_member, Point, ShiftError, WindowedOp, Window};
pub use verify::{run_scenario, Report, RunConfig, RunError, Scenario};
