//! Allocation for series-parallel orders (including trees) and for
//! independent jobs.

pub mod fptas;
pub mod independent;
pub mod sp;

pub use fptas::{exact_frontier, fptas_allocate, FptasResult, FrontierPoint, ParetoFrontier};
pub use independent::{allocate_independent, IndependentAllocation};
pub use sp::{recognize_sp, transitive_closure, SpDecomposition, SpNode};
