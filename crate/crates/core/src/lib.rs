pub mod alloc_general;
pub mod alloc_special;
pub mod error;
pub mod instances;
pub mod metrics;
pub mod model;
pub mod oracles;
pub mod pipeline;
pub mod rational;
pub mod scheduler;

pub use error::{Error, Result};
pub use model::{
    AllocationDecision, AllocationVector, ExecProfile, Instance, Job, ResourceProfile, Schedule,
};
pub use rational::Rational;
