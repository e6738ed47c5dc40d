//! List scheduling of a fixed allocation, interval classification and the
//! phase-two bound checks, plus an exhaustive makespan oracle.

pub mod bounds;
pub mod brute;
pub mod intervals;
pub mod list;

pub use bounds::{verify_phase_bounds, BoundCheck, BoundReport, BoundStatus};
pub use brute::{brute_force_makespan, BruteLimit, BruteResult};
pub use intervals::{classify, interval_report, Interval, IntervalClass, IntervalReport};
pub use list::{check_work_conservation, list_schedule, IdleViolation, PriorityPolicy};
