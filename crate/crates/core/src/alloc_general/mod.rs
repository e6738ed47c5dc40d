//! Allocation for general precedence graphs: pruning, the fractional
//! time-cost relaxation, threshold rounding and the utilization cap.

pub mod adjust;
pub mod dtct;
pub mod fractional;
pub mod lp;
pub mod params;
pub mod prune;

pub use adjust::{
    adjust_allocation, area_bound_applies, check_adjustment_bounds, utilization_caps, Adjustment,
    AdjustmentBound,
};
pub use dtct::{build_dtct, DtctAlternative, DtctProject, DtctTask};
pub use fractional::{round_allocation, solve_fractional, FractionalSolution, RoundedAllocation};
pub use params::{
    actual_ratio, estimated_ratio, golden_ratio_bound, h_root, h_value, objective_values,
    parameters_with_overrides, rounded_ratio, select_parameters, select_parameters_with_epsilon,
    GraphClass, ObjectiveValues, ParamChoice,
};
pub use prune::{all_alternatives, prune_alternatives, prune_dominated, Alternative};
