//! Seeded instance generators, the adversarial lower-bound family, and JSON
//! file formats.

pub mod generate;
pub mod io;
pub mod lowerbound;

pub use generate::{
    generate, generate_instance, Generated, GeneratorConfig, GeneratorKind, TIME_DENOMINATOR,
};
pub use io::{
    allocations_json, bundle_to_string, instance_to_string, interval_report_json, load_allocation,
    load_document, load_instance, load_schedule, parse_allocation, parse_document, parse_instance,
    parse_schedule, save_bundle, save_instance, save_schedule, schedule_to_string,
    InstanceDocument,
};
pub use lowerbound::{lower_bound_bundle, LowerBoundBundle};
