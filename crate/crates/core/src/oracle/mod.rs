//! Brute-force baselines that share domain types with the solver but none of
//! its simplex or branch-and-bound code.

mod enumerate;
mod reference;

pub use enumerate::{assignment_count, enumerate_milp, EnumerationReport};
pub use reference::{reference_run, MAX_CLASSES, MAX_DERS, MAX_INTERVALS, MODEL_CAP};
