//! Receding-horizon scheduling of a residential microgrid.
//!
//! A population of price-responsive DERs ([`der`]) draws load against a
//! clearing price ([`market`]); renewable output ([`res`]) covers what it
//! can and DG/BESS classes bid the rest through a dispatch MILP
//! ([`milp`], [`scheduler`]). [`oracle`] holds brute-force references for
//! testing.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod der;
pub mod error;
pub mod market;
pub mod milp;
pub mod oracle;
pub mod report;
pub mod res;
pub mod scheduler;
pub mod series;

pub use config::{load_config, RunConfig};
pub use error::{Error, Result};
pub use report::{emit_comparison, emit_report, RunReport};
pub use scheduler::{run_all_scenarios, run_scenario, Scenario};
