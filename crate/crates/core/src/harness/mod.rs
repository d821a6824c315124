//! Scenario files, benchmark schemes, sweeps and field dumps.

pub mod config;
pub mod field;
pub mod schemes;
pub mod sweep;

pub use config::{load_scenario, LoadedScenario, RunSettings, ScenarioFile};
pub use field::{emit_field, FieldSummary};
pub use schemes::{evaluate, run, run_scheme, Mode, RunReport, SchemeKind, SchemeResult};
pub use sweep::{run_sweep, SweepSpec, SweepVariable};
