//! Experiment plumbing: the exact oracle, scenario files, mode dispatch and
//! result emission.

pub mod emit;
pub mod experiment;
pub mod oracle;
pub mod scenario;

pub use emit::{emit, parse, Format, Table, Value};
pub use experiment::{run_experiment, DemandChoice, ExperimentSpec, Mode, Outcome};
pub use oracle::{exact_decodability_oracle, OracleReport};
pub use scenario::ScenarioFile;
