//! Seeded synthetic corpora and brute-force reference implementations.

mod oracle;
mod scenario;

pub use oracle::{oracle_assignment, oracle_owta, oracle_recall, OracleComponents, MAX_FRAMES, MAX_TRACKS};
pub use scenario::{gen_scenario, stream, Motion, Scenario, ScenarioConfig, KNOWN_CATEGORY};
