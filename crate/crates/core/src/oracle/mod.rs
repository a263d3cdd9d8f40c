//! Independent checks for the game engine: an explicit position-graph
//! solver for small systems and an adversarial simulator for strategies.

pub mod arena;
mod brute;
mod simulate;

pub use brute::{brute_force_res_k, brute_force_safe_k, OracleError, OracleLimits};
pub use simulate::{
    record_play, simulate, Mover, Outcome, Phase, PlayTrace, Policy, Position, SimulationConfig,
    SimulationError, SimulationReport, StartStates, TraceStep, MAX_HORIZON,
};
