//! Resilience games over transition systems with controlled, uncontrolled
//! (failure) and repair transitions.
//!
//! A state is `k`-resilient when a controller can keep the system out of
//! its error states against any number of failures, provided that no more
//! than `k` of them arrive before the system is back in the resilient
//! region. [`game::res_k`] computes that region and a controller for it,
//! [`game::k_max`] the largest such `k`, and [`oracle`] cross-checks both.

pub mod format;
pub mod game;
pub mod model;
pub mod oracle;
pub mod random;
pub mod risk;
pub mod stateset;
pub mod strategy;

pub use game::{k_max, res_k, safe_k, KMaxResult, Mode, Move, ResilienceLevel};
pub use model::{example_system, EdgeKind, StateId, SystemBuilder, TransitionSystem, ValidationOptions};
pub use stateset::StateSet;
pub use strategy::{RecoveryMove, ResilienceStrategy};
