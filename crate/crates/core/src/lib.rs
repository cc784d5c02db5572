//! Benchmark toolkit for community detection in temporal networks.
//!
//! The crate has two halves. The generator half builds ground truth: it
//! samples evolving-community skeletons (birth time, lifespan, per-step
//! target sizes), assigns member nodes with a configurable core-retention
//! flow, and materialises one stochastic-block-model graph per timestep.
//! The evaluation half scores a detected temporal partition against that
//! ground truth along three axes: per-snapshot partition quality,
//! node-transition tracking across time gaps, and community life-cycle
//! events (form, grow, merge, split, dissolve and their compounds).
//!
//! A deterministic seeded RNG with named substreams keeps every artifact
//! reproducible: the same configuration and seed always produce the same
//! communities, graphs, files and reports, regardless of parallelism.

pub mod detect;
pub mod error;
pub mod events;
pub mod generate;
pub mod io;
pub mod membership;
pub mod metrics;
pub mod model;
pub mod netgen;
pub mod sampling;
pub mod scenario;
pub mod stats;
pub mod transitions;

pub use error::{ConfigError, EvalError};
pub use generate::generate_ground_truth;
pub use model::{
    CommunityId, EvolvingCommunity, GroundTruth, NodeId, Snapshot, StaticCommunity,
    TemporalPartition,
};
pub use scenario::ScenarioConfig;
