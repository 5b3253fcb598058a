//! Risk-sensitive reinforcement learning on tabular episodic MDPs under the
//! entropic risk measure.
//!
//! The crate provides exact entropic value-function solvers, cascaded
//! sub-optimality gaps with their normalizers, the RSVI2 and RSQ2 optimistic
//! learning agents, hard-instance generators, and a deterministic
//! regret-experiment harness. Everything here is pure computation over dense
//! `f64` tables: the crate is `no_std`-compatible (alloc required) and all
//! transcendental math goes through `libm` so that results are bit-identical
//! across platforms. IO, file formats, and the command-line front end live in
//! the companion `erl-cli` crate.
//!
//! Step indices `h` are 1-based throughout (`h ∈ 1..=H`, value tables extend
//! to `H+1`), matching the finite-horizon backward-induction convention;
//! states and actions are 0-based indices.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod agents;
pub mod gaps;
pub mod harness;
pub mod instances;
mod math;
pub mod mdp;
pub mod risk;
pub mod rng;

pub use agents::{
    BonusConfig, EpisodePolicySnapshot, EpisodicAgent, Rsq2, Rsvi2, UniformRandomAgent,
};
pub use gaps::{GapKind, GapValue, MinimalGapReport, Normalizers, ReachabilityMode};
pub use harness::{AgentKind, BoundCurves, EpisodeRecord, RegretTrace, RunConfig, ScalingReport};
pub use instances::{BanditKind, BetaRegime, LowerBoundParams};
pub use mdp::{MarkovPolicy, PrefixRewardBounds, TabularMdp, Trajectory, TrajectoryPrefix};
pub use risk::{RiskNeutralTables, RiskParams, RiskValueTables};
pub use rng::RngStream;
