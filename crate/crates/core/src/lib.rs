//! Minimum-time consensus for double-integrator agents with unit-bounded
//! inputs and a shared fuel budget.
//!
//! The attainable set of every agent is convex, so the first time all sets
//! share a point is the latest first-contact time over all triplets.

pub mod attainable;
pub mod consensus;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod oracle;
pub mod synthesis;
pub mod tol;
pub mod triplet;

pub use attainable::{
    boundary_polyline, consensus_band, contains, feasible, slice_extent, velocity_band, Containment,
    ReachSpec, SliceExtent, VelocityBand,
};
pub use consensus::{
    hull_filter, partition_triplets, solve_fleet, solve_fleet_distributed, ConsensusResult, Fleet,
    Rendezvous, SolveOptions,
};
pub use dynamics::{apply_plan, fuel_of, propagate, sample_trajectory, AgentState, Polarity, SwitchPlan, Trajectory};
pub use error::{Error, Result};
pub use oracle::{oracle_min_consensus, oracle_reachable};
pub use synthesis::{synthesize, verify_rendezvous, RendezvousReport, SynthesizedControl};
pub use triplet::{
    pair_min_time, recover_switchings, scenario_solve, solve_triplet, Scenario, Sequence, TripletCase,
    TripletSolution, SCENARIOS,
};
