//! Differential pricing for downlink power allocation.
//!
//! A base station with a fixed power budget serves users on orthogonal
//! channels. Each user bids a per-bit price; the base station then picks the
//! revenue-maximizing allocation subject to every user's demanded throughput.
//! The allocator is a price-weighted, demand-capped water-filling; users bid
//! against a belief about the resulting budget dual.

pub mod allocation;
pub mod bidding;
pub mod error;
pub mod kkt;
pub mod oracle;
pub mod profile;
pub mod simulation;

pub use allocation::{
    aggregate_power, demand_cap, flat_rate_allocation, solve_allocation, throughput, Allocation,
    AllocationWarning,
};
pub use bidding::{
    believed_power, believed_throughput, check_belief_consistency, feasible_interval, foc_residual,
    simple_belief, solve_bid, BeliefParams, BidKind, BidResult, FeasibleInterval, FocMode,
    Violation, ViolationKind,
};
pub use error::{Error, Result};
pub use kkt::{verify_kkt, ConditionCheck, KktReport};
pub use oracle::{grid_allocation_oracle, grid_bid_oracle, GridAllocation, GridBid, GridSpec};
pub use profile::{Budget, UserProfile};
pub use simulation::{
    announce_beliefs, flat_rate_round, run_round, welfare_sweep, Execution, RoundOutcome, Scenario,
    SweepConfig, SweepResult,
};
