//! Capacity analysis for spectrum sharing between a primary radio (PR) and a
//! cognitive radio (CR) that protects the PR with an interference-power
//! constraint, either on average over fading states or at every state.
//!
//! The crate calibrates the optimal CR and PR power-control rules on Monte
//! Carlo fading batches, estimates ergodic, outage and delay-limited
//! capacities, and checks that average-interference constraints hurt the PR
//! no more than peak constraints of the same threshold.
//!
//! Capacities are reported in bits per complex dimension.

pub mod capacity;
pub mod cr_policy;
pub mod error;
pub mod experiments;
pub mod fading;
pub mod numerics;
pub mod pr_policy;

pub use capacity::{CapacityEstimate, CapacityKind, DelayLimited, OutageFamily, OutageResult};
pub use cr_policy::{CrConstraintSpec, CrPolicy};
pub use error::{Error, Result};
pub use fading::{BatchView, FadingBatch, GainDistribution};
pub use numerics::MeanEstimate;
pub use pr_policy::{EffectiveState, PrPolicy};
