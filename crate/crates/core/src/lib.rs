//! Safety-constrained reinforcement learning on reduced-order cascade
//! models with certified zero-shot transfer to the full-order plant.
//!
//! The crate trains a constrained policy on a reduced planar-quadrotor model
//! (attitude replaced by a commanded reference), deploys it behind a PD
//! attitude loop on the full plant, sweeps the inner-loop gains to map the
//! empirical failure probability and tracking error, and evaluates a
//! finite-horizon lower bound on the transferred safety probability from
//! constants fitted on instrumented rollouts. Exhaustive finite-MDP oracles
//! validate every inequality in the bound's derivation.
//!
//! Monte Carlo workloads (rollout batches, gain sweeps, certification runs)
//! are data-parallel via rayon under the `parallel` feature (enabled by
//! default); disabling the feature selects an identical sequential path.
//! All randomness derives from one master seed through named streams, so
//! outputs are byte-stable regardless of thread count.

pub mod bounds;
pub mod cascade;
pub mod checkpoint;
pub mod cmdp;
pub mod config;
pub mod error;
pub mod exec;
pub mod inner_loop;
pub mod nn;
pub mod oracle;
pub mod policy;
pub mod quadrotor;
pub mod rng;
pub mod transfer;
pub mod types;

pub use error::{Error, Result};
