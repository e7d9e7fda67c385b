//! qlab — an offline Q-learning laboratory on the cart-pole balancing task.
//!
//! The crate generates offline datasets with a random behavior policy, fits
//! Q-functions with a small from-scratch MLP regressor, and compares three
//! target regimes: bootstrapped one-step targets, rollout-based targets
//! through a learned one-step model, and rollout-based targets through the
//! true dynamics. On top of the iteration loop sit the diagnostics: policy
//! evaluation, retraining fixed target sets across seeds, and fine-grained
//! pole-angle slices of rollout values with jump metrics that show where the
//! regression target is discontinuous.
//!
//! Module map:
//! - [`cartpole`]: exact dynamics, reward, termination, reset.
//! - [`dataset`]: random-policy data generation, splitting, CSV persistence.
//! - [`nn`]: 5-64-1 ReLU regressor, analytic gradients, Adam, early stopping.
//! - [`dynamics_model`]: learned one-step transition model.
//! - [`q_iteration`]: target regimes, policies, rollouts, the outer loop.
//! - [`experiments`]: evaluation, seed studies, slices, emitters, plots.
//! - [`cli`]: the `qlab` command-line interface.

pub mod cartpole;
pub mod cli;
pub mod dataset;
pub mod dynamics_model;
pub mod error;
pub mod experiments;
pub mod nn;
pub mod q_iteration;
pub mod rng;
mod textio;

pub use error::{Error, Result};
