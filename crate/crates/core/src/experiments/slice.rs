//! Pole-angle slices of rollout-evaluated policy values and the jump metrics
//! that separate genuine value discontinuities from grid artifacts: real
//! jumps keep their size under grid refinement, continuous ramps shrink.

use rayon::prelude::*;

use crate::cartpole::{PhysicsParams, State};
use crate::error::{Error, Result};
use crate::q_iteration::{Policy, RolloutConfig, Stepper, rollout_return};
use crate::rng::{self, tag};

/// An evenly spaced sweep over the pole angle with the other three state
/// variables held at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceSpec {
    pub n_points: usize,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl SliceSpec {
    pub fn new(n_points: usize, theta_min: f64, theta_max: f64) -> Result<SliceSpec> {
        if n_points < 2 {
            return Err(Error::TooSmall {
                what: "slice grid",
                len: n_points,
                min: 2,
            });
        }
        if !(theta_min.is_finite() && theta_max.is_finite() && theta_min < theta_max) {
            return Err(Error::InvalidConfig(format!(
                "slice range [{theta_min}, {theta_max}] is not a proper interval"
            )));
        }
        Ok(SliceSpec {
            n_points,
            theta_min,
            theta_max,
        })
    }

    /// Full open angle interval of the termination bound; endpoints pulled in
    /// by a relative 1e-9 so grid ends are never instantly terminal.
    pub fn for_physics(physics: &PhysicsParams, n_points: usize) -> Result<SliceSpec> {
        let edge = physics.theta_bound * (1.0 - 1e-9);
        SliceSpec::new(n_points, -edge, edge)
    }

    /// Same range on a grid `factor` times finer.
    pub fn refined(&self, factor: usize) -> Result<SliceSpec> {
        SliceSpec::new(
            self.n_points * factor.max(1),
            self.theta_min,
            self.theta_max,
        )
    }

    pub fn thetas(&self) -> Vec<f64> {
        let step = (self.theta_max - self.theta_min) / (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|i| self.theta_min + i as f64 * step)
            .collect()
    }
}

impl Default for SliceSpec {
    fn default() -> Self {
        SliceSpec::for_physics(&PhysicsParams::default(), 10_000).expect("valid default")
    }
}

/// Jump statistics of a slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscontinuityMetrics {
    /// Largest absolute difference between adjacent grid values.
    pub max_adjacent_jump: f64,
    /// Max jump on a finer grid divided by max jump on this grid; close to 1
    /// for genuine discontinuities, close to the grid ratio for smooth ramps.
    pub refinement_ratio: Option<f64>,
}

/// Largest absolute adjacent difference.
pub fn max_adjacent_jump(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

/// Number of adjacent differences strictly above `tau`.
pub fn jump_count(values: &[f64], tau: f64) -> usize {
    values
        .windows(2)
        .filter(|w| (w[1] - w[0]).abs() > tau)
        .count()
}

/// Compute jump metrics; the refinement ratio is present when a refined
/// sweep of the same range is supplied.
pub fn discontinuity_metrics(values: &[f64], refined: Option<&[f64]>) -> DiscontinuityMetrics {
    assert!(values.len() >= 2, "need at least two slice values");
    let base = max_adjacent_jump(values);
    let refinement_ratio = refined.map(|r| {
        let fine = max_adjacent_jump(r);
        if base == 0.0 {
            if fine == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            fine / base
        }
    });
    DiscontinuityMetrics {
        max_adjacent_jump: base,
        refinement_ratio,
    }
}

/// One value slice: the grid, the per-angle rollout values, and metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceResult {
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    /// Label of the policy that produced the values.
    pub policy: String,
    pub metrics: DiscontinuityMetrics,
}

impl SliceResult {
    pub fn jump_count(&self, tau: f64) -> usize {
        jump_count(&self.values, tau)
    }
}

/// Sweep the pole angle: at each grid angle, start from (0, 0, theta, 0) and
/// roll the policy out from its own first action; the value recorded is the
/// policy's own rollout return at that state. Stochastic policies draw one
/// sampled rollout per point from a substream derived from (seed, index).
pub fn q_slice<S: Stepper + ?Sized>(
    policy: &Policy,
    spec: &SliceSpec,
    stepper: &S,
    cfg: &RolloutConfig,
    seed: u64,
) -> Result<SliceResult> {
    cfg.validate()?;
    let thetas = spec.thetas();
    let values: Vec<f64> = thetas
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let mut rng = rng::substream(seed, tag::SLICE_POINT, i as u64);
            let state = State::new(0.0, 0.0, theta, 0.0);
            let first = policy.action(state, &mut rng);
            rollout_return(state, first, policy, stepper, cfg, &mut rng)
        })
        .collect();
    let metrics = discontinuity_metrics(&values, None);
    Ok(SliceResult {
        thetas,
        values,
        policy: policy.label(),
        metrics,
    })
}
