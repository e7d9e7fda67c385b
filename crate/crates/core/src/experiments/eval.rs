//! Policy evaluation: undiscounted episode returns over a batch of reset
//! states, with a success flag for episodes that survive to the step cap.

use rayon::prelude::*;

use crate::cartpole::{self, PhysicsParams};
use crate::error::{Error, Result};
use crate::q_iteration::{Policy, RealDynamics, Stepper};
use crate::rng::{self, tag};

/// Aggregate outcome of one evaluation batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    /// Mean undiscounted episode return.
    pub avg_return: f64,
    /// Fraction of episodes that reached the step cap without terminating.
    pub success_rate: f64,
    /// True iff every episode reached the cap.
    pub successful: bool,
    pub n_episodes: usize,
    pub max_steps: usize,
}

/// Evaluate on the real dynamics.
pub fn evaluate_policy(
    policy: &Policy,
    physics: &PhysicsParams,
    n_episodes: usize,
    max_steps: usize,
    seed: u64,
) -> Result<EvalReport> {
    evaluate_policy_with(policy, &RealDynamics(*physics), n_episodes, max_steps, seed)
}

/// Evaluate against any stepper. Episodes start from the reset distribution
/// and accumulate undiscounted reward until termination or `max_steps`.
/// Episode i draws from a substream derived from (seed, i), so the report is
/// independent of worker count.
pub fn evaluate_policy_with<S: Stepper>(
    policy: &Policy,
    stepper: &S,
    n_episodes: usize,
    max_steps: usize,
    seed: u64,
) -> Result<EvalReport> {
    if n_episodes == 0 {
        return Err(Error::InvalidConfig("n_episodes must be at least 1".into()));
    }
    if max_steps == 0 {
        return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
    }
    let episodes: Vec<(f64, bool)> = (0..n_episodes)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::substream(seed, tag::EVAL_EPISODE, i as u64);
            let mut state = cartpole::reset(&mut rng);
            let mut total = 0.0;
            for _ in 0..max_steps {
                let action = policy.action(state, &mut rng);
                let step = stepper.step(state, action);
                total += step.reward;
                if step.terminal {
                    return (total, false);
                }
                state = step.next_state;
            }
            (total, true)
        })
        .collect();

    let sum: f64 = episodes.iter().map(|(ret, _)| ret).sum();
    let successes = episodes.iter().filter(|(_, ok)| *ok).count();
    let success_rate = successes as f64 / n_episodes as f64;
    Ok(EvalReport {
        avg_return: sum / n_episodes as f64,
        success_rate,
        successful: successes == n_episodes,
        n_episodes,
        max_steps,
    })
}
