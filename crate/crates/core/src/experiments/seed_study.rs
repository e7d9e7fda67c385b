//! Seed-variance study: refit the same saved target set under many
//! initialization/shuffle seeds and compare the resulting policies.

use rayon::prelude::*;

use crate::cartpole::PhysicsParams;
use crate::error::{Error, Result};
use crate::experiments::eval::{EvalReport, evaluate_policy};
use crate::nn::TrainConfig;
use crate::q_iteration::{Policy, TargetSet, fit_q};

/// Evaluation settings shared by every seed of a study.
#[derive(Debug, Clone, Copy)]
pub struct EvalConfig {
    pub n_episodes: usize,
    pub max_steps: usize,
    pub seed: u64,
}

/// Order statistics of the per-seed average returns (nearest-rank quartiles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl SpreadSummary {
    pub fn from_values(values: &[f64]) -> SpreadSummary {
        assert!(values.len() >= 2, "need at least two values");
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite returns"));
        let n = sorted.len();
        let rank = |p: f64| sorted[((p * n as f64).ceil() as usize).clamp(1, n) - 1];
        SpreadSummary {
            min: sorted[0],
            q1: rank(0.25),
            median: rank(0.5),
            q3: rank(0.75),
            max: sorted[n - 1],
        }
    }

    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone)]
pub struct SeedStudy {
    pub seeds: Vec<u64>,
    pub reports: Vec<EvalReport>,
    pub summary: SpreadSummary,
}

/// For each seed: fit a fresh Q to the same target set (the seed drives both
/// the net initialization and the train/validation shuffle), extract the
/// greedy policy, and evaluate it. Every evaluation uses the same episode
/// seed so the policies face identical start states.
pub fn seed_variance_study(
    targets: &TargetSet,
    seeds: &[u64],
    train: &TrainConfig,
    eval: &EvalConfig,
    physics: &PhysicsParams,
) -> Result<SeedStudy> {
    if seeds.len() < 2 {
        return Err(Error::TooSmall {
            what: "seed list",
            len: seeds.len(),
            min: 2,
        });
    }
    let reports: Vec<EvalReport> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = TrainConfig { seed, ..*train };
            let q = fit_q(targets, &cfg)?;
            evaluate_policy(
                &Policy::Greedy(q),
                physics,
                eval.n_episodes,
                eval.max_steps,
                eval.seed,
            )
        })
        .collect::<Result<_>>()?;
    let returns: Vec<f64> = reports.iter().map(|r| r.avg_return).collect();
    Ok(SeedStudy {
        seeds: seeds.to_vec(),
        reports,
        summary: SpreadSummary::from_values(&returns),
    })
}
