//! Q-functions, policies, and the three target-construction regimes:
//! bootstrapped one-step targets, and rollout-based targets through either a
//! learned one-step model or the true dynamics. Also the outer loop that
//! alternates target computation, Q fitting, and policy evaluation.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::cartpole::{Action, PhysicsParams, State, StepResult};
use crate::dataset::Dataset;
use crate::dynamics_model::DynamicsModel;
use crate::error::{Error, Result};
use crate::experiments::eval::{EvalReport, evaluate_policy};
use crate::nn::{self, MlpParams, TrainConfig};
use crate::rng::{self, tag};
use crate::textio;

/// Regressor input encoding of a state-action pair:
/// [x, x_dot, theta, theta_dot, enc(a)] with enc(Left) = -1, enc(Right) = +1.
pub fn q_input(s: State, a: Action) -> [f64; nn::INPUT_DIM] {
    [s.x, s.x_dot, s.theta, s.theta_dot, a.encoding()]
}

/// A Q-function: the 5-64-1 regressor evaluated on the q_input encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct QFunction {
    pub params: MlpParams,
}

impl QFunction {
    pub fn new(params: MlpParams) -> QFunction {
        QFunction { params }
    }

    pub fn value(&self, s: State, a: Action) -> f64 {
        self.params.forward(&q_input(s, a))
    }

    /// Action with the larger Q-value; exact ties break toward Left.
    pub fn greedy_action(&self, s: State) -> Action {
        if self.value(s, Action::Left) >= self.value(s, Action::Right) {
            Action::Left
        } else {
            Action::Right
        }
    }

    pub fn max_value(&self, s: State) -> f64 {
        self.value(s, Action::Left)
            .max(self.value(s, Action::Right))
    }
}

/// Action-selection rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    /// argmax over the two actions of a Q-function.
    Greedy(QFunction),
    /// With probability epsilon a uniform random action, otherwise greedy.
    EpsilonGreedy { q: QFunction, epsilon: f64 },
    /// Always push left.
    PushLeft,
    /// Push against the pole angle: Right when theta > 0, else Left.
    AntiAngle,
}

impl Policy {
    pub fn epsilon_greedy(q: QFunction, epsilon: f64) -> Result<Policy> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in [0, 1], got {epsilon}"
            )));
        }
        Ok(Policy::EpsilonGreedy { q, epsilon })
    }

    /// Select an action. Only the epsilon-greedy variant consumes from `rng`.
    pub fn action<R: Rng + ?Sized>(&self, s: State, rng: &mut R) -> Action {
        match self {
            Policy::Greedy(q) => q.greedy_action(s),
            Policy::EpsilonGreedy { q, epsilon } => {
                if rng.random::<f64>() < *epsilon {
                    if rng.random::<f64>() < 0.5 {
                        Action::Left
                    } else {
                        Action::Right
                    }
                } else {
                    q.greedy_action(s)
                }
            }
            Policy::PushLeft => Action::Left,
            Policy::AntiAngle => {
                if s.theta > 0.0 {
                    Action::Right
                } else {
                    Action::Left
                }
            }
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Policy::EpsilonGreedy { epsilon, .. } if *epsilon > 0.0)
    }

    pub fn label(&self) -> String {
        match self {
            Policy::Greedy(_) => "greedy".into(),
            Policy::EpsilonGreedy { epsilon, .. } => format!("eps-greedy({epsilon})"),
            Policy::PushLeft => "push-left".into(),
            Policy::AntiAngle => "anti-angle".into(),
        }
    }
}

/// Rollout horizon and discount. With the defaults (K = 1000, gamma = 0.99)
/// the discounted mass discarded at the horizon, gamma^K / (1 - gamma), is
/// about 4.32e-3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutConfig {
    pub horizon: usize,
    pub gamma: f64,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        RolloutConfig {
            horizon: 1000,
            gamma: 0.99,
        }
    }
}

impl RolloutConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Upper bound on the discounted reward mass beyond the horizon.
    pub fn truncation_bound(&self) -> f64 {
        self.gamma.powi(self.horizon as i32) / (1.0 - self.gamma)
    }
}

/// One-step environment abstraction for rollouts: either the true dynamics or
/// a learned model, both with the analytic reward evaluated on the successor
/// state and the real termination bounds.
pub trait Stepper: Sync {
    fn step(&self, s: State, a: Action) -> StepResult;
}

/// The exact benchmark dynamics.
#[derive(Debug, Clone, Copy)]
pub struct RealDynamics(pub PhysicsParams);

impl Stepper for RealDynamics {
    fn step(&self, s: State, a: Action) -> StepResult {
        self.0.step(s, a).expect("rollout states stay finite")
    }
}

/// A learned one-step model with the real reward and termination rule applied
/// to its predicted successor states.
#[derive(Debug, Clone)]
pub struct LearnedDynamics {
    pub model: DynamicsModel,
    pub physics: PhysicsParams,
}

impl Stepper for LearnedDynamics {
    fn step(&self, s: State, a: Action) -> StepResult {
        let next = self.model.predict(s, a);
        StepResult {
            next_state: next,
            reward: self.physics.reward(next),
            terminal: self.physics.is_terminal(next),
        }
    }
}

/// Which rule produced a target set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Bootstrapped one-step targets.
    Nfq,
    /// Rollout targets through the learned transition model.
    BsfLearned,
    /// Rollout targets through the true dynamics.
    BsfReal,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Nfq, Variant::BsfLearned, Variant::BsfReal];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Nfq => "nfq",
            Variant::BsfLearned => "bsf",
            Variant::BsfReal => "bsf-real",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "nfq" => Ok(Variant::Nfq),
            "bsf" => Ok(Variant::BsfLearned),
            "bsf-real" => Ok(Variant::BsfReal),
            other => Err(Error::InvalidConfig(format!("unknown variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a target set came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub regime: String,
    pub iteration: Option<usize>,
    pub policy: String,
}

/// Supervised fitting problem for one Q iteration: encoded (s_t, a_t) inputs
/// and scalar regression targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pub inputs: Vec<[f64; nn::INPUT_DIM]>,
    pub targets: Vec<f64>,
    pub provenance: Provenance,
}

impl TargetSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Bootstrapped targets: r_t + gamma * max_a Q(s_{t+1}, a), and r_t alone on
/// terminal transitions.
pub fn nfq_targets(q: &QFunction, data: &Dataset, gamma: f64) -> TargetSet {
    let mut inputs = Vec::with_capacity(data.len());
    let mut targets = Vec::with_capacity(data.len());
    for t in &data.transitions {
        inputs.push(q_input(t.state, t.action));
        targets.push(if t.terminal {
            t.reward
        } else {
            t.reward + gamma * q.max_value(t.next_state)
        });
    }
    TargetSet {
        inputs,
        targets,
        provenance: Provenance {
            regime: Variant::Nfq.as_str().into(),
            iteration: None,
            policy: "greedy".into(),
        },
    }
}

/// Truncated discounted return of a rollout that takes `first_action` and
/// follows `policy` afterwards. Accumulation stops at the horizon or with the
/// reward of the first terminal step. Only stochastic policies consume from
/// `rng`.
pub fn rollout_return<S, R>(
    start: State,
    first_action: Action,
    policy: &Policy,
    stepper: &S,
    cfg: &RolloutConfig,
    rng: &mut R,
) -> f64
where
    S: Stepper + ?Sized,
    R: Rng + ?Sized,
{
    let mut total = 0.0;
    let mut discount = 1.0;
    let mut state = start;
    let mut action = first_action;
    for _ in 0..cfg.horizon {
        let step = stepper.step(state, action);
        total += discount * step.reward;
        if step.terminal {
            break;
        }
        discount *= cfg.gamma;
        state = step.next_state;
        action = policy.action(state, rng);
    }
    total
}

/// Rollout-based targets: r_t + gamma * (return of a policy rollout started
/// at s_{t+1} with the policy's own action), and r_t alone on terminal
/// transitions. Per-transition rollouts run in parallel on substreams derived
/// from (seed, transition index), so results are independent of worker count.
pub fn bsf_targets<S: Stepper>(
    policy: &Policy,
    data: &Dataset,
    stepper: &S,
    cfg: &RolloutConfig,
    seed: u64,
) -> Result<TargetSet> {
    cfg.validate()?;
    let pairs: Vec<([f64; nn::INPUT_DIM], f64)> = data
        .transitions
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let input = q_input(t.state, t.action);
            let target = if t.terminal {
                t.reward
            } else {
                let mut rng = rng::substream(seed, tag::ROLLOUT, i as u64);
                let first = policy.action(t.next_state, &mut rng);
                t.reward
                    + cfg.gamma
                        * rollout_return(t.next_state, first, policy, stepper, cfg, &mut rng)
            };
            (input, target)
        })
        .collect();
    let (inputs, targets) = pairs.into_iter().unzip();
    Ok(TargetSet {
        inputs,
        targets,
        provenance: Provenance {
            regime: "rollout".into(),
            iteration: None,
            policy: policy.label(),
        },
    })
}

pub const MIN_FIT_SIZE: usize = 10;

/// Fit a fresh Q-function to a target set: shuffled 70/30 train/validation
/// split, then early-stopped training. `cfg.seed` drives the split, the
/// initialization, and the batch order.
pub fn fit_q(targets: &TargetSet, cfg: &TrainConfig) -> Result<QFunction> {
    if targets.len() < MIN_FIT_SIZE {
        return Err(Error::TooSmall {
            what: "target set",
            len: targets.len(),
            min: MIN_FIT_SIZE,
        });
    }
    let n = targets.len();
    let mut split_rng = rng::substream(cfg.seed, tag::SPLIT, 0);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut split_rng);
    let n_train = ((0.7 * n as f64).floor() as usize).clamp(1, n - 1);
    let gather = |idx: &[usize]| {
        nn::RegressionSet::new(
            idx.iter().map(|&i| targets.inputs[i]).collect(),
            idx.iter().map(|&i| targets.targets[i]).collect(),
        )
    };
    let train_set = gather(&indices[..n_train])?;
    let val_set = gather(&indices[n_train..])?;
    let (params, _) = nn::train(&train_set, &val_set, cfg)?;
    Ok(QFunction::new(params))
}

/// Configuration of one outer-loop run. Per-iteration seeds are derived from
/// `master_seed`; the `seed` field of `train` is ignored.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub variant: Variant,
    pub iterations: usize,
    pub rollout: RolloutConfig,
    pub train: TrainConfig,
    pub eval_episodes: usize,
    pub eval_max_steps: usize,
    pub master_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            variant: Variant::BsfReal,
            iterations: 30,
            rollout: RolloutConfig::default(),
            train: TrainConfig::default(),
            eval_episodes: 1000,
            eval_max_steps: 5000,
            master_seed: 0,
        }
    }
}

/// One completed iteration: the targets computed from the previous policy,
/// the Q-function fitted to them, and the greedy policy's evaluation.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub targets: TargetSet,
    pub q: QFunction,
    pub eval: EvalReport,
}

#[derive(Debug, Clone)]
pub struct IterationHistory {
    pub variant: Variant,
    pub records: Vec<IterationRecord>,
    /// The transition model trained up front by the learned-model variant.
    pub model: Option<DynamicsModel>,
}

/// Run the outer loop: iteration 0 starts from a randomly initialized Q; each
/// iteration computes targets per the variant using the greedy policy of the
/// previous Q, fits a fresh Q, and evaluates it on the real dynamics. The
/// learned-model variant trains its transition model once up front. All
/// evaluations share one derived seed so iterations see the same start states.
pub fn run_iterations(cfg: &RunConfig, data: &Dataset) -> Result<IterationHistory> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidConfig("iterations must be at least 1".into()));
    }
    cfg.rollout.validate()?;
    cfg.train.validate()?;
    let physics = data.physics;
    let master = cfg.master_seed;

    let learned = match cfg.variant {
        Variant::BsfLearned => {
            let model_cfg = TrainConfig {
                seed: rng::mix(master, tag::MODEL, 0),
                ..cfg.train
            };
            Some(LearnedDynamics {
                model: crate::dynamics_model::train_model(data, &model_cfg)?,
                physics,
            })
        }
        _ => None,
    };

    let mut q = QFunction::new(MlpParams::init(&mut rng::substream(master, tag::Q_INIT, 0)));
    let eval_seed = rng::mix(master, tag::EVAL, 0);
    let mut records = Vec::with_capacity(cfg.iterations);

    for i in 0..cfg.iterations {
        let policy = Policy::Greedy(q.clone());
        let targets_seed = rng::mix(master, tag::TARGETS, i as u64);
        let mut targets = match cfg.variant {
            Variant::Nfq => nfq_targets(&q, data, cfg.rollout.gamma),
            Variant::BsfReal => bsf_targets(
                &policy,
                data,
                &RealDynamics(physics),
                &cfg.rollout,
                targets_seed,
            )?,
            Variant::BsfLearned => bsf_targets(
                &policy,
                data,
                learned.as_ref().expect("model trained above"),
                &cfg.rollout,
                targets_seed,
            )?,
        };
        targets.provenance.regime = cfg.variant.as_str().into();
        targets.provenance.iteration = Some(i);

        let fit_cfg = TrainConfig {
            seed: rng::mix(master, tag::FIT, i as u64),
            ..cfg.train
        };
        let next_q = fit_q(&targets, &fit_cfg)?;
        let eval = evaluate_policy(
            &Policy::Greedy(next_q.clone()),
            &physics,
            cfg.eval_episodes,
            cfg.eval_max_steps,
            eval_seed,
        )?;
        records.push(IterationRecord {
            iteration: i,
            targets,
            q: next_q.clone(),
            eval,
        });
        q = next_q;
    }
    Ok(IterationHistory {
        variant: cfg.variant,
        records,
        model: learned.map(|l| l.model),
    })
}

pub const TARGETS_HEADER: &str = "x,x_dot,theta,theta_dot,action_enc,target";

/// Write a target set as CSV with its provenance in leading comments.
pub fn save_targets(targets: &TargetSet, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(32 * targets.len() + 128);
    textio::push_comment(&mut out, "regime", &targets.provenance.regime);
    if let Some(iteration) = targets.provenance.iteration {
        textio::push_comment(&mut out, "iteration", iteration);
    }
    textio::push_comment(&mut out, "policy", &targets.provenance.policy);
    out.push_str(TARGETS_HEADER);
    out.push('\n');
    for (input, target) in targets.inputs.iter().zip(&targets.targets) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            input[0], input[1], input[2], input[3], input[4], target
        );
    }
    textio::write_file(path, &out)
}

pub fn load_targets(path: &Path) -> Result<TargetSet> {
    let text = textio::read_file(path)?;
    let lines: Vec<&str> = text.lines().collect();
    let (comments, first_data) = textio::leading_comments(&lines);
    let mut provenance = Provenance {
        regime: String::new(),
        iteration: None,
        policy: String::new(),
    };
    for (key, value) in &comments {
        match key.as_str() {
            "regime" => provenance.regime = value.clone(),
            "policy" => provenance.policy = value.clone(),
            "iteration" => {
                provenance.iteration = Some(textio::parse_field(
                    value,
                    "an iteration index",
                    path,
                    1,
                    1,
                )?);
            }
            _ => {}
        }
    }
    let header_line_no = first_data + 1;
    match lines.get(first_data) {
        Some(&line) if line == TARGETS_HEADER => {}
        Some(other) => {
            return Err(Error::parse(
                path,
                header_line_no,
                1,
                format!("expected target header {TARGETS_HEADER:?}, got {other:?}"),
            ));
        }
        None => {
            return Err(Error::parse(
                path,
                header_line_no,
                1,
                "missing target header",
            ));
        }
    }
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for (off, line) in lines[first_data + 1..].iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let line_no = header_line_no + 1 + off;
        let fields = textio::fields_with_columns(line);
        if fields.len() != 6 {
            return Err(Error::parse(
                path,
                line_no,
                1,
                format!("expected 6 fields, got {}", fields.len()),
            ));
        }
        let mut row = [0.0; 6];
        for (slot, (col, field)) in row.iter_mut().zip(&fields) {
            *slot = textio::parse_field(field, "a number", path, line_no, *col)?;
        }
        inputs.push([row[0], row[1], row[2], row[3], row[4]]);
        targets.push(row[5]);
    }
    Ok(TargetSet {
        inputs,
        targets,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{self, Transition};
    use crate::nn::{B1_OFFSET, B2_OFFSET, INPUT_DIM, W2_OFFSET};

    fn physics() -> PhysicsParams {
        PhysicsParams::default()
    }

    /// Q(s, a) = base + slope * enc(a), built from two always-active hidden
    /// units so the values are exact.
    fn affine_q(base: f64, slope: f64) -> QFunction {
        let mut p = MlpParams::zeros();
        // Unit 0: constant 1 (bias 1, no input weights).
        p.values_mut()[B1_OFFSET] = 1.0;
        // Unit 1: reads the action encoding, bias 2 keeps it active.
        p.values_mut()[INPUT_DIM + 4] = 1.0;
        p.values_mut()[B1_OFFSET + 1] = 2.0;
        // out = w0 * 1 + w1 * (2 + enc) = (w0 + 2 w1) + w1 * enc
        p.values_mut()[W2_OFFSET + 1] = slope;
        p.values_mut()[W2_OFFSET] = base - 2.0 * slope;
        QFunction::new(p)
    }

    struct ConstantStepper {
        reward: f64,
    }

    impl Stepper for ConstantStepper {
        fn step(&self, s: State, _a: Action) -> StepResult {
            StepResult {
                next_state: s,
                reward: self.reward,
                terminal: false,
            }
        }
    }

    struct TerminalStepper;

    impl Stepper for TerminalStepper {
        fn step(&self, s: State, _a: Action) -> StepResult {
            StepResult {
                next_state: s,
                reward: 0.25,
                terminal: true,
            }
        }
    }

    #[test]
    fn learned_dynamics_applies_the_real_termination_rule() {
        // A model that drifts the cart a fixed amount per step: the rollout
        // must terminate on the same bounds as the real environment, with
        // the analytic reward of the predicted successor.
        let p = physics();
        let mut nets: [MlpParams; 4] = std::array::from_fn(|_| MlpParams::zeros());
        nets[0].values_mut()[B2_OFFSET] = 0.5; // predicted x delta
        let stepper = LearnedDynamics {
            model: crate::dynamics_model::DynamicsModel {
                nets,
                norm: crate::dynamics_model::Normalization {
                    mean: [0.0; 5],
                    std: [1.0; 5],
                },
            },
            physics: p,
        };
        let inside = stepper.step(State::new(1.5, 0.0, 0.0, 0.0), Action::Left);
        assert_eq!(inside.next_state.x, 2.0);
        assert!(!inside.terminal);
        assert_eq!(inside.reward.to_bits(), p.reward(inside.next_state).to_bits());

        let outside = stepper.step(inside.next_state, Action::Left);
        assert_eq!(outside.next_state.x, 2.5);
        assert!(outside.terminal);
        assert!(outside.reward < p.reward(inside.next_state));

        // Five drift steps leave the bound behind, so a rollout from the
        // center runs exactly 5 steps.
        let cfg = RolloutConfig {
            horizon: 50,
            gamma: 0.5,
        };
        let v = rollout_return(
            State::ZERO,
            Action::Left,
            &Policy::PushLeft,
            &stepper,
            &cfg,
            &mut rng::stream(0),
        );
        let manual: f64 = (1..=5)
            .map(|k| 0.5f64.powi(k as i32 - 1) * p.reward(State::new(0.5 * k as f64, 0.0, 0.0, 0.0)))
            .sum();
        assert!((v - manual).abs() < 1e-12);
    }

    #[test]
    fn q_input_encodes_the_action_in_the_last_coordinate() {
        assert_eq!(
            q_input(State::ZERO, Action::Left),
            [0.0, 0.0, 0.0, 0.0, -1.0]
        );
        assert_eq!(
            q_input(State::new(1.0, 2.0, 3.0, 4.0), Action::Right),
            [1.0, 2.0, 3.0, 4.0, 1.0]
        );
        let s = State::new(0.3, -0.1, 0.05, 1.2);
        let left = q_input(s, Action::Left);
        let right = q_input(s, Action::Right);
        let diffs = left.iter().zip(&right).filter(|(a, b)| a != b).count();
        assert_eq!(diffs, 1);
    }

    #[test]
    fn affine_q_has_the_intended_values() {
        let q = affine_q(2.5, -0.5);
        let s = State::new(0.9, -0.4, 0.1, 0.0);
        assert!((q.value(s, Action::Left) - 3.0).abs() < 1e-12);
        assert!((q.value(s, Action::Right) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_breaks_exact_ties_toward_left() {
        let q = QFunction::new(MlpParams::zeros());
        for s in [State::ZERO, State::new(1.0, -2.0, 0.1, 3.0)] {
            assert_eq!(q.greedy_action(s), Action::Left);
        }
    }

    #[test]
    fn greedy_follows_a_positive_action_weight() {
        // slope > 0 makes Right strictly better everywhere.
        let q = affine_q(0.0, 0.7);
        let mut rng = rng::stream(1);
        for _ in 0..100 {
            let s = crate::cartpole::reset(&mut rng);
            assert_eq!(q.greedy_action(s), Action::Right);
        }
    }

    #[test]
    fn greedy_is_invariant_under_output_bias_shifts() {
        let mut rng = rng::stream(2);
        let q = QFunction::new(MlpParams::init(&mut rng));
        let mut shifted_params = q.params.clone();
        shifted_params.values_mut()[B2_OFFSET] += 17.25;
        let shifted = QFunction::new(shifted_params);
        for _ in 0..200 {
            let s = crate::cartpole::reset(&mut rng);
            assert_eq!(q.greedy_action(s), shifted.greedy_action(s));
        }
    }

    #[test]
    fn fixed_policies_follow_their_rules() {
        let mut rng = rng::stream(3);
        for _ in 0..20 {
            let s = crate::cartpole::reset(&mut rng);
            assert_eq!(Policy::PushLeft.action(s, &mut rng), Action::Left);
        }
        let tilted = |theta| State::new(0.0, 0.0, theta, 0.0);
        assert_eq!(
            Policy::AntiAngle.action(tilted(0.1), &mut rng),
            Action::Right
        );
        assert_eq!(
            Policy::AntiAngle.action(tilted(-0.1), &mut rng),
            Action::Left
        );
        assert_eq!(
            Policy::AntiAngle.action(tilted(0.0), &mut rng),
            Action::Left
        );
    }

    #[test]
    fn epsilon_zero_matches_greedy() {
        let q = QFunction::new(MlpParams::init(&mut rng::stream(4)));
        let eps = Policy::epsilon_greedy(q.clone(), 0.0).unwrap();
        let greedy = Policy::Greedy(q);
        let mut state_rng = rng::stream(5);
        let mut action_rng = rng::stream(6);
        for _ in 0..1000 {
            let s = crate::cartpole::reset(&mut state_rng);
            assert_eq!(
                eps.action(s, &mut action_rng),
                greedy.action(s, &mut action_rng)
            );
        }
    }

    #[test]
    fn epsilon_must_be_a_probability() {
        let q = QFunction::new(MlpParams::zeros());
        assert!(Policy::epsilon_greedy(q.clone(), 1.5).is_err());
        assert!(Policy::epsilon_greedy(q, -0.1).is_err());
    }

    #[test]
    fn truncation_bound_of_the_default_config() {
        let bound = RolloutConfig::default().truncation_bound();
        assert!((bound - 4.317124741065786e-3).abs() < 1e-12);
        assert!(bound < 0.005);
    }

    #[test]
    fn nfq_target_uses_the_max_over_next_actions() {
        // Q(s, Left) = 2, Q(s, Right) = 1 everywhere.
        let q = affine_q(1.5, -0.5);
        let p = physics();
        let s = State::ZERO;
        let next = State::new(0.1, 0.0, 0.0, 0.0);
        let data = Dataset {
            transitions: vec![Transition {
                state: s,
                action: Action::Right,
                next_state: next,
                reward: 0.5,
                terminal: false,
            }],
            generation_seed: 0,
            physics: p,
        };
        let t = nfq_targets(&q, &data, 0.99);
        assert!((t.targets[0] - 2.48).abs() < 1e-12);
    }

    #[test]
    fn nfq_terminal_target_is_the_reward_alone() {
        let q = affine_q(4.0, 1.0);
        let data = Dataset {
            transitions: vec![Transition {
                state: State::ZERO,
                action: Action::Left,
                next_state: State::new(3.0, 0.0, 0.0, 0.0),
                reward: 0.3,
                terminal: true,
            }],
            generation_seed: 0,
            physics: physics(),
        };
        let t = nfq_targets(&q, &data, 0.99);
        assert_eq!(t.targets[0], 0.3);
    }

    #[test]
    fn nfq_with_zero_q_reproduces_rewards() {
        let data = dataset::generate(200, &physics(), 11).unwrap();
        let q = QFunction::new(MlpParams::zeros());
        let t = nfq_targets(&q, &data, 0.99);
        for (target, tr) in t.targets.iter().zip(&data.transitions) {
            if tr.terminal {
                assert_eq!(*target, tr.reward);
            } else {
                assert!((target - tr.reward).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_reward_rollout_matches_the_geometric_series() {
        let cfg = RolloutConfig::default();
        let v = rollout_return(
            State::ZERO,
            Action::Left,
            &Policy::PushLeft,
            &ConstantStepper { reward: 1.0 },
            &cfg,
            &mut rng::stream(0),
        );
        let closed_form = (1.0 - 0.99f64.powi(1000)) / 0.01;
        assert!((v - closed_form).abs() < 1e-9);
        // Frozen from a 30-digit evaluation of (1 - 0.99^1000) / 0.01.
        assert!((v - 99.99568287525893).abs() < 1e-9);
    }

    #[test]
    fn horizon_one_rollout_is_the_first_reward() {
        let cfg = RolloutConfig {
            horizon: 1,
            gamma: 0.99,
        };
        let v = rollout_return(
            State::ZERO,
            Action::Right,
            &Policy::PushLeft,
            &ConstantStepper { reward: 0.7 },
            &cfg,
            &mut rng::stream(0),
        );
        assert_eq!(v, 0.7);
    }

    #[test]
    fn rollout_stops_at_the_terminal_step_and_keeps_its_reward() {
        let v = rollout_return(
            State::ZERO,
            Action::Left,
            &Policy::PushLeft,
            &TerminalStepper,
            &RolloutConfig::default(),
            &mut rng::stream(0),
        );
        assert_eq!(v, 0.25);
    }

    #[test]
    fn rollout_prefix_property_on_real_dynamics() {
        // As long as no termination occurs, the K-step return equals the
        // (K-1)-step return plus the discounted K-th reward.
        let p = physics();
        let stepper = RealDynamics(p);
        let policy = Policy::AntiAngle;
        let start = State::new(0.01, 0.0, 0.02, 0.0);
        for k in 2..40usize {
            let full = RolloutConfig {
                horizon: k,
                gamma: 0.99,
            };
            let prefix = RolloutConfig {
                horizon: k - 1,
                gamma: 0.99,
            };
            let mut s = start;
            let mut a = Action::Right;
            let mut last_reward = 0.0;
            let mut terminated = false;
            for _ in 0..k {
                let r = stepper.step(s, a);
                last_reward = r.reward;
                if r.terminal {
                    terminated = true;
                    break;
                }
                s = r.next_state;
                a = policy.action(s, &mut rng::stream(0));
            }
            if terminated {
                break;
            }
            let v_full = rollout_return(
                start,
                Action::Right,
                &policy,
                &stepper,
                &full,
                &mut rng::stream(0),
            );
            let v_prefix = rollout_return(
                start,
                Action::Right,
                &policy,
                &stepper,
                &prefix,
                &mut rng::stream(0),
            );
            let expected = v_prefix + 0.99f64.powi((k - 1) as i32) * last_reward;
            assert!((v_full - expected).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn bsf_targets_compose_reward_and_rollout() {
        let p = physics();
        let data = Dataset {
            transitions: vec![
                Transition {
                    state: State::ZERO,
                    action: Action::Left,
                    next_state: State::new(0.1, 0.0, 0.0, 0.0),
                    reward: 0.4,
                    terminal: false,
                },
                Transition {
                    state: State::ZERO,
                    action: Action::Right,
                    next_state: State::new(3.0, 0.0, 0.0, 0.0),
                    reward: 0.7,
                    terminal: true,
                },
            ],
            generation_seed: 0,
            physics: p,
        };
        let t = bsf_targets(
            &Policy::PushLeft,
            &data,
            &ConstantStepper { reward: 1.0 },
            &RolloutConfig::default(),
            0,
        )
        .unwrap();
        let series = (1.0 - 0.99f64.powi(1000)) / 0.01;
        assert!((t.targets[0] - (0.4 + 0.99 * series)).abs() < 1e-9);
        assert!((t.targets[0] - (0.4 + 0.99 * 99.99568287525893)).abs() < 1e-9);
        assert_eq!(t.targets[1], 0.7);
    }

    #[test]
    fn bsf_targets_with_real_dynamics_are_deterministic() {
        let p = physics();
        let data = dataset::generate(300, &p, 12).unwrap();
        let policy = Policy::Greedy(QFunction::new(MlpParams::init(&mut rng::stream(13))));
        let cfg = RolloutConfig {
            horizon: 200,
            gamma: 0.99,
        };
        let a = bsf_targets(&policy, &data, &RealDynamics(p), &cfg, 5).unwrap();
        let b = bsf_targets(&policy, &data, &RealDynamics(p), &cfg, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bsf_targets_with_real_dynamics_stay_bounded() {
        let p = physics();
        let data = dataset::generate(500, &p, 14).unwrap();
        let t = bsf_targets(
            &Policy::AntiAngle,
            &data,
            &RealDynamics(p),
            &RolloutConfig::default(),
            7,
        )
        .unwrap();
        for &v in &t.targets {
            assert!((-1.0..=101.0).contains(&v), "target {v} out of range");
        }
    }

    #[test]
    fn terminal_targets_agree_across_regimes() {
        let p = physics();
        let mut data = dataset::generate(400, &p, 15).unwrap();
        data.transitions.retain(|t| t.terminal);
        assert!(!data.transitions.is_empty());
        let q = QFunction::new(MlpParams::init(&mut rng::stream(16)));
        let nfq = nfq_targets(&q, &data, 0.99);
        let bsf = bsf_targets(
            &Policy::Greedy(q),
            &data,
            &RealDynamics(p),
            &RolloutConfig::default(),
            3,
        )
        .unwrap();
        assert_eq!(nfq.targets, bsf.targets);
        for (t, tr) in nfq.targets.iter().zip(&data.transitions) {
            assert_eq!(*t, tr.reward);
        }
    }

    #[test]
    fn fit_q_learns_a_constant_target() {
        let mut rng_in = rng::stream(20);
        let inputs: Vec<[f64; 5]> = (0..400)
            .map(|_| std::array::from_fn(|_| rng_in.random_range(-1.0..1.0)))
            .collect();
        let c = 3.7;
        let t = TargetSet {
            inputs: inputs.clone(),
            targets: vec![c; inputs.len()],
            provenance: Provenance {
                regime: "test".into(),
                iteration: None,
                policy: "none".into(),
            },
        };
        let cfg = TrainConfig {
            seed: 21,
            max_epochs: 300,
            ..TrainConfig::default()
        };
        let q = fit_q(&t, &cfg).unwrap();
        let mut held_out = rng::stream(22);
        for _ in 0..50 {
            let x: [f64; 5] = std::array::from_fn(|_| held_out.random_range(-1.0..1.0));
            let y = q.params.forward(&x);
            assert!((y - c).abs() < c.abs() * 1e-2 + 1e-3, "got {y}, want {c}");
        }
    }

    #[test]
    fn fit_q_is_deterministic_per_seed() {
        let data = dataset::generate(200, &physics(), 23).unwrap();
        let q0 = QFunction::new(MlpParams::zeros());
        let t = nfq_targets(&q0, &data, 0.99);
        let cfg = TrainConfig {
            seed: 24,
            max_epochs: 60,
            ..TrainConfig::default()
        };
        assert_eq!(fit_q(&t, &cfg).unwrap(), fit_q(&t, &cfg).unwrap());
    }

    #[test]
    fn fit_q_rejects_tiny_target_sets() {
        let t = TargetSet {
            inputs: vec![[0.0; 5]; 5],
            targets: vec![0.0; 5],
            provenance: Provenance {
                regime: "test".into(),
                iteration: None,
                policy: "none".into(),
            },
        };
        assert!(matches!(
            fit_q(&t, &TrainConfig::default()),
            Err(Error::TooSmall { .. })
        ));
    }

    #[test]
    fn single_iteration_run_records_one_entry() {
        let data = dataset::generate(300, &physics(), 25).unwrap();
        let cfg = RunConfig {
            variant: Variant::Nfq,
            iterations: 1,
            train: TrainConfig {
                max_epochs: 30,
                ..TrainConfig::default()
            },
            eval_episodes: 20,
            eval_max_steps: 100,
            master_seed: 26,
            ..RunConfig::default()
        };
        let history = run_iterations(&cfg, &data).unwrap();
        assert_eq!(history.records.len(), 1);
        assert_eq!(history.records[0].targets.len(), data.len());
        assert_eq!(history.records[0].targets.provenance.iteration, Some(0));
    }

    #[test]
    fn targets_round_trip_through_the_file_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("targets.csv");
        let p = physics();
        let data = dataset::generate(150, &p, 27).unwrap();
        let mut t = bsf_targets(
            &Policy::AntiAngle,
            &data,
            &RealDynamics(p),
            &RolloutConfig {
                horizon: 50,
                gamma: 0.99,
            },
            1,
        )
        .unwrap();
        t.provenance.iteration = Some(4);
        save_targets(&t, &path).unwrap();
        let loaded = load_targets(&path).unwrap();
        assert_eq!(loaded.provenance, t.provenance);
        assert_eq!(loaded.len(), t.len());
        for (a, b) in t.targets.iter().zip(&loaded.targets) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in t.inputs.iter().zip(&loaded.inputs) {
            assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
        }
    }
}
