//! The `qlab` command line: dataset generation, iteration runs, policy
//! evaluation, seed studies, value slices, and plotting. Every command
//! records its full configuration, seeds, and input hashes in a manifest
//! next to its outputs.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cartpole::PhysicsParams;
use crate::dataset;
use crate::dynamics_model;
use crate::error::{Error, Result};
use crate::experiments::{self, EvalConfig, emit, plot};
use crate::nn::{self, TrainConfig};
use crate::q_iteration::{
    LearnedDynamics, Policy, QFunction, RealDynamics, RolloutConfig, RunConfig, Stepper, Variant,
    run_iterations,
};

#[derive(Parser)]
#[command(
    name = "qlab",
    version,
    about = "Offline Q-learning laboratory on the cart-pole balancing task"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an offline dataset with a uniform random behavior policy.
    GenerateData(GenerateDataCmd),
    /// Run fitted Q iterations under one of the three target regimes.
    Run(RunCmd),
    /// Evaluate a policy on the real dynamics.
    Evaluate(EvaluateCmd),
    /// Refit a saved target set across many seeds and compare the policies.
    SeedStudy(SeedStudyCmd),
    /// Sweep the pole angle and record rollout values with jump metrics.
    Slice(SliceCmd),
    /// Render a CSV result file as an SVG figure.
    Plot(PlotCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Nfq,
    Bsf,
    BsfReal,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Nfq => Variant::Nfq,
            VariantArg::Bsf => Variant::BsfLearned,
            VariantArg::BsfReal => Variant::BsfReal,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Greedy,
    EpsGreedy,
    PushLeft,
    AntiAngle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StepperArg {
    Real,
    Model,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotKind {
    Slice,
    SeedStudy,
    History,
}

#[derive(Args)]
struct TrainArgs {
    /// Adam learning rate.
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 100)]
    batch_size: usize,
    /// Epochs without validation improvement before training halts.
    #[arg(long, default_value_t = 50)]
    patience: usize,
    #[arg(long, default_value_t = 2000)]
    max_epochs: usize,
}

impl TrainArgs {
    fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            batch_size: self.batch_size,
            patience: self.patience,
            max_epochs: self.max_epochs,
            seed,
        }
    }

    fn manifest(&self, entries: &mut Vec<(String, String)>) {
        push(entries, "lr", self.lr);
        push(entries, "batch_size", self.batch_size);
        push(entries, "patience", self.patience);
        push(entries, "max_epochs", self.max_epochs);
    }
}

#[derive(Args)]
struct GenerateDataCmd {
    /// Number of transitions.
    #[arg(long, default_value_t = 20_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunCmd {
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, default_value_t = 30)]
    iters: usize,
    /// Master seed; all per-iteration seeds derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset CSV produced by generate-data.
    #[arg(long)]
    data: PathBuf,
    /// Output directory (history.csv plus one directory per iteration).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    horizon: usize,
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    #[arg(long, default_value_t = 1000)]
    eval_episodes: usize,
    #[arg(long, default_value_t = 5000)]
    eval_steps: usize,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Args)]
struct EvaluateCmd {
    #[arg(long, value_enum)]
    policy: PolicyArg,
    /// Q parameters file (required for greedy / eps-greedy).
    #[arg(long)]
    q: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    episodes: usize,
    #[arg(long, default_value_t = 5000)]
    max_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report output path (key=value text).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SeedStudyCmd {
    /// Saved target set CSV.
    #[arg(long)]
    targets: PathBuf,
    /// Number of retraining seeds (base_seed, base_seed+1, ...).
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    #[arg(long, default_value_t = 1000)]
    eval_episodes: usize,
    #[arg(long, default_value_t = 5000)]
    eval_steps: usize,
    #[arg(long, default_value_t = 0)]
    eval_seed: u64,
    #[command(flatten)]
    train: TrainArgs,
    /// Output directory (study.csv, summary.txt).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SliceCmd {
    #[arg(long, value_enum)]
    policy: PolicyArg,
    /// Q parameters file (required for greedy / eps-greedy).
    #[arg(long)]
    q: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Grid points across the pole-angle interval.
    #[arg(long, default_value_t = 10_000)]
    points: usize,
    #[arg(long, value_enum, default_value_t = StepperArg::Real)]
    stepper: StepperArg,
    /// Learned model file (required with --stepper model).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    horizon: usize,
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also sweep a grid this many times finer and record the jump ratio.
    #[arg(long)]
    refine: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotCmd {
    #[arg(long, value_enum)]
    kind: PlotKind,
    /// Input CSV (a slice, seed-study, or history file).
    #[arg(long)]
    input: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
}

fn push(entries: &mut Vec<(String, String)>, key: &str, value: impl std::fmt::Display) {
    entries.push((key.to_string(), value.to_string()));
}

/// Manifest path for a file output: `<stem>.manifest.txt` next to it.
fn manifest_sibling(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.manifest.txt"))
}

fn policy_arg_name(p: PolicyArg) -> &'static str {
    match p {
        PolicyArg::Greedy => "greedy",
        PolicyArg::EpsGreedy => "eps-greedy",
        PolicyArg::PushLeft => "push-left",
        PolicyArg::AntiAngle => "anti-angle",
    }
}

/// Build a policy from CLI arguments, loading Q parameters when needed.
fn build_policy(
    kind: PolicyArg,
    q_path: Option<&Path>,
    epsilon: f64,
    entries: &mut Vec<(String, String)>,
) -> Result<Policy> {
    push(entries, "policy", policy_arg_name(kind));
    match kind {
        PolicyArg::PushLeft => Ok(Policy::PushLeft),
        PolicyArg::AntiAngle => Ok(Policy::AntiAngle),
        PolicyArg::Greedy | PolicyArg::EpsGreedy => {
            let path = q_path.ok_or_else(|| {
                Error::InvalidConfig("--q <params file> is required for this policy".into())
            })?;
            let q = QFunction::new(nn::load_params(path)?);
            push(entries, "q", path.display());
            push(entries, "q_sha256", emit::file_sha256(path)?);
            if kind == PolicyArg::EpsGreedy {
                push(entries, "epsilon", epsilon);
                Policy::epsilon_greedy(q, epsilon)
            } else {
                Ok(Policy::Greedy(q))
            }
        }
    }
}

pub fn main() -> Result<()> {
    run(Cli::parse())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateData(cmd) => generate_data(cmd),
        Command::Run(cmd) => run_pipeline(cmd),
        Command::Evaluate(cmd) => evaluate(cmd),
        Command::SeedStudy(cmd) => seed_study(cmd),
        Command::Slice(cmd) => slice(cmd),
        Command::Plot(cmd) => plot_file(cmd),
    }
}

fn generate_data(cmd: GenerateDataCmd) -> Result<()> {
    let physics = PhysicsParams::default();
    let data = dataset::generate(cmd.n, &physics, cmd.seed)?;
    dataset::save(&data, &cmd.out)?;
    let mut entries = Vec::new();
    push(&mut entries, "command", "generate-data");
    push(&mut entries, "n", cmd.n);
    push(&mut entries, "seed", cmd.seed);
    push(&mut entries, "out", cmd.out.display());
    push(&mut entries, "dataset_sha256", emit::file_sha256(&cmd.out)?);
    emit::write_manifest(&entries, &manifest_sibling(&cmd.out))?;
    println!(
        "wrote {} transitions to {} (seed {})",
        data.len(),
        cmd.out.display(),
        cmd.seed
    );
    Ok(())
}

fn run_pipeline(cmd: RunCmd) -> Result<()> {
    let data = dataset::load(&cmd.data)?;
    let variant: Variant = cmd.variant.into();
    let cfg = RunConfig {
        variant,
        iterations: cmd.iters,
        rollout: RolloutConfig {
            horizon: cmd.horizon,
            gamma: cmd.gamma,
        },
        train: cmd.train.config(0),
        eval_episodes: cmd.eval_episodes,
        eval_max_steps: cmd.eval_steps,
        master_seed: cmd.seed,
    };
    let history = run_iterations(&cfg, &data)?;
    for record in &history.records {
        println!(
            "iteration {:3}: avg_return {:10.3} success_rate {:.3}{}",
            record.iteration,
            record.eval.avg_return,
            record.eval.success_rate,
            if record.eval.successful {
                "  [successful]"
            } else {
                ""
            }
        );
    }
    emit::save_history(&history, &cmd.out)?;

    let mut entries = Vec::new();
    push(&mut entries, "command", "run");
    push(&mut entries, "variant", variant);
    push(&mut entries, "iters", cmd.iters);
    push(&mut entries, "seed", cmd.seed);
    push(&mut entries, "data", cmd.data.display());
    push(
        &mut entries,
        "dataset_sha256",
        emit::file_sha256(&cmd.data)?,
    );
    push(&mut entries, "out", cmd.out.display());
    push(&mut entries, "horizon", cmd.horizon);
    push(&mut entries, "gamma", cmd.gamma);
    push(&mut entries, "eval_episodes", cmd.eval_episodes);
    push(&mut entries, "eval_steps", cmd.eval_steps);
    cmd.train.manifest(&mut entries);
    emit::write_manifest(&entries, &cmd.out.join("manifest.txt"))?;
    Ok(())
}

fn evaluate(cmd: EvaluateCmd) -> Result<()> {
    let physics = PhysicsParams::default();
    let mut entries = Vec::new();
    push(&mut entries, "command", "evaluate");
    let policy = build_policy(cmd.policy, cmd.q.as_deref(), cmd.epsilon, &mut entries)?;
    let report =
        experiments::evaluate_policy(&policy, &physics, cmd.episodes, cmd.max_steps, cmd.seed)?;
    emit::write_eval_report(&report, &cmd.out)?;
    push(&mut entries, "episodes", cmd.episodes);
    push(&mut entries, "max_steps", cmd.max_steps);
    push(&mut entries, "seed", cmd.seed);
    push(&mut entries, "out", cmd.out.display());
    emit::write_manifest(&entries, &manifest_sibling(&cmd.out))?;
    println!(
        "avg_return {:.3}, success_rate {:.3}, successful {}",
        report.avg_return, report.success_rate, report.successful
    );
    Ok(())
}

fn seed_study(cmd: SeedStudyCmd) -> Result<()> {
    let targets = crate::q_iteration::load_targets(&cmd.targets)?;
    let physics = PhysicsParams::default();
    let seeds: Vec<u64> = (0..cmd.seeds as u64).map(|i| cmd.base_seed + i).collect();
    let eval = EvalConfig {
        n_episodes: cmd.eval_episodes,
        max_steps: cmd.eval_steps,
        seed: cmd.eval_seed,
    };
    let study =
        experiments::seed_variance_study(&targets, &seeds, &cmd.train.config(0), &eval, &physics)?;
    std::fs::create_dir_all(&cmd.out).map_err(|e| Error::io(&cmd.out, e))?;
    emit::emit_eval_csv(&study, &cmd.out.join("study.csv"))?;
    let s = &study.summary;
    let summary_text = format!(
        "n_seeds={}\nmin={}\nq1={}\nmedian={}\nq3={}\nmax={}\nspread={}\n",
        study.seeds.len(),
        s.min,
        s.q1,
        s.median,
        s.q3,
        s.max,
        s.spread()
    );
    std::fs::write(cmd.out.join("summary.txt"), summary_text)
        .map_err(|e| Error::io(cmd.out.join("summary.txt"), e))?;

    let mut entries = Vec::new();
    push(&mut entries, "command", "seed-study");
    push(&mut entries, "targets", cmd.targets.display());
    push(
        &mut entries,
        "targets_sha256",
        emit::file_sha256(&cmd.targets)?,
    );
    push(&mut entries, "seeds", cmd.seeds);
    push(&mut entries, "base_seed", cmd.base_seed);
    push(&mut entries, "eval_episodes", cmd.eval_episodes);
    push(&mut entries, "eval_steps", cmd.eval_steps);
    push(&mut entries, "eval_seed", cmd.eval_seed);
    push(&mut entries, "out", cmd.out.display());
    cmd.train.manifest(&mut entries);
    emit::write_manifest(&entries, &cmd.out.join("manifest.txt"))?;
    println!(
        "retrained {} seeds: min {:.3}, median {:.3}, max {:.3}",
        study.seeds.len(),
        s.min,
        s.median,
        s.max
    );
    Ok(())
}

fn slice(cmd: SliceCmd) -> Result<()> {
    let physics = PhysicsParams::default();
    let mut entries = Vec::new();
    push(&mut entries, "command", "slice");
    let policy = build_policy(cmd.policy, cmd.q.as_deref(), cmd.epsilon, &mut entries)?;
    let rollout = RolloutConfig {
        horizon: cmd.horizon,
        gamma: cmd.gamma,
    };
    let spec = experiments::SliceSpec::for_physics(&physics, cmd.points)?;

    let stepper: Box<dyn Stepper> = match cmd.stepper {
        StepperArg::Real => {
            push(&mut entries, "stepper", "real");
            Box::new(RealDynamics(physics))
        }
        StepperArg::Model => {
            let path = cmd.model.as_deref().ok_or_else(|| {
                Error::InvalidConfig("--model <file> is required with --stepper model".into())
            })?;
            push(&mut entries, "stepper", "model");
            push(&mut entries, "model", path.display());
            push(&mut entries, "model_sha256", emit::file_sha256(path)?);
            Box::new(LearnedDynamics {
                model: dynamics_model::load_model(path)?,
                physics,
            })
        }
    };

    let mut result = experiments::q_slice(&policy, &spec, stepper.as_ref(), &rollout, cmd.seed)?;
    if let Some(factor) = cmd.refine {
        let refined = experiments::q_slice(
            &policy,
            &spec.refined(factor)?,
            stepper.as_ref(),
            &rollout,
            cmd.seed,
        )?;
        result.metrics = experiments::discontinuity_metrics(&result.values, Some(&refined.values));
        let refined_path = refined_sibling(&cmd.out);
        emit::emit_slice_csv(&refined, &refined_path)?;
        push(&mut entries, "refine", factor);
        push(&mut entries, "refined_out", refined_path.display());
    }
    emit::emit_slice_csv(&result, &cmd.out)?;

    push(&mut entries, "points", cmd.points);
    push(&mut entries, "horizon", cmd.horizon);
    push(&mut entries, "gamma", cmd.gamma);
    push(&mut entries, "seed", cmd.seed);
    push(&mut entries, "out", cmd.out.display());
    emit::write_manifest(&entries, &manifest_sibling(&cmd.out))?;
    match result.metrics.refinement_ratio {
        Some(ratio) => println!(
            "max_adjacent_jump {:.6}, refinement_ratio {:.3}",
            result.metrics.max_adjacent_jump, ratio
        ),
        None => println!("max_adjacent_jump {:.6}", result.metrics.max_adjacent_jump),
    }
    Ok(())
}

fn refined_sibling(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "slice".into());
    let ext = out.extension().map(|e| e.to_string_lossy().into_owned());
    match ext {
        Some(ext) => out.with_file_name(format!("{stem}_refined.{ext}")),
        None => out.with_file_name(format!("{stem}_refined")),
    }
}

fn plot_file(cmd: PlotCmd) -> Result<()> {
    match cmd.kind {
        PlotKind::Slice => {
            let result = emit::read_slice_csv(&cmd.input)?;
            plot::plot_slice(&result, &cmd.out)?;
        }
        PlotKind::SeedStudy => {
            let rows = emit::read_eval_csv(&cmd.input)?;
            if rows.is_empty() {
                return Err(Error::EmptyPlot("seed study csv has no rows".into()));
            }
            let returns: Vec<f64> = rows.iter().map(|(_, r)| r.avg_return).collect();
            let study = experiments::SeedStudy {
                seeds: rows.iter().map(|(s, _)| *s).collect(),
                reports: rows.into_iter().map(|(_, r)| r).collect(),
                summary: experiments::SpreadSummary::from_values(&returns),
            };
            plot::plot_seed_study(&study, &cmd.out)?;
        }
        PlotKind::History => {
            let rows = emit::read_history_csv(&cmd.input)?;
            plot::plot_history(&rows, &cmd.out)?;
        }
    }
    let mut entries = Vec::new();
    push(&mut entries, "command", "plot");
    push(
        &mut entries,
        "kind",
        match cmd.kind {
            PlotKind::Slice => "slice",
            PlotKind::SeedStudy => "seed-study",
            PlotKind::History => "history",
        },
    );
    push(&mut entries, "input", cmd.input.display());
    push(&mut entries, "input_sha256", emit::file_sha256(&cmd.input)?);
    push(&mut entries, "out", cmd.out.display());
    emit::write_manifest(&entries, &manifest_sibling(&cmd.out))?;
    println!("wrote {}", cmd.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses_the_documented_commands() {
        Cli::try_parse_from([
            "qlab",
            "generate-data",
            "--n",
            "100",
            "--seed",
            "1",
            "--out",
            "d.csv",
        ])
        .unwrap();
        Cli::try_parse_from([
            "qlab",
            "run",
            "--variant",
            "bsf-real",
            "--iters",
            "2",
            "--seed",
            "7",
            "--data",
            "d.csv",
            "--out",
            "outdir",
        ])
        .unwrap();
        Cli::try_parse_from([
            "qlab",
            "slice",
            "--policy",
            "push-left",
            "--points",
            "10000",
            "--out",
            "s.csv",
        ])
        .unwrap();
        assert!(Cli::try_parse_from(["qlab", "frobnicate"]).is_err());
        assert!(Cli::try_parse_from(["qlab", "run", "--no-such-flag"]).is_err());
    }

    #[test]
    fn manifest_sibling_replaces_the_extension() {
        assert_eq!(
            manifest_sibling(Path::new("results/d.csv")),
            Path::new("results/d.manifest.txt")
        );
        assert_eq!(
            refined_sibling(Path::new("results/s.csv")),
            Path::new("results/s_refined.csv")
        );
    }
}
