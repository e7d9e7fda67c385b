//! Offline dataset generation with a uniform random behavior policy,
//! train/validation splitting, and CSV persistence.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand::seq::SliceRandom;

use crate::cartpole::{self, Action, PhysicsParams, State};
use crate::error::{Error, Result};
use crate::rng;
use crate::textio;

/// Steps after which an episode is cut and the state reset without marking
/// the last transition terminal.
pub const EPISODE_CAP: usize = 500;

pub const DATASET_HEADER: &str =
    "x,x_dot,theta,theta_dot,action,next_x,next_x_dot,next_theta,next_theta_dot,reward,terminal";

/// One observed environment interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: State,
    pub action: Action,
    pub next_state: State,
    pub reward: f64,
    pub terminal: bool,
}

/// An ordered batch of transitions plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub transitions: Vec<Transition>,
    pub generation_seed: u64,
    pub physics: PhysicsParams,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }
}

/// Generate exactly `n` transitions with uniformly random actions. Episodes
/// restart from the reset distribution on termination or after
/// [`EPISODE_CAP`] steps.
pub fn generate(n: usize, physics: &PhysicsParams, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::TooSmall {
            what: "dataset size",
            len: 0,
            min: 1,
        });
    }
    let mut rng = rng::stream(seed);
    let mut transitions = Vec::with_capacity(n);
    let mut state = cartpole::reset(&mut rng);
    let mut episode_steps = 0;
    while transitions.len() < n {
        let action = if rng.random_range(0..2u8) == 0 {
            Action::Left
        } else {
            Action::Right
        };
        let step = physics
            .step(state, action)
            .expect("reset and step keep states finite");
        transitions.push(Transition {
            state,
            action,
            next_state: step.next_state,
            reward: step.reward,
            terminal: step.terminal,
        });
        episode_steps += 1;
        if step.terminal || episode_steps >= EPISODE_CAP {
            state = cartpole::reset(&mut rng);
            episode_steps = 0;
        } else {
            state = step.next_state;
        }
    }
    Ok(Dataset {
        transitions,
        generation_seed: seed,
        physics: *physics,
    })
}

/// Partition into train and validation parts along a uniformly shuffled index
/// permutation; |train| = floor(train_fraction * n).
pub fn split<R: Rng + ?Sized>(
    data: &Dataset,
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    if data.len() < 2 {
        return Err(Error::CannotSplit { len: data.len() });
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = data.len();
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(rng);
    let n_train = ((train_fraction * n as f64).floor() as usize).clamp(1, n - 1);
    let pick = |idx: &[usize]| Dataset {
        transitions: idx.iter().map(|&i| data.transitions[i]).collect(),
        generation_seed: data.generation_seed,
        physics: data.physics,
    };
    Ok((pick(&indices[..n_train]), pick(&indices[n_train..])))
}

/// Write the dataset as CSV: `# key=value` metadata comments, one header
/// line, one row per transition. Floats round-trip bit-exactly.
pub fn save(data: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(64 * data.len() + 256);
    textio::push_comment(&mut out, "generation_seed", data.generation_seed);
    let p = &data.physics;
    for (key, value) in [
        ("gravity", p.gravity),
        ("mass_cart", p.mass_cart),
        ("mass_pole", p.mass_pole),
        ("pole_half_length", p.pole_half_length),
        ("force_mag", p.force_mag),
        ("tau", p.tau),
        ("x_bound", p.x_bound),
        ("theta_bound", p.theta_bound),
    ] {
        textio::push_comment(&mut out, key, value);
    }
    out.push_str(DATASET_HEADER);
    out.push('\n');
    for t in &data.transitions {
        let s = t.state;
        let n = t.next_state;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.x,
            s.x_dot,
            s.theta,
            s.theta_dot,
            t.action.index(),
            n.x,
            n.x_dot,
            n.theta,
            n.theta_dot,
            t.reward,
            textio::flag(t.terminal),
        );
    }
    textio::write_file(path, &out)
}

pub fn load(path: &Path) -> Result<Dataset> {
    let text = textio::read_file(path)?;
    let lines: Vec<&str> = text.lines().collect();
    let (comments, first_data) = textio::leading_comments(&lines);

    let mut generation_seed = 0u64;
    let mut physics = PhysicsParams::default();
    for (key, value) in &comments {
        let line = 1 + comments.iter().position(|(k, _)| k == key).unwrap_or(0);
        let slot = match key.as_str() {
            "generation_seed" => {
                generation_seed = textio::parse_field(value, "an integer seed", path, line, 1)?;
                continue;
            }
            "gravity" => &mut physics.gravity,
            "mass_cart" => &mut physics.mass_cart,
            "mass_pole" => &mut physics.mass_pole,
            "pole_half_length" => &mut physics.pole_half_length,
            "force_mag" => &mut physics.force_mag,
            "tau" => &mut physics.tau,
            "x_bound" => &mut physics.x_bound,
            "theta_bound" => &mut physics.theta_bound,
            _ => continue,
        };
        *slot = textio::parse_field(value, "a number", path, line, 1)?;
    }

    let header_line_no = first_data + 1;
    match lines.get(first_data) {
        Some(&line) if line == DATASET_HEADER => {}
        Some(other) => {
            return Err(Error::parse(
                path,
                header_line_no,
                1,
                format!("expected dataset header {DATASET_HEADER:?}, got {other:?}"),
            ));
        }
        None => {
            return Err(Error::parse(
                path,
                header_line_no,
                1,
                "missing dataset header",
            ));
        }
    }

    let mut transitions = Vec::new();
    for (off, line) in lines[first_data + 1..].iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let line_no = header_line_no + 1 + off;
        let fields = textio::fields_with_columns(line);
        if fields.len() != 11 {
            return Err(Error::parse(
                path,
                line_no,
                1,
                format!("expected 11 fields, got {}", fields.len()),
            ));
        }
        let num = |i: usize, what: &str| -> Result<f64> {
            textio::parse_field(fields[i].1, what, path, line_no, fields[i].0)
        };
        let action_index: usize =
            textio::parse_field(fields[4].1, "an action index", path, line_no, fields[4].0)?;
        let action = Action::from_index(action_index).ok_or_else(|| {
            Error::parse(
                path,
                line_no,
                fields[4].0,
                format!("action index must be 0 or 1, got {action_index}"),
            )
        })?;
        transitions.push(Transition {
            state: State::new(
                num(0, "cart position")?,
                num(1, "cart velocity")?,
                num(2, "pole angle")?,
                num(3, "pole angular velocity")?,
            ),
            action,
            next_state: State::new(
                num(5, "next cart position")?,
                num(6, "next cart velocity")?,
                num(7, "next pole angle")?,
                num(8, "next pole angular velocity")?,
            ),
            reward: num(9, "reward")?,
            terminal: textio::parse_flag(fields[10].1, "terminal", path, line_no, fields[10].0)?,
        });
    }
    Ok(Dataset {
        transitions,
        generation_seed,
        physics,
    })
}
