//! Learned one-step transition model: four independent 5-64-1 regressors,
//! one per state component, trained on normalized (state, action) inputs to
//! predict the state delta.

use std::fmt::Write as _;
use std::path::Path;

use crate::cartpole::{Action, State};
use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::nn::{self, MlpParams, RegressionSet, TrainConfig};
use crate::q_iteration::q_input;
use crate::rng::{self, tag};
use crate::textio;

pub const MIN_TRAIN_SIZE: usize = 100;
/// Floor on the per-dimension standard deviation used for normalization.
pub const STD_FLOOR: f64 = 1e-8;

/// Per-dimension input statistics, fitted on the training split and applied
/// identically at prediction time.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub mean: [f64; nn::INPUT_DIM],
    pub std: [f64; nn::INPUT_DIM],
}

impl Normalization {
    pub fn fit(inputs: &[[f64; nn::INPUT_DIM]]) -> Normalization {
        let n = inputs.len().max(1) as f64;
        let mut mean = [0.0; nn::INPUT_DIM];
        for x in inputs {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = [0.0; nn::INPUT_DIM];
        for x in inputs {
            for ((v, m), xi) in var.iter_mut().zip(&mean).zip(x) {
                let d = xi - m;
                *v += d * d;
            }
        }
        let mut std = [0.0; nn::INPUT_DIM];
        for (s, v) in std.iter_mut().zip(&var) {
            *s = (v / n).sqrt().max(STD_FLOOR);
        }
        Normalization { mean, std }
    }

    pub fn apply(&self, x: &[f64; nn::INPUT_DIM]) -> [f64; nn::INPUT_DIM] {
        std::array::from_fn(|i| (x[i] - self.mean[i]) / self.std[i])
    }
}

/// One regressor per state component predicting next - current.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsModel {
    pub nets: [MlpParams; 4],
    pub norm: Normalization,
}

impl DynamicsModel {
    /// Predicted successor state: the current state plus the four predicted
    /// deltas. Pure and deterministic.
    pub fn predict(&self, s: State, a: Action) -> State {
        let x = self.norm.apply(&q_input(s, a));
        let current = s.to_array();
        State::from_array(std::array::from_fn(|c| {
            current[c] + self.nets[c].forward(&x)
        }))
    }
}

/// Train the model on an offline dataset: a 70/30 split, then one early-
/// stopped regression per state component. All seeds derive from `cfg.seed`.
pub fn train_model(data: &Dataset, cfg: &TrainConfig) -> Result<DynamicsModel> {
    if data.len() < MIN_TRAIN_SIZE {
        return Err(Error::TooSmall {
            what: "transition-model dataset",
            len: data.len(),
            min: MIN_TRAIN_SIZE,
        });
    }
    let mut split_rng = rng::substream(cfg.seed, tag::SPLIT, 0);
    let (train_part, val_part) = dataset::split(data, 0.7, &mut split_rng)?;

    let raw = |part: &Dataset| -> Vec<[f64; nn::INPUT_DIM]> {
        part.transitions
            .iter()
            .map(|t| q_input(t.state, t.action))
            .collect()
    };
    let train_raw = raw(&train_part);
    let val_raw = raw(&val_part);
    let norm = Normalization::fit(&train_raw);
    let train_inputs: Vec<_> = train_raw.iter().map(|x| norm.apply(x)).collect();
    let val_inputs: Vec<_> = val_raw.iter().map(|x| norm.apply(x)).collect();

    let deltas = |part: &Dataset, component: usize| -> Vec<f64> {
        part.transitions
            .iter()
            .map(|t| t.next_state.to_array()[component] - t.state.to_array()[component])
            .collect()
    };

    let mut nets = Vec::with_capacity(4);
    for component in 0..4 {
        let train_set = RegressionSet::new(train_inputs.clone(), deltas(&train_part, component))?;
        let val_set = RegressionSet::new(val_inputs.clone(), deltas(&val_part, component))?;
        let component_cfg = TrainConfig {
            seed: rng::mix(cfg.seed, tag::MODEL, component as u64 + 1),
            ..*cfg
        };
        let (params, _) = nn::train(&train_set, &val_set, &component_cfg)?;
        nets.push(params);
    }
    Ok(DynamicsModel {
        nets: nets.try_into().expect("four components"),
        norm,
    })
}

/// Write a model as a single flat value file: normalization in comments, then
/// the four parameter blocks in component order.
pub fn save_model(model: &DynamicsModel, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(4 * nn::PARAM_COUNT * 20);
    textio::push_comment(&mut out, "mean", textio::join_floats(&model.norm.mean));
    textio::push_comment(&mut out, "std", textio::join_floats(&model.norm.std));
    textio::push_comment(
        &mut out,
        "layout",
        format!(
            "4 parameter blocks of {} values (x, x_dot, theta, theta_dot deltas)",
            nn::PARAM_COUNT
        ),
    );
    out.push_str("value\n");
    for net in &model.nets {
        for v in net.values() {
            let _ = writeln!(out, "{v}");
        }
    }
    textio::write_file(path, &out)
}

pub fn load_model(path: &Path) -> Result<DynamicsModel> {
    let text = textio::read_file(path)?;
    let lines: Vec<&str> = text.lines().collect();
    let (comments, first_data) = textio::leading_comments(&lines);
    let mut mean = None;
    let mut std = None;
    for (key, value) in &comments {
        match key.as_str() {
            "mean" => {
                mean = Some(textio::parse_float_list(
                    value,
                    nn::INPUT_DIM,
                    "mean",
                    path,
                    1,
                )?)
            }
            "std" => {
                std = Some(textio::parse_float_list(
                    value,
                    nn::INPUT_DIM,
                    "std",
                    path,
                    2,
                )?)
            }
            _ => {}
        }
    }
    let (Some(mean), Some(std)) = (mean, std) else {
        return Err(Error::parse(
            path,
            1,
            1,
            "missing mean/std normalization comments",
        ));
    };
    if lines.get(first_data).copied() != Some("value") {
        return Err(Error::parse(
            path,
            first_data + 1,
            1,
            "expected header line \"value\"",
        ));
    }
    let mut values = Vec::with_capacity(4 * nn::PARAM_COUNT);
    for (off, line) in lines[first_data + 1..].iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        values.push(textio::parse_field(
            line,
            "a number",
            path,
            first_data + 2 + off,
            1,
        )?);
    }
    if values.len() != 4 * nn::PARAM_COUNT {
        return Err(Error::parse(
            path,
            lines.len(),
            1,
            format!(
                "expected {} parameter values, got {}",
                4 * nn::PARAM_COUNT,
                values.len()
            ),
        ));
    }
    let mut nets = Vec::with_capacity(4);
    for chunk in values.chunks(nn::PARAM_COUNT) {
        nets.push(MlpParams::from_values(chunk.to_vec())?);
    }
    Ok(DynamicsModel {
        nets: nets.try_into().expect("four blocks"),
        norm: Normalization {
            mean: mean.try_into().expect("five values"),
            std: std.try_into().expect("five values"),
        },
    })
}
