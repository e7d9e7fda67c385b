//! Deterministic cart-pole physics: transition, reward, termination, reset.
//!
//! A pole balances on a cart that can only be pushed left or right with a
//! fixed force. One step integrates the rigid-body equations with an explicit
//! Euler update (positions advance with pre-step velocities). Everything is
//! f64 and pure, so repeated calls are bit-identical.

use rand::Rng;

use crate::error::{Error, Result};

/// Four-dimensional cart-pole state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    /// Cart position (m).
    pub x: f64,
    /// Cart velocity (m/s).
    pub x_dot: f64,
    /// Pole angle (rad), 0 = upright.
    pub theta: f64,
    /// Pole angular velocity (rad/s).
    pub theta_dot: f64,
}

impl State {
    pub const ZERO: State = State {
        x: 0.0,
        x_dot: 0.0,
        theta: 0.0,
        theta_dot: 0.0,
    };

    pub fn new(x: f64, x_dot: f64, theta: f64, theta_dot: f64) -> State {
        State {
            x,
            x_dot,
            theta,
            theta_dot,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.x_dot.is_finite()
            && self.theta.is_finite()
            && self.theta_dot.is_finite()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.x_dot, self.theta, self.theta_dot]
    }

    pub fn from_array(a: [f64; 4]) -> State {
        State::new(a[0], a[1], a[2], a[3])
    }
}

/// Discrete push direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Left, Action::Right];

    /// Integer encoding: Left = 0, Right = 1.
    pub fn index(self) -> usize {
        match self {
            Action::Left => 0,
            Action::Right => 1,
        }
    }

    pub fn from_index(index: usize) -> Option<Action> {
        match index {
            0 => Some(Action::Left),
            1 => Some(Action::Right),
            _ => None,
        }
    }

    /// Signed regressor-input encoding: Left = -1, Right = +1.
    pub fn encoding(self) -> f64 {
        match self {
            Action::Left => -1.0,
            Action::Right => 1.0,
        }
    }

    pub fn flipped(self) -> Action {
        match self {
            Action::Left => Action::Right,
            Action::Right => Action::Left,
        }
    }
}

/// Physical constants, integration step, and termination bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    pub gravity: f64,
    pub mass_cart: f64,
    pub mass_pole: f64,
    /// Half the pole length (m); the dynamics use the half-length throughout.
    pub pole_half_length: f64,
    pub force_mag: f64,
    /// Integration step (s).
    pub tau: f64,
    /// Cart position termination bound (m); exceeded strictly.
    pub x_bound: f64,
    /// Pole angle termination bound (rad); exceeded strictly.
    pub theta_bound: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams {
            gravity: 9.8,
            mass_cart: 1.0,
            mass_pole: 0.1,
            pole_half_length: 0.5,
            force_mag: 10.0,
            tau: 0.02,
            x_bound: 2.4,
            theta_bound: 0.2095,
        }
    }
}

/// Outcome of one dynamics step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub next_state: State,
    pub reward: f64,
    pub terminal: bool,
}

impl PhysicsParams {
    /// One explicit-Euler step of the cart-pole equations. Positions advance
    /// with pre-step velocities, then velocities advance with the computed
    /// accelerations. Reward and termination are evaluated on the successor
    /// state.
    pub fn step(&self, s: State, a: Action) -> Result<StepResult> {
        if !s.is_finite() {
            return Err(Error::InvalidState(s));
        }
        let force = match a {
            Action::Left => -self.force_mag,
            Action::Right => self.force_mag,
        };
        let total_mass = self.mass_cart + self.mass_pole;
        let pole_mass_length = self.mass_pole * self.pole_half_length;
        let cos_theta = s.theta.cos();
        let sin_theta = s.theta.sin();

        let temp = (force + pole_mass_length * s.theta_dot * s.theta_dot * sin_theta) / total_mass;
        let theta_acc = (self.gravity * sin_theta - cos_theta * temp)
            / (self.pole_half_length
                * (4.0 / 3.0 - self.mass_pole * cos_theta * cos_theta / total_mass));
        let x_acc = temp - pole_mass_length * theta_acc * cos_theta / total_mass;

        let next = State {
            x: s.x + self.tau * s.x_dot,
            x_dot: s.x_dot + self.tau * x_acc,
            theta: s.theta + self.tau * s.theta_dot,
            theta_dot: s.theta_dot + self.tau * theta_acc,
        };
        Ok(StepResult {
            next_state: next,
            reward: self.reward(next),
            terminal: self.is_terminal(next),
        })
    }

    /// Reward of arriving in `next`: 1 at the centered upright state, falling
    /// off quadratically in cart position and pole angle relative to the
    /// termination bounds. Unclamped; slightly negative when a terminal step
    /// overshoots a bound.
    pub fn reward(&self, next: State) -> f64 {
        let px = next.x / self.x_bound;
        let pt = next.theta / self.theta_bound;
        (1.0 - px * px + 1.0 - pt * pt) / 2.0
    }

    /// Strict bound violation in cart position or pole angle.
    pub fn is_terminal(&self, s: State) -> bool {
        s.x.abs() > self.x_bound || s.theta.abs() > self.theta_bound
    }
}

/// Episode start state: each component independently uniform on
/// [-0.05, 0.05).
pub fn reset<R: Rng + ?Sized>(rng: &mut R) -> State {
    let mut draw = || rng.random_range(-0.05..0.05);
    State {
        x: draw(),
        x_dot: draw(),
        theta: draw(),
        theta_dot: draw(),
    }
}
