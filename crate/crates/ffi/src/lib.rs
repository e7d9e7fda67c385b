//! C ABI for the qlab cart-pole Q-learning laboratory.
//!
//! Plain-value types (states, physics parameters, step results, reports) are
//! `repr(C)` structs; datasets, Q-functions, policies, and learned models are
//! opaque handles created and freed through paired functions. Every fallible
//! call returns a [`QlabStatus`] code and stores a thread-local message
//! retrievable with [`qlab_last_error_message`].
//!
//! The matching header `include/qlab.h` is generated by cbindgen at build
//! time.

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char};
use std::path::Path;

use qlab::cartpole::{self, Action, PhysicsParams, State};
use qlab::dataset::{self, Dataset};
use qlab::dynamics_model::{self, DynamicsModel};
use qlab::experiments;
use qlab::nn;
use qlab::q_iteration::{Policy, QFunction, RealDynamics, RolloutConfig, rollout_return};
use qlab::rng;

/// Status code of a C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidState = 3,
    IoError = 4,
    ParseError = 5,
    Utf8Error = 6,
}

/// Cart-pole state by value.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QlabState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl From<State> for QlabState {
    fn from(s: State) -> QlabState {
        QlabState {
            x: s.x,
            x_dot: s.x_dot,
            theta: s.theta,
            theta_dot: s.theta_dot,
        }
    }
}

impl From<QlabState> for State {
    fn from(s: QlabState) -> State {
        State::new(s.x, s.x_dot, s.theta, s.theta_dot)
    }
}

/// Physics constants and termination bounds by value.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QlabPhysicsParams {
    pub gravity: f64,
    pub mass_cart: f64,
    pub mass_pole: f64,
    pub pole_half_length: f64,
    pub force_mag: f64,
    pub tau: f64,
    pub x_bound: f64,
    pub theta_bound: f64,
}

impl From<PhysicsParams> for QlabPhysicsParams {
    fn from(p: PhysicsParams) -> QlabPhysicsParams {
        QlabPhysicsParams {
            gravity: p.gravity,
            mass_cart: p.mass_cart,
            mass_pole: p.mass_pole,
            pole_half_length: p.pole_half_length,
            force_mag: p.force_mag,
            tau: p.tau,
            x_bound: p.x_bound,
            theta_bound: p.theta_bound,
        }
    }
}

impl From<QlabPhysicsParams> for PhysicsParams {
    fn from(p: QlabPhysicsParams) -> PhysicsParams {
        PhysicsParams {
            gravity: p.gravity,
            mass_cart: p.mass_cart,
            mass_pole: p.mass_pole,
            pole_half_length: p.pole_half_length,
            force_mag: p.force_mag,
            tau: p.tau,
            x_bound: p.x_bound,
            theta_bound: p.theta_bound,
        }
    }
}

/// Outcome of one dynamics step.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QlabStepResult {
    pub next_state: QlabState,
    pub reward: f64,
    pub terminal: bool,
}

/// One recorded transition.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QlabTransition {
    pub state: QlabState,
    /// 0 = left, 1 = right.
    pub action: i32,
    pub next_state: QlabState,
    pub reward: f64,
    pub terminal: bool,
}

/// Aggregate policy-evaluation outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QlabEvalReport {
    pub avg_return: f64,
    pub success_rate: f64,
    pub successful: bool,
    pub n_episodes: u64,
    pub max_steps: u64,
}

/// Opaque dataset handle.
pub struct QlabDataset(Dataset);

/// Opaque Q-function handle.
pub struct QlabQFunction(QFunction);

/// Opaque policy handle.
pub struct QlabPolicy(Policy);

/// Opaque learned transition model handle.
pub struct QlabDynamicsModel(DynamicsModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl std::fmt::Display) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
}

fn status_of(err: &qlab::Error) -> QlabStatus {
    match err {
        qlab::Error::InvalidState(_) => QlabStatus::InvalidState,
        qlab::Error::Io { .. } => QlabStatus::IoError,
        qlab::Error::Parse { .. } => QlabStatus::ParseError,
        _ => QlabStatus::InvalidArgument,
    }
}

fn fail(err: &qlab::Error) -> QlabStatus {
    set_error(err);
    status_of(err)
}

fn null_arg(what: &str) -> QlabStatus {
    set_error(format!("null pointer argument: {what}"));
    QlabStatus::NullPointer
}

/// Message of the most recent error on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[unsafe(no_mangle)]
pub extern "C" fn qlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[unsafe(no_mangle)]
pub extern "C" fn qlab_version() -> *const c_char {
    static VERSION: &CStr = c"0.1.0";
    VERSION.as_ptr()
}

fn action_from(raw: i32) -> Option<Action> {
    match raw {
        0 => Some(Action::Left),
        1 => Some(Action::Right),
        _ => None,
    }
}

/// # Safety
/// `path` must be a valid NUL-terminated string.
unsafe fn path_from<'a>(path: *const c_char) -> Result<&'a Path, QlabStatus> {
    if path.is_null() {
        return Err(null_arg("path"));
    }
    match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(QlabStatus::Utf8Error)
        }
    }
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> QlabStatus {
    if out.is_null() {
        return null_arg(what);
    }
    unsafe { out.write(value) };
    QlabStatus::Ok
}

// ---------------------------------------------------------------------------
// Physics
// ---------------------------------------------------------------------------

/// Default physics constants.
///
/// # Safety
/// `out` must point to writable memory for one `QlabPhysicsParams`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_physics_default(out: *mut QlabPhysicsParams) -> QlabStatus {
    unsafe { write_out(out, PhysicsParams::default().into(), "out") }
}

/// One dynamics step.
///
/// # Safety
/// `physics` and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_step(
    physics: *const QlabPhysicsParams,
    state: QlabState,
    action: i32,
    out: *mut QlabStepResult,
) -> QlabStatus {
    if physics.is_null() {
        return null_arg("physics");
    }
    let Some(action) = action_from(action) else {
        set_error(format!("action must be 0 or 1, got {action}"));
        return QlabStatus::InvalidArgument;
    };
    let p: PhysicsParams = unsafe { *physics }.into();
    match p.step(state.into(), action) {
        Ok(r) => unsafe {
            write_out(
                out,
                QlabStepResult {
                    next_state: r.next_state.into(),
                    reward: r.reward,
                    terminal: r.terminal,
                },
                "out",
            )
        },
        Err(e) => fail(&e),
    }
}

/// Reward of arriving in `next_state`.
///
/// # Safety
/// `physics` and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_reward(
    physics: *const QlabPhysicsParams,
    next_state: QlabState,
    out: *mut f64,
) -> QlabStatus {
    if physics.is_null() {
        return null_arg("physics");
    }
    let p: PhysicsParams = unsafe { *physics }.into();
    unsafe { write_out(out, p.reward(next_state.into()), "out") }
}

/// Strict termination test.
///
/// # Safety
/// `physics` and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_is_terminal(
    physics: *const QlabPhysicsParams,
    state: QlabState,
    out: *mut bool,
) -> QlabStatus {
    if physics.is_null() {
        return null_arg("physics");
    }
    let p: PhysicsParams = unsafe { *physics }.into();
    unsafe { write_out(out, p.is_terminal(state.into()), "out") }
}

/// Episode start state drawn from the seeded reset distribution.
///
/// # Safety
/// `out` must be a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_reset(seed: u64, out: *mut QlabState) -> QlabStatus {
    let state = cartpole::reset(&mut rng::stream(seed));
    unsafe { write_out(out, state.into(), "out") }
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// Generate an offline dataset with a uniform random behavior policy.
///
/// # Safety
/// `physics` and `out` must be valid pointers; the returned handle must be
/// released with [`qlab_dataset_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_dataset_generate(
    n: u64,
    physics: *const QlabPhysicsParams,
    seed: u64,
    out: *mut *mut QlabDataset,
) -> QlabStatus {
    if physics.is_null() {
        return null_arg("physics");
    }
    let p: PhysicsParams = unsafe { *physics }.into();
    match dataset::generate(n as usize, &p, seed) {
        Ok(d) => unsafe { write_out(out, Box::into_raw(Box::new(QlabDataset(d))), "out") },
        Err(e) => fail(&e),
    }
}

/// Load a dataset CSV.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer;
/// the returned handle must be released with [`qlab_dataset_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_dataset_load(
    path: *const c_char,
    out: *mut *mut QlabDataset,
) -> QlabStatus {
    let path = match unsafe { path_from(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match dataset::load(path) {
        Ok(d) => unsafe { write_out(out, Box::into_raw(Box::new(QlabDataset(d))), "out") },
        Err(e) => fail(&e),
    }
}

/// Save a dataset as CSV.
///
/// # Safety
/// `handle` must be a live dataset handle and `path` a valid NUL-terminated
/// string.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_dataset_save(
    handle: *const QlabDataset,
    path: *const c_char,
) -> QlabStatus {
    if handle.is_null() {
        return null_arg("dataset");
    }
    let path = match unsafe { path_from(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match dataset::save(unsafe { &(*handle).0 }, path) {
        Ok(()) => QlabStatus::Ok,
        Err(e) => fail(&e),
    }
}

/// Number of transitions.
///
/// # Safety
/// `handle` must be a live dataset handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_dataset_len(handle: *const QlabDataset, out: *mut u64) -> QlabStatus {
    if handle.is_null() {
        return null_arg("dataset");
    }
    unsafe { write_out(out, (*handle).0.len() as u64, "out") }
}

/// Copy out transition `index`.
///
/// # Safety
/// `handle` must be a live dataset handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_dataset_get(
    handle: *const QlabDataset,
    index: u64,
    out: *mut QlabTransition,
) -> QlabStatus {
    if handle.is_null() {
        return null_arg("dataset");
    }
    let data = unsafe { &(*handle).0 };
    let Some(t) = data.transitions.get(index as usize) else {
        set_error(format!(
            "index {index} out of range for dataset of {}",
            data.len()
        ));
        return QlabStatus::InvalidArgument;
    };
    unsafe {
        write_out(
            out,
            QlabTransition {
                state: t.state.into(),
                action: t.action.index() as i32,
                next_state: t.next_state.into(),
                reward: t.reward,
                terminal: t.terminal,
            },
            "out",
        )
    }
}

/// Release a dataset handle.
///
/// # Safety
/// `handle` must have come from this library and not been freed before.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_dataset_free(handle: *mut QlabDataset) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

// ---------------------------------------------------------------------------
// Q-functions
// ---------------------------------------------------------------------------

/// Load Q parameters from a value file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer;
/// the returned handle must be released with [`qlab_q_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_q_load(
    path: *const c_char,
    out: *mut *mut QlabQFunction,
) -> QlabStatus {
    let path = match unsafe { path_from(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match nn::load_params(path) {
        Ok(params) => unsafe {
            write_out(
                out,
                Box::into_raw(Box::new(QlabQFunction(QFunction::new(params)))),
                "out",
            )
        },
        Err(e) => fail(&e),
    }
}

/// Save Q parameters to a value file.
///
/// # Safety
/// `handle` must be a live Q handle and `path` a valid NUL-terminated string.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_q_save(
    handle: *const QlabQFunction,
    path: *const c_char,
) -> QlabStatus {
    if handle.is_null() {
        return null_arg("q");
    }
    let path = match unsafe { path_from(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match nn::save_params(unsafe { &(*handle).0.params }, path) {
        Ok(()) => QlabStatus::Ok,
        Err(e) => fail(&e),
    }
}

/// Q(state, action).
///
/// # Safety
/// `handle` must be a live Q handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_q_value(
    handle: *const QlabQFunction,
    state: QlabState,
    action: i32,
    out: *mut f64,
) -> QlabStatus {
    if handle.is_null() {
        return null_arg("q");
    }
    let Some(action) = action_from(action) else {
        set_error(format!("action must be 0 or 1, got {action}"));
        return QlabStatus::InvalidArgument;
    };
    unsafe { write_out(out, (*handle).0.value(state.into(), action), "out") }
}

/// Greedy action index (ties toward left).
///
/// # Safety
/// `handle` must be a live Q handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_q_greedy_action(
    handle: *const QlabQFunction,
    state: QlabState,
    out: *mut i32,
) -> QlabStatus {
    if handle.is_null() {
        return null_arg("q");
    }
    let action = unsafe { &(*handle).0 }.greedy_action(state.into());
    unsafe { write_out(out, action.index() as i32, "out") }
}

/// Release a Q handle.
///
/// # Safety
/// `handle` must have come from this library and not been freed before.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_q_free(handle: *mut QlabQFunction) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

/// Greedy policy over a Q-function (the Q is copied into the policy).
///
/// # Safety
/// `q` must be a live Q handle and `out` a valid pointer; the returned handle
/// must be released with [`qlab_policy_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_policy_greedy(
    q: *const QlabQFunction,
    out: *mut *mut QlabPolicy,
) -> QlabStatus {
    if q.is_null() {
        return null_arg("q");
    }
    let policy = Policy::Greedy(unsafe { (*q).0.clone() });
    unsafe { write_out(out, Box::into_raw(Box::new(QlabPolicy(policy))), "out") }
}

/// Epsilon-greedy policy over a Q-function.
///
/// # Safety
/// `q` must be a live Q handle and `out` a valid pointer; the returned handle
/// must be released with [`qlab_policy_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_policy_epsilon_greedy(
    q: *const QlabQFunction,
    epsilon: f64,
    out: *mut *mut QlabPolicy,
) -> QlabStatus {
    if q.is_null() {
        return null_arg("q");
    }
    match Policy::epsilon_greedy(unsafe { (*q).0.clone() }, epsilon) {
        Ok(policy) => unsafe { write_out(out, Box::into_raw(Box::new(QlabPolicy(policy))), "out") },
        Err(e) => fail(&e),
    }
}

/// The fixed push-left policy.
///
/// # Safety
/// `out` must be a valid pointer; release with [`qlab_policy_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_policy_push_left(out: *mut *mut QlabPolicy) -> QlabStatus {
    unsafe {
        write_out(
            out,
            Box::into_raw(Box::new(QlabPolicy(Policy::PushLeft))),
            "out",
        )
    }
}

/// The fixed policy that pushes against the pole angle.
///
/// # Safety
/// `out` must be a valid pointer; release with [`qlab_policy_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_policy_anti_angle(out: *mut *mut QlabPolicy) -> QlabStatus {
    unsafe {
        write_out(
            out,
            Box::into_raw(Box::new(QlabPolicy(Policy::AntiAngle))),
            "out",
        )
    }
}

/// Sample the policy's action at `state`; stochastic policies draw from the
/// stream seeded by `seed`.
///
/// # Safety
/// `handle` must be a live policy handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_policy_action(
    handle: *const QlabPolicy,
    state: QlabState,
    seed: u64,
    out: *mut i32,
) -> QlabStatus {
    if handle.is_null() {
        return null_arg("policy");
    }
    let action = unsafe { &(*handle).0 }.action(state.into(), &mut rng::stream(seed));
    unsafe { write_out(out, action.index() as i32, "out") }
}

/// Release a policy handle.
///
/// # Safety
/// `handle` must have come from this library and not been freed before.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_policy_free(handle: *mut QlabPolicy) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

// ---------------------------------------------------------------------------
// Learned transition models
// ---------------------------------------------------------------------------

/// Load a learned transition model.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer;
/// the returned handle must be released with [`qlab_model_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_model_load(
    path: *const c_char,
    out: *mut *mut QlabDynamicsModel,
) -> QlabStatus {
    let path = match unsafe { path_from(path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match dynamics_model::load_model(path) {
        Ok(m) => unsafe { write_out(out, Box::into_raw(Box::new(QlabDynamicsModel(m))), "out") },
        Err(e) => fail(&e),
    }
}

/// Predicted successor state of a learned model.
///
/// # Safety
/// `handle` must be a live model handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_model_predict(
    handle: *const QlabDynamicsModel,
    state: QlabState,
    action: i32,
    out: *mut QlabState,
) -> QlabStatus {
    if handle.is_null() {
        return null_arg("model");
    }
    let Some(action) = action_from(action) else {
        set_error(format!("action must be 0 or 1, got {action}"));
        return QlabStatus::InvalidArgument;
    };
    let next = unsafe { &(*handle).0 }.predict(state.into(), action);
    unsafe { write_out(out, next.into(), "out") }
}

/// Release a model handle.
///
/// # Safety
/// `handle` must have come from this library and not been freed before.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_model_free(handle: *mut QlabDynamicsModel) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

// ---------------------------------------------------------------------------
// Rollouts and evaluation
// ---------------------------------------------------------------------------

/// Truncated discounted return of a policy rollout on the real dynamics,
/// starting from `state` with `first_action`.
///
/// # Safety
/// `physics`, `policy`, and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_rollout_return(
    physics: *const QlabPhysicsParams,
    policy: *const QlabPolicy,
    state: QlabState,
    first_action: i32,
    horizon: u64,
    gamma: f64,
    seed: u64,
    out: *mut f64,
) -> QlabStatus {
    if physics.is_null() {
        return null_arg("physics");
    }
    if policy.is_null() {
        return null_arg("policy");
    }
    let Some(first) = action_from(first_action) else {
        set_error(format!("action must be 0 or 1, got {first_action}"));
        return QlabStatus::InvalidArgument;
    };
    let cfg = RolloutConfig {
        horizon: horizon as usize,
        gamma,
    };
    if let Err(e) = cfg.validate() {
        return fail(&e);
    }
    let p: PhysicsParams = unsafe { *physics }.into();
    let stepper = RealDynamics(p);
    let value = rollout_return(
        state.into(),
        first,
        unsafe { &(*policy).0 },
        &stepper,
        &cfg,
        &mut rng::stream(seed),
    );
    unsafe { write_out(out, value, "out") }
}

/// Evaluate a policy on the real dynamics; see the core crate for the report
/// semantics.
///
/// # Safety
/// `physics`, `policy`, and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_evaluate_policy(
    policy: *const QlabPolicy,
    physics: *const QlabPhysicsParams,
    n_episodes: u64,
    max_steps: u64,
    seed: u64,
    out: *mut QlabEvalReport,
) -> QlabStatus {
    if policy.is_null() {
        return null_arg("policy");
    }
    if physics.is_null() {
        return null_arg("physics");
    }
    let p: PhysicsParams = unsafe { *physics }.into();
    match experiments::evaluate_policy(
        unsafe { &(*policy).0 },
        &p,
        n_episodes as usize,
        max_steps as usize,
        seed,
    ) {
        Ok(r) => unsafe {
            write_out(
                out,
                QlabEvalReport {
                    avg_return: r.avg_return,
                    success_rate: r.success_rate,
                    successful: r.successful,
                    n_episodes: r.n_episodes as u64,
                    max_steps: r.max_steps as u64,
                },
                "out",
            )
        },
        Err(e) => fail(&e),
    }
}

/// Compute rollout-based targets for every transition of a dataset on the
/// real dynamics and fit a fresh Q-function to them, writing the parameters
/// to `q_out_path`. This is the single-iteration building block of the
/// learning loop, exposed so bindings can drive iterations from another
/// language.
///
/// # Safety
/// `data` must be a live dataset handle, `policy` a live policy handle, and
/// `q_out_path` a valid NUL-terminated string.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn qlab_fit_rollout_iteration(
    data: *const QlabDataset,
    policy: *const QlabPolicy,
    horizon: u64,
    gamma: f64,
    targets_seed: u64,
    fit_seed: u64,
    q_out_path: *const c_char,
) -> QlabStatus {
    if data.is_null() {
        return null_arg("data");
    }
    if policy.is_null() {
        return null_arg("policy");
    }
    let path = match unsafe { path_from(q_out_path) } {
        Ok(p) => p,
        Err(status) => return status,
    };
    let dataset = unsafe { &(*data).0 };
    let cfg = RolloutConfig {
        horizon: horizon as usize,
        gamma,
    };
    let stepper = RealDynamics(dataset.physics);
    let targets = match qlab::q_iteration::bsf_targets(
        unsafe { &(*policy).0 },
        dataset,
        &stepper,
        &cfg,
        targets_seed,
    ) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let train_cfg = nn::TrainConfig {
        seed: fit_seed,
        ..nn::TrainConfig::default()
    };
    let q = match qlab::q_iteration::fit_q(&targets, &train_cfg) {
        Ok(q) => q,
        Err(e) => return fail(&e),
    };
    match nn::save_params(&q.params, path) {
        Ok(()) => QlabStatus::Ok,
        Err(e) => fail(&e),
    }
}
