#ifndef QLAB_H
#define QLAB_H

/* Generated by cbindgen from the qlab-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of a C-ABI call.
typedef enum QlabStatus {
  QLAB_STATUS_OK = 0,
  QLAB_STATUS_NULL_POINTER = 1,
  QLAB_STATUS_INVALID_ARGUMENT = 2,
  QLAB_STATUS_INVALID_STATE = 3,
  QLAB_STATUS_IO_ERROR = 4,
  QLAB_STATUS_PARSE_ERROR = 5,
  QLAB_STATUS_UTF8_ERROR = 6,
} QlabStatus;

// Opaque dataset handle.
typedef struct QlabDataset QlabDataset;

// Opaque learned transition model handle.
typedef struct QlabDynamicsModel QlabDynamicsModel;

// Opaque policy handle.
typedef struct QlabPolicy QlabPolicy;

// Opaque Q-function handle.
typedef struct QlabQFunction QlabQFunction;

// Physics constants and termination bounds by value.
typedef struct QlabPhysicsParams {
  double gravity;
  double mass_cart;
  double mass_pole;
  double pole_half_length;
  double force_mag;
  double tau;
  double x_bound;
  double theta_bound;
} QlabPhysicsParams;

// Cart-pole state by value.
typedef struct QlabState {
  double x;
  double x_dot;
  double theta;
  double theta_dot;
} QlabState;

// Outcome of one dynamics step.
typedef struct QlabStepResult {
  struct QlabState next_state;
  double reward;
  bool terminal;
} QlabStepResult;

// One recorded transition.
typedef struct QlabTransition {
  struct QlabState state;
  // 0 = left, 1 = right.
  int32_t action;
  struct QlabState next_state;
  double reward;
  bool terminal;
} QlabTransition;

// Aggregate policy-evaluation outcome.
typedef struct QlabEvalReport {
  double avg_return;
  double success_rate;
  bool successful;
  uint64_t n_episodes;
  uint64_t max_steps;
} QlabEvalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent error on this thread. The pointer stays valid
// until the next failing call on the same thread.
const char *qlab_last_error_message(void);

// Library version as a static string.
const char *qlab_version(void);

// Default physics constants.
//
// # Safety
// `out` must point to writable memory for one `QlabPhysicsParams`.
enum QlabStatus qlab_physics_default(struct QlabPhysicsParams *out);

// One dynamics step.
//
// # Safety
// `physics` and `out` must be valid pointers.
enum QlabStatus qlab_step(const struct QlabPhysicsParams *physics,
                          struct QlabState state,
                          int32_t action,
                          struct QlabStepResult *out);

// Reward of arriving in `next_state`.
//
// # Safety
// `physics` and `out` must be valid pointers.
enum QlabStatus qlab_reward(const struct QlabPhysicsParams *physics,
                            struct QlabState next_state,
                            double *out);

// Strict termination test.
//
// # Safety
// `physics` and `out` must be valid pointers.
enum QlabStatus qlab_is_terminal(const struct QlabPhysicsParams *physics,
                                 struct QlabState state,
                                 bool *out);

// Episode start state drawn from the seeded reset distribution.
//
// # Safety
// `out` must be a valid pointer.
enum QlabStatus qlab_reset(uint64_t seed, struct QlabState *out);

// Generate an offline dataset with a uniform random behavior policy.
//
// # Safety
// `physics` and `out` must be valid pointers; the returned handle must be
// released with [`qlab_dataset_free`].
enum QlabStatus qlab_dataset_generate(uint64_t n,
                                      const struct QlabPhysicsParams *physics,
                                      uint64_t seed,
                                      struct QlabDataset **out);

// Load a dataset CSV.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` a valid pointer;
// the returned handle must be released with [`qlab_dataset_free`].
enum QlabStatus qlab_dataset_load(const char *path, struct QlabDataset **out);

// Save a dataset as CSV.
//
// # Safety
// `handle` must be a live dataset handle and `path` a valid NUL-terminated
// string.
enum QlabStatus qlab_dataset_save(const struct QlabDataset *handle, const char *path);

// Number of transitions.
//
// # Safety
// `handle` must be a live dataset handle and `out` a valid pointer.
enum QlabStatus qlab_dataset_len(const struct QlabDataset *handle, uint64_t *out);

// Copy out transition `index`.
//
// # Safety
// `handle` must be a live dataset handle and `out` a valid pointer.
enum QlabStatus qlab_dataset_get(const struct QlabDataset *handle,
                                 uint64_t index,
                                 struct QlabTransition *out);

// Release a dataset handle.
//
// # Safety
// `handle` must have come from this library and not been freed before.
void qlab_dataset_free(struct QlabDataset *handle);

// Load Q parameters from a value file.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` a valid pointer;
// the returned handle must be released with [`qlab_q_free`].
enum QlabStatus qlab_q_load(const char *path, struct QlabQFunction **out);

// Save Q parameters to a value file.
//
// # Safety
// `handle` must be a live Q handle and `path` a valid NUL-terminated string.
enum QlabStatus qlab_q_save(const struct QlabQFunction *handle, const char *path);

// Q(state, action).
//
// # Safety
// `handle` must be a live Q handle and `out` a valid pointer.
enum QlabStatus qlab_q_value(const struct QlabQFunction *handle,
                             struct QlabState state,
                             int32_t action,
                             double *out);

// Greedy action index (ties toward left).
//
// # Safety
// `handle` must be a live Q handle and `out` a valid pointer.
enum QlabStatus qlab_q_greedy_action(const struct QlabQFunction *handle,
                                     struct QlabState state,
                                     int32_t *out);

// Release a Q handle.
//
// # Safety
// `handle` must have come from this library and not been freed before.
void qlab_q_free(struct QlabQFunction *handle);

// Greedy policy over a Q-function (the Q is copied into the policy).
//
// # Safety
// `q` must be a live Q handle and `out` a valid pointer; the returned handle
// must be released with [`qlab_policy_free`].
enum QlabStatus qlab_policy_greedy(const struct QlabQFunction *q, struct QlabPolicy **out);

// Epsilon-greedy policy over a Q-function.
//
// # Safety
// `q` must be a live Q handle and `out` a valid pointer; the returned handle
// must be released with [`qlab_policy_free`].
enum QlabStatus qlab_policy_epsilon_greedy(const struct QlabQFunction *q,
                                           double epsilon,
                                           struct QlabPolicy **out);

// The fixed push-left policy.
//
// # Safety
// `out` must be a valid pointer; release with [`qlab_policy_free`].
enum QlabStatus qlab_policy_push_left(struct QlabPolicy **out);

// The fixed policy that pushes against the pole angle.
//
// # Safety
// `out` must be a valid pointer; release with [`qlab_policy_free`].
enum QlabStatus qlab_policy_anti_angle(struct QlabPolicy **out);

// Sample the policy's action at `state`; stochastic policies draw from the
// stream seeded by `seed`.
//
// # Safety
// `handle` must be a live policy handle and `out` a valid pointer.
enum QlabStatus qlab_policy_action(const struct QlabPolicy *handle,
                                   struct QlabState state,
                                   uint64_t seed,
                                   int32_t *out);

// Release a policy handle.
//
// # Safety
// `handle` must have come from this library and not been freed before.
void qlab_policy_free(struct QlabPolicy *handle);

// Load a learned transition model.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` a valid pointer;
// the returned handle must be released with [`qlab_model_free`].
enum QlabStatus qlab_model_load(const char *path, struct QlabDynamicsModel **out);

// Predicted successor state of a learned model.
//
// # Safety
// `handle` must be a live model handle and `out` a valid pointer.
enum QlabStatus qlab_model_predict(const struct QlabDynamicsModel *handle,
                                   struct QlabState state,
                                   int32_t action,
                                   struct QlabState *out);

// Release a model handle.
//
// # Safety
// `handle` must have come from this library and not been freed before.
void qlab_model_free(struct QlabDynamicsModel *handle);

// Truncated discounted return of a policy rollout on the real dynamics,
// starting from `state` with `first_action`.
//
// # Safety
// `physics`, `policy`, and `out` must be valid pointers.
enum QlabStatus qlab_rollout_return(const struct QlabPhysicsParams *physics,
                                    const struct QlabPolicy *policy,
                                    struct QlabState state,
                                    int32_t first_action,
                                    uint64_t horizon,
                                    double gamma,
                                    uint64_t seed,
                                    double *out);

// Evaluate a policy on the real dynamics; see the core crate for the report
// semantics.
//
// # Safety
// `physics`, `policy`, and `out` must be valid pointers.
enum QlabStatus qlab_evaluate_policy(const struct QlabPolicy *policy,
                                     const struct QlabPhysicsParams *physics,
                                     uint64_t n_episodes,
                                     uint64_t max_steps,
                                     uint64_t seed,
                                     struct QlabEvalReport *out);

// Compute rollout-based targets for every transition of a dataset on the
// real dynamics and fit a fresh Q-function to them, writing the parameters
// to `q_out_path`. This is the single-iteration building block of the
// learning loop, exposed so bindings can drive iterations from another
// language.
//
// # Safety
// `data` must be a live dataset handle, `policy` a live policy handle, and
// `q_out_path` a valid NUL-terminated string.
enum QlabStatus qlab_fit_rollout_iteration(const struct QlabDataset *data,
                                           const struct QlabPolicy *policy,
                                           uint64_t horizon,
                                           double gamma,
                                           uint64_t targets_seed,
                                           uint64_t fit_seed,
                                           const char *q_out_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QLAB_H */
