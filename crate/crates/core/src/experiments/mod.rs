//! Experiment harness: policy evaluation, the fixed-target seed-variance
//! study, pole-angle value slices with jump metrics, and the CSV/SVG
//! emitters that persist results.

pub mod emit;
pub mod eval;
pub mod plot;
pub mod seed_study;
pub mod slice;

pub use emit::{
    HistoryRow, emit_eval_csv, emit_history_csv, emit_slice_csv, file_sha256, read_eval_csv,
    read_history_csv, read_slice_csv, save_history, write_eval_report, write_manifest,
};
pub use eval::{EvalReport, evaluate_policy, evaluate_policy_with};
pub use plot::{plot_history, plot_seed_study, plot_slice};
pub use seed_study::{EvalConfig, SeedStudy, SpreadSummary, seed_variance_study};
pub use slice::{
    DiscontinuityMetrics, SliceResult, SliceSpec, discontinuity_metrics, jump_count,
    max_adjacent_jump, q_slice,
};
